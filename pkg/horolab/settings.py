"""
Settings used by the `horolab` console script when DJANGO_SETTINGS_MODULE is unset.
"""
import os

SECRET_KEY = os.getenv("HOROLAB_SECRET_KEY", "horolab-local-only")

DEBUG = False

INSTALLED_APPS = ["horolab"]

CACHES = {"default": {"BACKEND": "django.core.cache.backends.locmem.LocMemCache"}}

HOROLAB = {
    "ENCODER_CLASS": "horolab.encoders.BasicConfigEncoder",
    "STORAGE": {"CLASS": "horolab.storage.MemoryReportStorage", "CACHE_NAME": "default"},
    "LOCK": {"CLASS": "horolab.locks.basic.ThreadLock", "TIMEOUT": 0.1},
    "OUTPUT_DIR": os.getenv("HOROLAB_OUTPUT_DIR", "horolab-output"),
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {"plain": {"format": "%(levelname)s %(name)s: %(message)s"}},
    "handlers": {"console": {"class": "logging.StreamHandler", "formatter": "plain"}},
    "loggers": {"django-horolab": {"handlers": ["console"], "level": "INFO"}},
}

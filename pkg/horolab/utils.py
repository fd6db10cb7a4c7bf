import contextlib
import contextvars
import os

from django.conf import settings
from django.utils import module_loading


def get_horolab_settings():
    if not settings.configured:
        return dict()
    return getattr(settings, "HOROLAB", dict())


def get_encoder_class():
    return module_loading.import_string(
        get_horolab_settings().get("ENCODER_CLASS", "horolab.encoders.BasicConfigEncoder")
    )


def get_storage_settings():
    return get_horolab_settings().get("STORAGE", dict())


def get_storage_class():
    return module_loading.import_string(
        get_storage_settings().get("CLASS", "horolab.storage.MemoryReportStorage")
    )


def get_storage_cache_name():
    return get_storage_settings().get("CACHE_NAME", "default")


def get_storage_directory():
    default = os.path.join(get_output_dir(), ".reports")
    return get_storage_settings().get("DIRECTORY", default)


def get_lock_settings():
    return get_horolab_settings().get("LOCK", dict())


def get_lock_class():
    return module_loading.import_string(
        get_lock_settings().get("CLASS", "horolab.locks.basic.ThreadLock")
    )


def get_lock_location():
    return get_lock_settings().get("LOCATION", "redis://localhost:6379/1")


def get_lock_timeout():
    return get_lock_settings().get("TIMEOUT", 0.1)  # default to 100ms


def get_lock_enable():
    return get_lock_settings().get("ENABLE", True)


def get_lock_time_to_live():
    return get_lock_settings().get("TTL", 300)  # default to 5 minutes


def get_lock_name():
    return get_lock_settings().get("NAME", "HorolabReportLock")


_threads_override = contextvars.ContextVar("horolab_threads", default=None)


@contextlib.contextmanager
def override_threads(threads):
    """
    Worker count for the enclosed block, ahead of the THREADS setting.
    """
    token = _threads_override.set(threads)
    try:
        yield
    finally:
        _threads_override.reset(token)


def get_threads():
    threads = _threads_override.get()
    if threads is None:
        threads = get_horolab_settings().get("THREADS")
    if threads is None:
        threads = os.getenv("HOROLAB_THREADS", 1)
    return max(1, int(threads))


def get_output_dir():
    return get_horolab_settings().get("OUTPUT_DIR", "horolab-output")


def get_quadrature_settings():
    defaults = {"ORDER": 64, "PANELS": None, "MC_SAMPLES": 1000000, "MAX_TENSOR_DIM": 3}
    defaults.update(get_horolab_settings().get("QUADRATURE", dict()))
    return defaults


def get_quadrature_panels(dim):
    # Composite panels per axis when PANELS is unset.
    return get_quadrature_settings()["PANELS"] or {1: 16, 2: 2}.get(dim, 1)


def get_enumeration_budget():
    return get_horolab_settings().get("ENUMERATION_BUDGET", 2000000)


def get_drift_budget():
    return get_horolab_settings().get("DRIFT_BUDGET", 64)

import logging
import time

from horolab import __version__
from horolab import utils
from horolab.config import validate_config
from horolab.decorators import registry
from horolab.exceptions import ConfigError, DecoratorsMutuallyExclusiveError
from horolab.reports import ExperimentReport, build_payload

logger = logging.getLogger("django-horolab.horolab.runner")


class ExperimentRunner:
    """
    Validates a config, dispatches it to the registered experiment, and serves repeated
    configs from report storage. Experiments opt out of storage with @uncached.
    """

    def __init__(self):
        # Registers the built-in experiment kinds.
        from horolab import experiments  # noqa: F401

        self.storage = utils.get_storage_class()()
        self.encoder = utils.get_encoder_class()()
        self.storage_lock = utils.get_lock_class()()

    @staticmethod
    def _flags_from_function(kind, func):
        is_cached = getattr(func, "horolab_cached", False)
        is_uncached = getattr(func, "horolab_uncached", False)
        cache_name = getattr(func, "horolab_cache_name", utils.get_storage_cache_name())

        if is_cached and is_uncached:
            raise DecoratorsMutuallyExclusiveError(
                "@cached and @uncached decorators are mutually exclusive for "
                'experiment "{}"'.format(kind)
            )
        return cache_name, is_uncached

    def perform_lookup(self, cache_name, encoded_key):
        return self.storage.retrieve_data(cache_name, encoded_key)

    def lookup(self, cache_name, encoded_key, lock=None):
        if lock is None:
            lock = utils.get_lock_enable()

        if not lock:
            return self.perform_lookup(cache_name, encoded_key)

        with self.storage_lock.holding(encoded_key) as acquired:
            if not acquired:
                logger.warning(
                    "Report storage locked; recomputing",
                    extra={"key": encoded_key, "cache_name": cache_name},
                )
                return False, None
            return self.perform_lookup(cache_name, encoded_key)

    def store(self, cache_name, encoded_key, report, lock=None):
        if lock is None:
            lock = utils.get_lock_enable()

        if not lock:
            self.storage.store_data(cache_name, encoded_key, report.to_dict())
            return

        with self.storage_lock.holding(encoded_key) as acquired:
            if acquired:
                self.storage.store_data(cache_name, encoded_key, report.to_dict())
            else:
                logger.warning(
                    "Report storage locked; report not stored",
                    extra={"key": encoded_key, "cache_name": cache_name},
                )

    def run(self, raw_config, kind=None) -> ExperimentReport:
        config = validate_config(raw_config, kind)
        func = registry.get(config.kind)
        if func is None:
            raise ConfigError("kind", 'No experiment registered for "{}".'.format(config.kind))
        cache_name, is_uncached = self._flags_from_function(config.kind, func)
        encoded_key = self.encoder.encode_config(config.canonical())

        if not is_uncached:
            found, data = self.lookup(cache_name, encoded_key)
            if found:
                logger.info(
                    "Serving stored %s report",
                    config.kind,
                    extra={"kind": config.kind, "key": encoded_key},
                )
                return ExperimentReport.from_dict(data, cached=True)

        started = time.perf_counter()
        outcome = func(config)
        report = ExperimentReport(
            kind=config.kind,
            config=config.echo(),
            version=__version__,
            key=encoded_key,
            payload=build_payload(outcome),
            assertions=dict(outcome.assertions),
            warnings=list(outcome.warnings),
            wall_clock=time.perf_counter() - started,
        )
        logger.info(
            "%s experiment %s in %.2fs",
            config.kind,
            report.status,
            report.wall_clock,
            extra={"kind": config.kind, "key": encoded_key, "seed": config.seed},
        )

        if not is_uncached:
            self.store(cache_name, encoded_key, report)
        return report

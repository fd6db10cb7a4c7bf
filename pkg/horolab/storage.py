import abc
import json
import os
import tempfile
from collections import defaultdict
from typing import Optional, Tuple

from django.core.cache import caches

from horolab import utils

ReportLookup = Tuple[bool, Optional[dict]]


class ReportStorage(abc.ABC):
    """
    Where finished reports are kept, keyed by the hash of their validated config.
    Reports go in and come out as JSON-compatible dicts.
    """

    @abc.abstractmethod
    def store_data(self, cache_name: str, encoded_key: str, report: dict) -> None:
        """
        :param cache_name: Which store to use; a django `CACHES` alias for cache-backed
            storage, a subdirectory for file-backed storage.
        :param encoded_key: The config hash the report is stored under.
        :param report: The report, as returned by `ExperimentReport.to_dict`.
        """
        raise NotImplementedError

    @abc.abstractmethod
    def retrieve_data(self, cache_name: str, encoded_key: str) -> ReportLookup:
        """
        :return: (found, report); report is None when nothing is stored under the key.
        """
        raise NotImplementedError

    @staticmethod
    @abc.abstractmethod
    def validate_storage(name: str):
        """
        Raise if `name` cannot hold reports. Called when `@cached(cache_name)` is
        applied, so a misconfigured experiment fails at import.
        """
        raise NotImplementedError


class MemoryReportStorage(ReportStorage):
    """
    Reports for the life of the runner only.
    """

    def __init__(self):
        self.reports = defaultdict(dict)

    def store_data(self, cache_name: str, encoded_key: str, report: dict) -> None:
        self.reports[cache_name][encoded_key] = report

    def retrieve_data(self, cache_name: str, encoded_key: str) -> ReportLookup:
        stored = self.reports.get(cache_name, {})
        if encoded_key in stored:
            return True, stored[encoded_key]
        return False, None

    @staticmethod
    def validate_storage(name: str):
        pass


class CacheReportStorage(ReportStorage):
    """
    Reports as JSON strings in a django cache, so a shared backend such as django-redis
    serves them to every process.
    """

    def store_data(self, cache_name: str, encoded_key: str, report: dict) -> None:
        caches[cache_name].set(encoded_key, json.dumps(report, sort_keys=True))

    def retrieve_data(self, cache_name: str, encoded_key: str) -> ReportLookup:
        text = caches[cache_name].get(encoded_key)
        if text is None:
            return False, None
        return True, json.loads(text)

    @staticmethod
    def validate_storage(name: str):
        # InvalidCacheBackendError for an unknown alias.
        caches[name]


class FileReportStorage(ReportStorage):
    """
    One `<key>.json` per report under `<DIRECTORY>/<cache_name>/`. Survives between runs
    without a cache server.
    """

    @staticmethod
    def path(cache_name: str, encoded_key: str = "") -> str:
        directory = os.path.join(utils.get_storage_directory(), cache_name)
        if not encoded_key:
            return directory
        return os.path.join(directory, encoded_key + ".json")

    def store_data(self, cache_name: str, encoded_key: str, report: dict) -> None:
        directory = self.path(cache_name)
        os.makedirs(directory, exist_ok=True)
        handle, partial = tempfile.mkstemp(dir=directory, suffix=".part")
        with os.fdopen(handle, "w") as f:
            json.dump(report, f, sort_keys=True)
        os.replace(partial, self.path(cache_name, encoded_key))

    def retrieve_data(self, cache_name: str, encoded_key: str) -> ReportLookup:
        try:
            with open(self.path(cache_name, encoded_key)) as f:
                return True, json.load(f)
        except FileNotFoundError:
            return False, None

    @staticmethod
    def validate_storage(name: str):
        os.makedirs(FileReportStorage.path(name), exist_ok=True)

import abc
import contextlib
import threading
from collections import Counter
from typing import Dict, Optional

from horolab import utils


class ReportLock(abc.ABC):
    """
    Guards report storage. Locks are taken per report key; `None` is the lock shared by
    callers that do not name a key.
    """

    @abc.abstractmethod
    def acquire(self, key: Optional[str] = None) -> bool:
        raise NotImplementedError()

    @abc.abstractmethod
    def release(self, key: Optional[str] = None):
        raise NotImplementedError()

    @contextlib.contextmanager
    def holding(self, key: Optional[str] = None):
        """
        Yield whether the lock for `key` was acquired within the timeout; release on exit
        only if it was.
        """
        acquired = self.acquire(key)
        try:
            yield acquired
        finally:
            if acquired:
                self.release(key)


class ThreadLock(ReportLock):
    """
    Should be used only when one process shares the report storage. Each key maps to a
    `threading.Lock` shared by every instance in the process; the entry is dropped once
    no thread holds or waits for it.
    """

    registry_lock = threading.Lock()
    key_locks: Dict[Optional[str], threading.Lock] = {}
    key_users: Counter = Counter()

    def acquire(self, key: Optional[str] = None) -> bool:
        with self.registry_lock:
            lock = self.key_locks.setdefault(key, threading.Lock())
            self.key_users[key] += 1
        if lock.acquire(blocking=True, timeout=utils.get_lock_timeout()):
            return True
        with self.registry_lock:
            self.forget(key)
        return False

    def release(self, key: Optional[str] = None):
        with self.registry_lock:
            self.key_locks[key].release()
            self.forget(key)

    def forget(self, key: Optional[str]):
        # Caller holds registry_lock.
        self.key_users[key] -= 1
        if self.key_users[key] <= 0:
            del self.key_users[key]
            del self.key_locks[key]

from typing import Dict, Optional

from redis import Redis
from redis.lock import Lock

from horolab import utils
from horolab.locks.basic import ReportLock


class MultiProcessRedisLock(ReportLock):
    """
    For several horolab processes sharing one report cache. The lock for a report key
    lives on the Redis server as `<NAME>:<key>`; the unkeyed lock is plain `<NAME>`.
    """

    def __init__(self):
        location = utils.get_lock_location()
        if not location:
            raise ValueError("Redis server location must be set in the settings file.")

        self.client = Redis.from_url(location)
        self.name = utils.get_lock_name()
        self.held: Dict[Optional[str], Lock] = {}

    def lock_name(self, key: Optional[str] = None) -> str:
        return self.name if key is None else "{}:{}".format(self.name, key)

    def acquire(self, key: Optional[str] = None) -> bool:
        lock = self.client.lock(
            name=self.lock_name(key),
            # Seconds before a crashed holder's lock is dropped by the server.
            timeout=utils.get_lock_time_to_live(),
            blocking_timeout=utils.get_lock_timeout(),
        )
        if not lock.acquire():
            return False
        self.held[key] = lock
        return True

    def release(self, key: Optional[str] = None):
        self.held.pop(key).release()

from django.test import override_settings
import pytest

from horolab.locks import basic, redis


def test_single_thread_lock():
    obj = basic.ThreadLock()
    assert obj.acquire() is True
    assert obj.acquire() is False
    obj.release()
    assert obj.acquire() is True
    obj.release()


def test_keys_lock_independently():
    obj = basic.ThreadLock()
    assert obj.acquire("a1") is True
    assert obj.acquire("b2") is True
    assert basic.ThreadLock().acquire("a1") is False
    obj.release("a1")
    obj.release("b2")


def test_holding_releases_on_exit():
    obj = basic.ThreadLock()
    with obj.holding("report") as acquired:
        assert acquired is True
        with obj.holding("report") as nested:
            assert nested is False
    assert obj.acquire("report") is True
    obj.release("report")


def test_holding_releases_on_error():
    obj = basic.ThreadLock()
    with pytest.raises(RuntimeError):
        with obj.holding():
            raise RuntimeError("boom")
    assert obj.acquire() is True
    obj.release()


def test_released_keys_are_forgotten():
    obj = basic.ThreadLock()
    with obj.holding("short-lived") as acquired:
        assert acquired is True
        assert obj.acquire("short-lived") is False
        assert basic.ThreadLock.key_users["short-lived"] == 1
    assert "short-lived" not in basic.ThreadLock.key_locks
    assert "short-lived" not in basic.ThreadLock.key_users


class TestMultiProcessRedisLock:
    @override_settings(HOROLAB={"LOCK": {"LOCATION": "redis://localhost:6379/1"}})
    def test_uses_settings(self, mocker):
        client = mocker.patch("horolab.locks.redis.Redis")
        obj = redis.MultiProcessRedisLock()
        client.from_url.assert_called_once_with("redis://localhost:6379/1")

        server_lock = client.from_url.return_value.lock.return_value
        server_lock.acquire.return_value = True
        assert obj.acquire() is True
        client.from_url.return_value.lock.assert_called_once_with(
            name="HorolabReportLock", timeout=300, blocking_timeout=0.1
        )
        obj.release()
        server_lock.release.assert_called_once_with()

    @override_settings(
        HOROLAB={"LOCK": {"LOCATION": "redis://redis:6379/2", "NAME": "lab", "TTL": 5}}
    )
    def test_keyed_lock_name(self, mocker):
        client = mocker.patch("horolab.locks.redis.Redis")
        obj = redis.MultiProcessRedisLock()
        client.from_url.return_value.lock.return_value.acquire.return_value = True
        with obj.holding("abc123") as acquired:
            assert acquired is True
        client.from_url.return_value.lock.assert_called_once_with(
            name="lab:abc123", timeout=5, blocking_timeout=0.1
        )
        assert obj.held == {}

    def test_timeout_holds_nothing(self, mocker):
        client = mocker.patch("horolab.locks.redis.Redis")
        obj = redis.MultiProcessRedisLock()
        server_lock = client.from_url.return_value.lock.return_value
        server_lock.acquire.return_value = False
        with obj.holding("abc123") as acquired:
            assert acquired is False
        server_lock.release.assert_not_called()

    @pytest.mark.parametrize("location", ["", None])
    def test_location_must_be_set(self, location):
        with override_settings(HOROLAB={"LOCK": {"LOCATION": location}}):
            with pytest.raises(ValueError):
                redis.MultiProcessRedisLock()

from django.test import override_settings

from horolab import encoders
from horolab import storage
from horolab import utils
from horolab.locks import basic


@override_settings(HOROLAB={})
def test_get_encoder_class_default():
    assert utils.get_encoder_class() is encoders.BasicConfigEncoder


@override_settings(HOROLAB={})
def test_get_storage_class_default():
    assert utils.get_storage_class() is storage.MemoryReportStorage


@override_settings(HOROLAB={"STORAGE": {"CLASS": "horolab.storage.CacheReportStorage"}})
def test_get_storage_class_configured():
    assert utils.get_storage_class() is storage.CacheReportStorage


@override_settings(HOROLAB={})
def test_get_storage_cache_name_default():
    assert utils.get_storage_cache_name() == "default"


@override_settings(HOROLAB={})
def test_get_lock_class_default():
    assert utils.get_lock_class() is basic.ThreadLock


@override_settings(HOROLAB={})
def test_get_lock_timeout_default():
    assert utils.get_lock_timeout() == 0.1


@override_settings(HOROLAB={"LOCK": {"TIMEOUT": 1.8}})
def test_get_lock_timeout_configured():
    assert utils.get_lock_timeout() == 1.8


@override_settings(HOROLAB={})
def test_get_lock_enable_default():
    assert utils.get_lock_enable() is True


@override_settings(HOROLAB={"LOCK": {"ENABLE": False}})
def test_get_lock_enable_configured():
    assert utils.get_lock_enable() is False


@override_settings(HOROLAB={})
def test_get_lock_ttl_default():
    assert utils.get_lock_time_to_live() == 300


@override_settings(HOROLAB={"LOCK": {"NAME": "testname"}})
def test_get_lock_name_configured():
    assert utils.get_lock_name() == "testname"


@override_settings(HOROLAB={})
def test_get_lock_location_default():
    assert utils.get_lock_location() == "redis://localhost:6379/1"


class TestThreads:
    @override_settings(HOROLAB={})
    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("HOROLAB_THREADS", raising=False)
        assert utils.get_threads() == 1

    @override_settings(HOROLAB={})
    def test_environment_fallback(self, monkeypatch):
        monkeypatch.setenv("HOROLAB_THREADS", "6")
        assert utils.get_threads() == 6

    @override_settings(HOROLAB={"THREADS": 3})
    def test_setting_beats_environment(self, monkeypatch):
        monkeypatch.setenv("HOROLAB_THREADS", "6")
        assert utils.get_threads() == 3

    @override_settings(HOROLAB={"THREADS": 3})
    def test_override_beats_setting(self):
        with utils.override_threads(8):
            assert utils.get_threads() == 8
        assert utils.get_threads() == 3

    @override_settings(HOROLAB={"THREADS": 0})
    def test_at_least_one(self):
        assert utils.get_threads() == 1


@override_settings(HOROLAB={"QUADRATURE": {"ORDER": 32}})
def test_get_quadrature_settings_merges_defaults():
    assert utils.get_quadrature_settings() == {
        "ORDER": 32,
        "PANELS": None,
        "MC_SAMPLES": 1000000,
        "MAX_TENSOR_DIM": 3,
    }


@override_settings(HOROLAB={})
def test_get_quadrature_panels_default():
    assert [utils.get_quadrature_panels(dim) for dim in (1, 2, 3)] == [16, 2, 1]


@override_settings(HOROLAB={"QUADRATURE": {"PANELS": 4}})
def test_get_quadrature_panels():
    assert utils.get_quadrature_panels(1) == 4

@override_settings(HOROLAB={})
def test_budgets_default():
    assert utils.get_enumeration_budget() == 2000000
    assert utils.get_drift_budget() == 64


@override_settings(HOROLAB={"OUTPUT_DIR": "out"})
def test_get_storage_directory_default():
    assert utils.get_storage_directory() == "out/.reports"


@override_settings(HOROLAB={"STORAGE": {"DIRECTORY": "/var/horolab"}})
def test_get_storage_directory_configured():
    assert utils.get_storage_directory() == "/var/horolab"

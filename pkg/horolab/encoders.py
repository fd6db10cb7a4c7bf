import abc
import hashlib
import json

from horolab import __version__
from horolab.exceptions import ConfigError


class ConfigEncoder(object):
    @abc.abstractmethod
    def encode_config(self, config):
        raise NotImplementedError


class BasicConfigEncoder(ConfigEncoder):
    def encode_config(self, config):
        if config is None:
            raise ConfigError("config", "An experiment config is required.")
        # Canonical JSON of the validated config, salted with the toolkit version
        m = hashlib.sha256()
        m.update(__version__.encode("UTF-8"))
        m.update(
            json.dumps(config, sort_keys=True, separators=(",", ":")).encode("UTF-8")
        )
        return m.hexdigest()

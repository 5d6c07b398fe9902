import argparse
import configparser
import json
import logging
import os

from elulab.nn import errors as e

log = logging.getLogger("elulab")
log.trace("settings.py")

MNIST_DIR_ENV = "ELULAB_MNIST_DIR"

def default_config_path():
    return os.path.join(os.path.abspath(os.path.dirname(os.path.dirname(__file__))), "elulab.cfg")

def read_config(path=None):
    config = configparser.ConfigParser()
    path = path or default_config_path()
    if not config.read(path):
        log.warning(f"configuration file {path} not found, using built-in defaults")
    return config

def _to_option(value):
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return "" if value is None else str(value)

class settings:
    """Effective configuration of one command run

    Layers, lowest first: the packaged elulab.cfg, an optional JSON file
    ({"Section": {"option": value}}), then the command-line flags passed to
    get() explicitly.
    """

    def __init__(self, config):
        self.config = configparser.ConfigParser()
        self.config.read_dict(config)
        self.sources = {}

    def overlay_json(self, path):
        try:
            with open(path, encoding="utf-8") as f:
                overlay = json.load(f)
        except json.JSONDecodeError as err:
            raise e.ConfigError(f"{path}: invalid JSON ({err})")
        if not isinstance(overlay, dict) or not all(isinstance(v, dict) for v in overlay.values()):
            raise e.ConfigError(f"{path}: expected an object of sections, each an object of options")
        for section, options in overlay.items():
            if not self.config.has_section(section):
                self.config.add_section(section)
            for option, value in options.items():
                self.config.set(section, option, _to_option(value))
                self.sources[(section, option.lower())] = path
        log.debug(f"settings: applied {path}")

    def raw(self, section, option, default=None):
        try:
            return self.config.get(section, option)
        except (configparser.NoSectionError, configparser.NoOptionError):
            if default is None:
                raise e.ConfigError(f"missing option '{option}' in section [{section}]")
            return default

    def get(self, section, option, flag=None, convert=str, default=None):
        """The flag value if given, else the configured one passed through convert"""
        if flag is not None:
            return flag
        value = self.raw(section, option, default=default)
        if not isinstance(value, str):
            return value
        try:
            return convert(value)
        except (ValueError, TypeError, argparse.ArgumentTypeError) as err:
            raise e.ConfigError(f"[{section}] {option} = {value!r}: {err}")

    def source(self, section, option):
        return self.sources.get((section, option.lower()), "elulab.cfg")

    def mnist_dir(self, flag=None):
        """--mnist-dir, then $ELULAB_MNIST_DIR, then [Data] mnist_dir"""
        if flag:
            return flag
        env = os.environ.get(MNIST_DIR_ENV)
        if env:
            return env
        configured = self.raw("Data", "mnist_dir", default="")
        if not configured:
            raise e.ConfigError(f"no MNIST directory: use --mnist-dir or set {MNIST_DIR_ENV}")
        return os.path.expanduser(configured)

    def items(self):
        for section in self.config.sections():
            for option, value in self.config.items(section):
                yield section, option, value

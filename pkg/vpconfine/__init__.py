"""Confined stationary Vlasov-Poisson equilibria in symmetric geometries."""

import os

from config import config
from vpconfine.extensions import init_logging

__version__ = "1.0.0"


class Settings(dict):
    """Uppercase configuration values loaded from a config class."""

    def from_object(self, obj):
        for key in dir(obj):
            if key.isupper():
                self[key] = getattr(obj, key)


class App:
    """Loaded settings plus the package logger, shared by CLI commands."""

    def __init__(self, name, config_name):
        self.name = name
        self.config_name = config_name
        self.config = Settings()
        self.logger = None


def create_app(config_name=None):
    # app factory
    config_name = config_name or os.getenv('VPCONFINE_ENV', 'default')
    if config_name not in config:
        raise KeyError(f"unknown config '{config_name}'")
    app = App(__name__, config_name)

    # config load
    app.config.from_object(config[config_name])

    # extensions
    app.logger = init_logging(app)
    return app

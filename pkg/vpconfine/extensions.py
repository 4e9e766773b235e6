"""Process-wide helpers initialised by the app factory."""

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

LOGGER_NAME = "vpconfine"


def init_logging(app):
    """Attach a single stream handler to the package logger."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(app.config.get("LOG_LEVEL", "INFO"))
    if not any(getattr(h, "_vpconfine", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler._vpconfine = True
        logger.addHandler(handler)
    for handler in logger.handlers:
        if getattr(handler, "_vpconfine", False):
            handler.setFormatter(logging.Formatter(app.config.get("LOG_FORMAT")))
    return logger


@contextmanager
def worker_pool(workers):
    """Yield a thread pool, or None when work should stay on this thread."""
    if not workers or workers <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield pool

import logging
import sys

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> logging.Logger:
    """
    Attach one stderr handler to the ``app`` logger.

    Standard output stays reserved for records. Calling again updates the level
    and points the handler at the current ``sys.stderr``.
    """
    resolved = getattr(logging, str(level).upper(), logging.INFO)
    logger = logging.getLogger(__name__)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)
    for handler in logger.handlers:
        if isinstance(handler, logging.StreamHandler):
            handler.setStream(sys.stderr)
        handler.setLevel(resolved)
    logger.setLevel(resolved)
    return logger

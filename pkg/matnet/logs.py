import logging
from typing import Optional

from matnet import settings

_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure(level: Optional[str] = None) -> None:
    """Configure root logging once; later calls only adjust the level."""
    level = (level or settings.LOG_LEVEL).upper()
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(level=level, format=_FORMAT)
    root.setLevel(level)

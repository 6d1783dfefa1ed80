"""Diachronic analytics over sparse autoencoder activation stores."""

from ._core import *  # noqa: F401,F403
from ._core import Error, __version__

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

"""Colombeau generalized functions numerical lab."""

from ._gfn import *  # noqa: F401,F403
from ._gfn import __doc__  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]

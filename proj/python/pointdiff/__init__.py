"""Planar point-interaction diffusions.

Thin re-export of the compiled extension. Points are accepted as
``(x, y)`` tuples or :class:`PlanarPoint` objects.
"""

from ._pointdiff import *  # noqa: F401,F403
from ._pointdiff import __doc__  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]

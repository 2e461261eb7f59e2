"""Fiber backends: copresheaves of finite sets and vector spaces over F_p."""

from .base import Category, LimitCone, ShapedDiagram
from .finset import *  # noqa: F401,F403
from .finset import __all__ as _finset_all
from .vect import *  # noqa: F401,F403
from .vect import __all__ as _vect_all


def limit(d: ShapedDiagram) -> LimitCone:
    return d.cat.limit(d)


def iso_check(cat: Category, a, b):
    """A witness isomorphism a -> b, or None."""
    return cat.find_iso(a, b)


__all__ = ["Category", "LimitCone", "ShapedDiagram", "limit", "iso_check", *_finset_all, *_vect_all]

"""Poincare-ball primitives, generic over the scalar representation.

Points are arrays whose last axis holds the coordinates. In *plain* precision
they are numpy arrays of float32/float64; in *FPE* precision they are
:class:`~hyptree.fpe.Expansion` arrays whose batch shape ends in the dimension.
The functions below only use ``+ - * /``, ``sum`` over the last axis and a
square root, so the same code serves both.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import fpe
from .errors import PrecisionError
from .fpe import Expansion

__all__ = [
    "Precision",
    "GeodesicReflection",
    "norm_sq",
    "dot",
    "norm",
    "mobius_add",
    "distance_invariant",
    "dist_acosh",
    "dist_atanh",
    "distance",
    "householder",
    "inversion_to_origin",
    "reflect",
    "align_rotation",
    "in_ball",
]


@dataclass(frozen=True)
class Precision:
    """Scalar representation used for points: plain binary32/64 or t-term binary64 FPEs."""

    kind: str = "plain"
    dtype: str = "float64"
    terms: int = 1

    @classmethod
    def parse(cls, spec: str) -> "Precision":
        spec = spec.strip().lower()
        if spec in ("f32", "float32", "binary32"):
            return cls("plain", "float32", 1)
        if spec in ("f64", "float64", "binary64"):
            return cls("plain", "float64", 1)
        m = re.fullmatch(r"fpe:(\d+)", spec)
        if m and int(m.group(1)) >= 1:
            return cls("fpe", "float64", int(m.group(1)))
        raise ValueError(f"unknown precision {spec!r}; expected f32, f64 or fpe:<t>")

    @property
    def is_fpe(self) -> bool:
        return self.kind == "fpe"

    @property
    def significand_bits(self) -> int:
        return 24 if self.dtype == "float32" else 53

    @property
    def bits(self) -> int:
        """Worst-case bits carried by one scalar."""
        if self.is_fpe:
            return fpe.bits_of_precision(self.terms)
        return self.significand_bits

    def label(self) -> str:
        if self.is_fpe:
            return f"fpe:{self.terms}"
        return "f32" if self.dtype == "float32" else "f64"

    def lift(self, values):
        """Exactly represent float64 data in this precision (rounding only for f32)."""
        values = np.asarray(values, dtype=np.float64)
        if self.is_fpe:
            return Expansion.from_float(values, self.terms)
        return values.astype(self.dtype)

    def zeros(self, shape):
        if self.is_fpe:
            return Expansion.zeros(shape, self.terms)
        return np.zeros(shape, dtype=self.dtype)

    def __str__(self) -> str:
        return self.label()


def _is_fpe(a) -> bool:
    return isinstance(a, Expansion)


def _sqrt(a):
    if _is_fpe(a):
        return fpe.sqrt(a)
    return np.sqrt(a)


def _lead(a) -> np.ndarray:
    if _is_fpe(a):
        return a.lead()
    return np.asarray(a)


def _expand(a):
    """Add a trailing unit axis so a per-point scalar broadcasts over coordinates."""
    return a[..., None]


def dot(x, y):
    return (x * y).sum(axis=-1)


def norm_sq(x):
    return dot(x, x)


def norm(x):
    return _sqrt(norm_sq(x))


def in_ball(x) -> np.ndarray:
    """True where the point lies strictly inside the unit ball."""
    gap = 1.0 - norm_sq(x)
    return _lead(gap) > 0


def mobius_add(x, y):
    """Mobius addition ``x (+) y`` on the Poincare ball."""
    xy = dot(x, y)
    xx = norm_sq(x)
    yy = norm_sq(y)
    a = 1.0 + 2.0 * xy + yy
    b = 1.0 - xx
    den = 1.0 + 2.0 * xy + xx * yy
    if np.any(_lead(den) == 0):
        raise PrecisionError("Mobius addition denominator rounded to zero; use an FPE precision")
    return (_expand(a) * x + _expand(b) * y) / _expand(den)


def distance_invariant(x, y):
    """``|x - y|^2 / ((1 - |x|^2)(1 - |y|^2))``, so that ``cosh d = 1 + 2 * value``.

    Returned in the working precision; useful where the distance itself would be
    rounded to a base float.
    """
    diff = x - y
    num = norm_sq(diff)
    den = (1.0 - norm_sq(x)) * (1.0 - norm_sq(y))
    if np.any(_lead(den) <= 0):
        raise PrecisionError("point on or outside the ball boundary after rounding; "
                             "use an FPE precision with more terms")
    return num / den


def dist_acosh(x, y):
    """Hyperbolic distance through the inverse hyperbolic cosine.

    In FPE precision the argument is evaluated in expansion arithmetic and the
    inverse cosine is applied to its leading term.
    """
    z = 1.0 + 2.0 * distance_invariant(x, y)
    if _is_fpe(z):
        return fpe.acosh_leading(z)
    return np.arccosh(np.maximum(z, 1.0))


def dist_atanh(x, y):
    """Hyperbolic distance ``2 atanh |-x (+) y|``."""
    m = mobius_add(-x, y)
    r = norm(m)
    if _is_fpe(r):
        return 2.0 * fpe.atanh(r).lead()
    with np.errstate(divide="ignore"):
        return 2.0 * np.arctanh(np.minimum(r, 1.0))


def distance(x, y, formulation: str = "acosh"):
    if formulation == "acosh":
        return dist_acosh(x, y)
    if formulation == "atanh":
        return dist_atanh(x, y)
    raise ValueError(f"unknown formulation {formulation!r}")


@dataclass(frozen=True)
class GeodesicReflection:
    """Reflection in a geodesic hyperplane.

    ``kind`` is ``"householder"`` (hyperplane through the origin with unit
    normal ``v``), ``"inversion"`` (sphere with center ``center`` and squared
    radius ``radius_sq``) or ``"identity"``.
    """

    kind: str
    v: object = None
    center: object = None
    radius_sq: object = None

    def __call__(self, y):
        return reflect(self, y)


def householder(v) -> GeodesicReflection:
    return GeodesicReflection("householder", v=v)


def inversion_to_origin(w) -> GeodesicReflection:
    """The sphere inversion that swaps ``w`` and the origin.

    Center ``w / |w|^2`` and squared radius ``1 / |w|^2 - 1``.
    """
    ww = norm_sq(w)
    center = w / _expand(ww)
    radius_sq = 1.0 / ww - 1.0
    return GeodesicReflection("inversion", center=center, radius_sq=radius_sq)


def reflect(r: GeodesicReflection, y):
    """Apply a geodesic reflection to one or more points."""
    if r.kind == "identity":
        return y
    if r.kind == "householder":
        return y - 2.0 * _expand(dot(y, r.v)) * r.v
    if r.kind == "inversion":
        d = y - r.center
        scale = r.radius_sq / norm_sq(d)
        return r.center + _expand(scale) * d
    raise ValueError(f"unknown reflection kind {r.kind!r}")


def align_rotation(target, source) -> GeodesicReflection:
    """Householder reflection taking unit vector ``source`` onto unit vector ``target``.

    Works on plain float64 vectors. Equal inputs give the identity; the
    antipodal case needs no special handling since ``target - source`` is then
    as large as it gets.
    """
    target = np.asarray(target, dtype=np.float64)
    source = np.asarray(source, dtype=np.float64)
    diff = target - source
    nd = np.linalg.norm(diff)
    if nd == 0.0:
        return GeodesicReflection("identity")
    return householder(diff / nd)

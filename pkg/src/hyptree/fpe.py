"""Floating-point expansion (FPE) arithmetic on numpy arrays.

An expansion represents a real number as the unevaluated sum of ``t`` binary64
terms ordered by non-increasing magnitude. Arrays of expansions are stored with
the terms on the *last* axis, so every routine here is vectorized over the
leading (batch) axes and uses nothing but round-to-nearest base-float
operations: the same code path runs unchanged on any array backend that offers
elementwise IEEE arithmetic.

The ring operations follow the renormalization / binned-accumulation scheme for
ulp-nonoverlapping expansions (merge, VecSum, VecSumErrBranch, bin-based
multiplication, Newton reciprocal). Elementary functions are built on top.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from numbers import Real

import numpy as np

__all__ = [
    "Expansion",
    "SubnormalProductWarning",
    "DomainClampWarning",
    "two_sum",
    "fast_two_sum",
    "two_prod",
    "vec_sum",
    "vec_sum_err_branch",
    "renormalize",
    "merge",
    "add",
    "sub",
    "multiply",
    "reciprocal",
    "divide",
    "sqrt",
    "exp",
    "atanh",
    "acosh_leading",
    "negate",
    "absolute",
    "compare",
    "from_base",
    "to_base",
    "scale_by_power_of_two",
    "is_nonoverlapping",
    "to_hex",
    "from_hex",
    "bits_of_precision",
]

PRECISION = 53  # binary64 significand bits
BIN_SIZE = 45  # bin width used by the multiplication accumulator
EPS = 2.0**-PRECISION

_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant for binary64
_SPLIT_LIMIT = 2.0**995
_SUBNORMAL_EDGE = 2.0 ** (-1022 + PRECISION)
_ZERO_EXPONENT = -(1 << 20)

# ln 2 to ~950 bits; leading terms of an ulp-nonoverlapping expansion.
_LN2_HEX = (
    "0x1.62e42fefa39efp-1", "0x1.abc9e3b39803fp-56", "0x1.7b57a079a1934p-111",
    "-0x1.ace93a4ebe5d1p-165", "-0x1.23a2a82ea0c24p-219", "0x1.d881b7aeb2615p-274",
    "0x1.9552fb4afa1b1p-328", "0x1.da5d5c6b82704p-385", "0x1.4427573b29117p-440",
    "-0x1.91f6b05a4d7a7p-494", "-0x1.db5173ae53426p-548", "0x1.1317c387eb9ebp-604",
    "-0x1.90f13b267f137p-658", "0x1.6fa0ec7657f75p-712", "-0x1.234c5e1398a6bp-766",
    "0x1.195ebbf4d7a70p-821", "0x1.8192432afd0c4p-875",
)
_LN2 = np.array([float.fromhex(h) for h in _LN2_HEX])


class SubnormalProductWarning(RuntimeWarning):
    """A product fell in the subnormal range, where 2Prod is no longer error-free."""


class DomainClampWarning(RuntimeWarning):
    """An argument was rounded just outside a function's domain and clamped."""


# ---------------------------------------------------------------------------
# error-free transforms


def two_sum(a, b):
    """Return ``(s, e)`` with ``s = RN(a + b)`` and ``s + e == a + b`` exactly."""
    s = a + b
    a1 = s - b
    b1 = s - a1
    da = a - a1
    db = b - b1
    return s, da + db


def fast_two_sum(a, b):
    """Three-operation exact sum; requires ``exponent(a) >= exponent(b)`` or ``b == 0``."""
    s = a + b
    z = s - a
    return s, b - z


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p = a * b
    # Veltkamp splitting overflows for huge operands; split a scaled copy instead.
    big_a = np.abs(a) > _SPLIT_LIMIT
    big_b = np.abs(b) > _SPLIT_LIMIT
    sa = np.where(big_a, a * 2.0**-28, a)
    sb = np.where(big_b, b * 2.0**-28, b)
    ah, al = _split(sa)
    bh, bl = _split(sb)
    scale = np.where(big_a, 2.0**28, 1.0) * np.where(big_b, 2.0**28, 1.0)
    ps = sa * sb
    e = ((ah * bh - ps) + ah * bl + al * bh) + al * bl
    return p, e * scale


def two_prod(a, b):
    """Return ``(p, e)`` with ``p = RN(a * b)`` and ``p + e == a * b`` exactly.

    Uses Dekker's splitting, which is exact for binary64 operands whenever the
    product is neither overflowing nor below the subnormal threshold. Products
    in the latter range are flagged with :class:`SubnormalProductWarning`.
    """
    p, e = _two_prod(a, b)
    tiny = (p != 0) & (np.abs(p) < _SUBNORMAL_EDGE)
    if np.any(tiny):
        warnings.warn("two_prod: product in subnormal range, error term is inexact",
                      SubnormalProductWarning, stacklevel=2)
    if np.ndim(p) == 0:
        return float(p), float(e)
    return p, e


# ---------------------------------------------------------------------------
# summation and renormalization


def vec_sum(x: np.ndarray) -> np.ndarray:
    """Distill the terms of ``x`` (last axis) with a right-to-left 2Sum chain.

    The first output term holds the rounded sum, the remaining ones the errors.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    out = np.empty_like(x)
    s = x[..., n - 1]
    for i in range(n - 2, -1, -1):
        s, out[..., i + 1] = two_sum(x[..., i], s)
    out[..., 0] = s
    return out


def vec_sum_err_branch(e: np.ndarray, m: int) -> np.ndarray:
    """Compress the output of :func:`vec_sum` into at most ``m`` nonzero terms."""
    e = np.asarray(e, dtype=np.float64)
    n = e.shape[-1]
    batch = e.shape[:-1]
    r = np.zeros(batch + (m + 1,))
    j = np.zeros(batch, dtype=np.intp)
    active = np.ones(batch, dtype=bool)
    eps = e[..., 0].copy()
    for i in range(n - 1):
        s, err = two_sum(eps, e[..., i + 1])
        jj = j[..., None]
        cur = np.take_along_axis(r, jj, -1)[..., 0]
        np.put_along_axis(r, jj, np.where(active, s, cur)[..., None], -1)
        nz = err != 0
        finished = active & nz & (j >= m - 1)
        advance = active & nz & ~finished
        eps = np.where(advance, err, np.where(active & ~nz, s, eps))
        j = np.where(advance, j + 1, j)
        active &= ~finished
    tail = active & (eps != 0) & (j <= m - 1)
    jj = j[..., None]
    cur = np.take_along_axis(r, jj, -1)[..., 0]
    np.put_along_axis(r, jj, np.where(tail, eps, cur)[..., None], -1)
    return r[..., :m]


def _renormalize_sorted(x: np.ndarray, r: int) -> np.ndarray:
    if x.shape[-1] == 1:
        out = np.zeros(x.shape[:-1] + (r,))
        out[..., 0] = x[..., 0]
        return out
    return vec_sum_err_branch(vec_sum(x), r)


def renormalize(x, r: int) -> np.ndarray:
    """Turn an arbitrary list of terms (last axis) into an ``r``-term ulp-nonoverlapping expansion.

    Terms are sorted by decreasing magnitude first so the 2Sum chain starts at
    the smallest one; a second VecSum pass handles inputs whose partial sums
    overlap heavily.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 1:
        return _renormalize_sorted(x, r)
    x = np.take_along_axis(x, np.argsort(-np.abs(x), axis=-1, kind="stable"), -1)
    return vec_sum_err_branch(vec_sum(vec_sum(x)), r)


def merge(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Concatenate the terms of two expansions, sorted by decreasing magnitude."""
    z = np.concatenate(_broadcast_terms(x, y), axis=-1)
    order = np.argsort(-np.abs(z), axis=-1, kind="stable")
    return np.take_along_axis(z, order, -1)


def _broadcast_terms(x, y):
    bshape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    return (np.broadcast_to(x, bshape + x.shape[-1:]),
            np.broadcast_to(y, bshape + y.shape[-1:]))


def _add_terms(x: np.ndarray, y: np.ndarray, r: int) -> np.ndarray:
    return _renormalize_sorted(merge(x, y), r)


# ---------------------------------------------------------------------------
# multiplication


def _exponent(x: np.ndarray) -> np.ndarray:
    """floor(log2|x|) elementwise, with a very negative sentinel for zeros."""
    _, e = np.frexp(x)
    return np.where(x == 0, _ZERO_EXPONENT, e.astype(np.int64) - 1)


def _accumulate(B, pi, e, sh, ell):
    c = PRECISION - BIN_SIZE - 1
    idx = sh[..., None] + np.arange(4)
    b0, b1, b2, b3 = np.moveaxis(np.take_along_axis(B, idx, -1), -1, 0)

    nb0, rest = fast_two_sum(b0, pi)
    # branches 1 and 2 share their head
    h1 = b1 + rest
    h1, he = fast_two_sum(h1, e)
    br1_b2 = b2 + he
    br2_b2, br2_e = fast_two_sum(b2, he)
    br2_b3 = b3 + br2_e
    # branch 3: the product straddles two bins
    t1, q = fast_two_sum(b1, rest)
    t2 = b2 + q
    t2, te = fast_two_sum(t2, e)
    t3 = b3 + te

    first = ell < BIN_SIZE - 2 * c - 1
    second = ~first & (ell < BIN_SIZE - c)
    third = ~(first | second)
    new = np.stack([
        nb0,
        np.where(third, t1, h1),
        np.where(first, br1_b2, np.where(second, br2_b2, t2)),
        np.where(first, b3, np.where(second, br2_b3, t3)),
    ], axis=-1)
    np.put_along_axis(B, idx, new, -1)


def _multiply_terms(x: np.ndarray, y: np.ndarray, r: int) -> np.ndarray:
    x, y = _broadcast_terms(x, y)
    n, m = x.shape[-1], y.shape[-1]
    batch = x.shape[:-1]
    zero = (x[..., 0] == 0) | (y[..., 0] == 0)
    ex = _exponent(x)
    ey = _exponent(y)
    top = np.where(zero, 0, ex[..., 0] + ey[..., 0])

    nbins = (r * PRECISION) // BIN_SIZE + 2
    # three spare bins so Accumulate never indexes past the end
    k = np.arange(nbins + 3)
    anchors = np.ldexp(1.5, (top[..., None] - (k + 1) * BIN_SIZE + PRECISION - 1))
    B = np.array(anchors, dtype=np.float64, copy=True)
    B = np.broadcast_to(B, batch + (nbins + 3,)).copy()

    def feed(pi, err, ell_raw):
        sh = ell_raw // BIN_SIZE
        below = (sh > nbins - 1) | zero
        ell = ell_raw - sh * BIN_SIZE
        pi = np.where(below, 0.0, pi)
        err = np.where(below, 0.0, err)
        sh = np.where(below, 0, sh)
        ell = np.where(below, 0, ell)
        _accumulate(B, pi, err, sh, ell)

    for i in range(min(n, r + 1)):
        for j in range(min(m, r - i)):
            pi, err = _two_prod(x[..., i], y[..., j])
            feed(pi, err, top - ex[..., i] - ey[..., j])
        jj = r - i
        if jj < m:
            pi = x[..., i] * y[..., jj]
            feed(pi, np.zeros_like(pi), top - ex[..., i] - ey[..., jj])
    B = B - anchors
    # bins are not VecSum output; one distillation pass makes the result ulp-nonoverlapping
    out = vec_sum_err_branch(vec_sum(B), r)
    return np.where(zero[..., None], 0.0, out)


# ---------------------------------------------------------------------------
# Expansion wrapper


class Expansion:
    """An array of floating-point expansions.

    ``terms`` has shape ``batch_shape + (t,)``. Arithmetic operators produce
    results with ``max`` of the operands' term counts; the module-level
    functions take an explicit output term count.
    """

    __slots__ = ("terms",)
    __array_ufunc__ = None

    def __init__(self, terms):
        terms = np.asarray(terms, dtype=np.float64)
        if terms.ndim == 0:
            terms = terms[None]
        self.terms = terms

    # -- construction
    @classmethod
    def from_float(cls, value, t: int = 1) -> "Expansion":
        value = np.asarray(value, dtype=np.float64)
        terms = np.zeros(value.shape + (t,))
        terms[..., 0] = value
        return cls(terms)

    @classmethod
    def zeros(cls, shape, t: int) -> "Expansion":
        return cls(np.zeros(_shape_tuple(shape) + (t,)))

    # -- shape
    @property
    def t(self) -> int:
        return self.terms.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.terms.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.terms.ndim - 1

    def __len__(self):
        return self.terms.shape[0]

    def __getitem__(self, idx) -> "Expansion":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if not any(i is Ellipsis for i in idx):
            idx = idx + (Ellipsis,)
        return Expansion(self.terms[idx + (slice(None),)])

    def reshape(self, *shape) -> "Expansion":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Expansion(self.terms.reshape(shape + (self.t,)))

    def with_terms(self, t: int) -> "Expansion":
        """Pad with zeros or truncate to ``t`` terms."""
        if t == self.t:
            return self
        if t < self.t:
            return Expansion(self.terms[..., :t])
        pad = np.zeros(self.shape + (t - self.t,))
        return Expansion(np.concatenate([self.terms, pad], axis=-1))

    def lead(self) -> np.ndarray:
        return self.terms[..., 0]

    def to_float(self) -> np.ndarray:
        return to_base(self)

    def sum(self, axis: int = -1) -> "Expansion":
        """Sum along a batch axis in index order (fixed order, reproducible)."""
        moved = np.moveaxis(self.terms, axis if axis >= 0 else axis - 1, 0)
        acc = moved[0]
        for k in range(1, moved.shape[0]):
            acc = _add_terms(acc, moved[k], self.t)
        return Expansion(acc)

    # -- operators
    def _coerce(self, other):
        if isinstance(other, Expansion):
            return other
        if isinstance(other, (Real, np.ndarray, np.generic)):
            return Expansion.from_float(other)
        return NotImplemented

    def __neg__(self):
        return Expansion(-self.terms)

    def __abs__(self):
        return absolute(self)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other, max(self.t, other.t))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, -other, max(self.t, other.t))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(other, -self, max(self.t, other.t))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return multiply(self, other, max(self.t, other.t))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return divide(self, other, max(self.t, other.t))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return divide(other, self, max(self.t, other.t))

    def __repr__(self):
        if self.terms.ndim == 1:
            return f"Expansion({[float(v) for v in self.terms]!r})"
        return f"Expansion(shape={self.shape}, t={self.t})"


def _shape_tuple(shape) -> tuple:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(shape)


def _as_exp(x) -> Expansion:
    return x if isinstance(x, Expansion) else Expansion.from_float(x)


# ---------------------------------------------------------------------------
# ring operations


def add(x, y, r: int | None = None) -> Expansion:
    """Sum of two expansions rounded to ``r`` terms (merge then renormalize)."""
    x, y = _as_exp(x), _as_exp(y)
    r = r or max(x.t, y.t)
    return Expansion(_add_terms(x.terms, y.terms, r))


def sub(x, y, r: int | None = None) -> Expansion:
    x, y = _as_exp(x), _as_exp(y)
    return add(x, negate(y), r)


def multiply(x, y, r: int | None = None) -> Expansion:
    """Product of two expansions with ``r`` output terms (binned accumulation)."""
    x, y = _as_exp(x), _as_exp(y)
    r = r or max(x.t, y.t)
    return Expansion(_multiply_terms(x.terms, y.terms, r))


def reciprocal(x, terms: int) -> Expansion:
    """Newton-Raphson reciprocal, doubling the number of correct terms per step.

    ``terms`` is rounded up to a power of two internally and the result is
    truncated back to the requested count.
    """
    x = _as_exp(x)
    if np.any(x.lead() == 0):
        raise ZeroDivisionError("reciprocal of a zero expansion")
    q = max(0, math.ceil(math.log2(terms))) if terms > 1 else 0
    r = (1.0 / x.lead())[..., None]
    two = np.full(x.shape + (1,), 2.0)
    for i in range(q):
        k = 2 ** (i + 1)
        v = _multiply_terms(r, x.terms, k)
        w = _renormalize_sorted(np.concatenate([two, -v], axis=-1), k)
        r = _multiply_terms(r, w, k)
    out = Expansion(r).with_terms(max(terms, 1))
    return out.with_terms(terms)


def divide(x, y, r: int | None = None) -> Expansion:
    """``x / y`` as ``x * reciprocal(y)``; the reciprocal is taken to ``r`` terms."""
    x, y = _as_exp(x), _as_exp(y)
    r = r or max(x.t, y.t)
    z = reciprocal(y, max(r, y.t))
    return multiply(x, z, r)


# ---------------------------------------------------------------------------
# plumbing


def negate(x) -> Expansion:
    return Expansion(-_as_exp(x).terms)


def absolute(x) -> Expansion:
    x = _as_exp(x)
    sign = np.where(x.lead() < 0, -1.0, 1.0)
    return Expansion(x.terms * sign[..., None])


def compare(x, y) -> np.ndarray:
    """Sign of ``x - y`` (-1, 0 or 1), elementwise."""
    d = sub(x, y, max(_as_exp(x).t, _as_exp(y).t) + 1)
    return np.sign(d.lead()).astype(int)


def from_base(value, t: int) -> Expansion:
    return Expansion.from_float(value, t)


def to_base(x) -> np.ndarray:
    x = _as_exp(x)
    if x.t == 1:
        return x.terms[..., 0].copy()
    return x.terms[..., 0] + x.terms[..., 1]


def scale_by_power_of_two(x, k) -> Expansion:
    """Exact multiplication by ``2**k`` (barring over/underflow)."""
    x = _as_exp(x)
    k = np.asarray(k)
    return Expansion(np.ldexp(x.terms, k[..., None] if k.ndim else k))


def ulp(a) -> np.ndarray:
    """Unit in the last place of binary64 values; 0 for zero."""
    a = np.abs(np.asarray(a, dtype=np.float64))
    return np.where(a == 0, 0.0, np.spacing(a))


def is_nonoverlapping(x) -> np.ndarray:
    """Elementwise check of the ulp-nonoverlap property ``|x_i| <= ulp(x_{i-1})``."""
    terms = _as_exp(x).terms
    if terms.shape[-1] == 1:
        return np.ones(terms.shape[:-1], dtype=bool)
    ok = np.abs(terms[..., 1:]) <= ulp(terms[..., :-1])
    return np.all(ok, axis=-1)


def bits_of_precision(t: int, p: int = PRECISION) -> int:
    """Worst-case precision carried by ``t`` ulp-nonoverlapping terms."""
    return t * (p - 1) + 1


def to_hex(x) -> list[str]:
    """Bit-exact serialization of a single expansion."""
    x = _as_exp(x)
    if x.ndim:
        raise ValueError("to_hex expects a single expansion")
    return [float(v).hex() for v in x.terms]


def from_hex(items) -> Expansion:
    return Expansion(np.array([float.fromhex(s) for s in items]))


# ---------------------------------------------------------------------------
# elementary functions


def sqrt(x, r: int | None = None) -> Expansion:
    """Square root via Newton iteration on the inverse square root."""
    x = _as_exp(x)
    r = r or x.t
    lead = x.lead()
    if np.any(lead < 0):
        raise ValueError("sqrt of a negative expansion")
    zero = lead == 0
    xs = Expansion(np.where(zero[..., None], 1.0, x.terms))
    work = r + 1
    y = Expansion.from_float(1.0 / np.sqrt(xs.lead()))
    k = 1
    while True:
        k = min(2 * k, work)
        yk = y.with_terms(k)
        # y <- y + y * (1 - x y^2) / 2
        resid = sub(1.0, multiply(xs, multiply(yk, yk, k), k), k)
        y = add(yk, scale_by_power_of_two(multiply(yk, resid, k), -1), k)
        if k == work:
            break
    s = multiply(xs, y, work)
    # one Newton step on s itself recovers the last bits
    corr = multiply(y, sub(xs, multiply(s, s, work), work), work)
    s = add(s, scale_by_power_of_two(corr, -1), r)
    return Expansion(np.where(zero[..., None], 0.0, s.terms))


@lru_cache(maxsize=None)
def _inverse_integers(count: int, t: int) -> tuple:
    return tuple(reciprocal(Expansion.from_float(float(j)), t).terms for j in range(1, count + 1))


_EXP_HALVINGS = 10


def exp(x, r: int | None = None) -> Expansion:
    """Exponential: reduce by multiples of ln 2, halve, Taylor-expand expm1, square back."""
    x = _as_exp(x)
    r = r or x.t
    work = r + 1
    if work > len(_LN2):
        raise ValueError(f"exp supports at most {len(_LN2) - 1} terms")
    lead = x.lead()
    if np.any(lead > 709.0):
        raise OverflowError("exp argument overflows binary64")
    k = np.rint(lead / math.log(2.0))
    k = np.maximum(k, -1074.0)
    ln2 = Expansion(_LN2[:work])
    s = sub(x.with_terms(work), multiply(Expansion.from_float(k), ln2, work), work)
    s = scale_by_power_of_two(s, -_EXP_HALVINGS)

    mag = float(np.max(np.abs(s.lead()), initial=0.0))
    target = work * PRECISION
    if mag == 0.0:
        degree = 1
    else:
        degree = 1
        log_mag = -math.log2(mag)
        while degree * log_mag + math.lgamma(degree + 2) / math.log(2) < target:
            degree += 1
        degree += 1
    inv = _inverse_integers(degree, work)
    # Horner: p = s (1 + s/2 (1 + s/3 (... (1 + s/degree))))
    acc = Expansion.from_float(np.ones(x.shape), work)
    for j in range(degree, 1, -1):
        acc = add(1.0, multiply(multiply(s, Expansion(inv[j - 1]), work), acc, work), work)
    p = multiply(s, acc, work)
    for _ in range(_EXP_HALVINGS):
        p = multiply(p, add(p, 2.0, work), work)
    y = add(p, 1.0, work)
    y = scale_by_power_of_two(y, k.astype(np.int64))
    return Expansion(renormalize(y.terms, r))


def atanh(x) -> Expansion:
    """Inverse hyperbolic tangent with the logarithm taken on the leading term.

    ``|x| < 0.5`` uses ``log1p(2|x| + 2|x|^2 / (1 - |x|))``, larger arguments use
    ``log(1 + 2|x| / (1 - |x|))``. Returns NaN outside [-1, 1] and a signed
    infinity at the endpoints.
    """
    x = _as_exp(x)
    t = x.t
    work = t + 1
    sign = np.sign(x.lead())
    ax = absolute(x).with_terms(work)
    gap = sub(1.0, ax, work)
    glead = gap.lead()
    outside = glead < 0
    edge = glead == 0
    small = (ax.lead() < 0.5) & ~outside & ~edge
    safe_gap = Expansion(np.where((outside | edge)[..., None], 1.0, gap.terms))
    safe_ax = Expansion(np.where((outside | edge)[..., None], 0.25, ax.terms))
    two_ax = scale_by_power_of_two(safe_ax, 1)
    ratio = divide(two_ax, safe_gap, work)
    # small branch argument of log1p: 2|x| + 2|x||x|/(1-|x|)
    small_arg = add(two_ax, multiply(ratio, safe_ax, work), work)
    large_arg = add(ratio, 1.0, work)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(small, np.log1p(small_arg.lead()), np.log(large_arg.lead()))
        val = 0.5 * sign * val
        val = np.where(edge, sign * np.inf, val)
    val = np.where(outside | np.isnan(x.lead()), np.nan, val)
    return Expansion.from_float(val, t)


def acosh_leading(z) -> np.ndarray:
    """``acosh`` applied to the largest-magnitude term of an expansion.

    Arguments that rounded below 1 are clamped to 1 (distance 0) with a
    :class:`DomainClampWarning`.
    """
    z1 = _as_exp(z).lead()
    low = z1 < 1.0
    if np.any(low):
        warnings.warn("acosh argument below 1 clamped", DomainClampWarning, stacklevel=2)
        z1 = np.where(low, 1.0, z1)
    out = np.arccosh(z1)
    return float(out) if np.ndim(out) == 0 else out

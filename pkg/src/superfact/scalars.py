"""Scalar tower shared by every observable.

Phase-space functions are written once against these helpers and then
evaluate unchanged over floats, complex numbers, numpy arrays (batches of
points), and first-order dual numbers.  Seeding a coordinate with a unit
dual part produces derivatives exact to machine rounding, which is what the
bracket engine relies on.  Duals nest (a ``DualComplex`` may hold
``DualComplex`` components), so bracket expressions can themselves be
differentiated; the Jacobi-identity checks use that.
"""

from __future__ import annotations

import cmath

import numpy as np

from .errors import DomainError

__all__ = ["DualComplex", "sin", "cos", "tan", "sqrt", "ipow"]


def _check_divisor(v):
    # Guarded domains keep evaluation away from the singular sets, so an
    # exact zero denominator is a contract violation rather than bad luck.
    if isinstance(v, DualComplex):
        _check_divisor(v.val)
    elif isinstance(v, np.ndarray):
        if (v == 0).any():
            raise DomainError("singular denominator in observable evaluation")
    elif v == 0:
        raise DomainError("singular denominator in observable evaluation")


class DualComplex:
    """``val + eps * d`` with ``eps**2 == 0``.

    ``val`` and ``eps`` may be complex scalars, numpy arrays, or nested
    ``DualComplex`` values; arithmetic only ever touches them through the
    ordinary operators, so all three cases share one code path.
    """

    __slots__ = ("val", "eps")

    # Make ndarray binary ops defer to the reflected operators below instead
    # of broadcasting elementwise over this object.
    __array_ufunc__ = None
    __array_priority__ = 1000.0

    def __init__(self, val, eps=0.0):
        self.val = val
        self.eps = eps

    def __repr__(self):
        return f"DualComplex({self.val!r}, {self.eps!r})"

    # ---------- arithmetic ----------

    @staticmethod
    def _coerce(x):
        return x if isinstance(x, DualComplex) else DualComplex(x, 0.0)

    # The non-dual branches below spell out the coerced expressions verbatim
    # (an implicit zero dual part) instead of wrapping the operand, so the
    # hot paths skip a _coerce call and an allocation without changing a bit
    # of the arithmetic.

    def __add__(self, other):
        if isinstance(other, DualComplex):
            return DualComplex(self.val + other.val, self.eps + other.eps)
        return DualComplex(self.val + other, self.eps + 0.0)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DualComplex):
            return DualComplex(self.val - other.val, self.eps - other.eps)
        return DualComplex(self.val - other, self.eps - 0.0)

    def __rsub__(self, other):
        if isinstance(other, DualComplex):
            return DualComplex(other.val - self.val, other.eps - self.eps)
        return DualComplex(other - self.val, 0.0 - self.eps)

    def __mul__(self, other):
        if isinstance(other, DualComplex):
            return DualComplex(
                self.val * other.val, self.val * other.eps + self.eps * other.val
            )
        return DualComplex(self.val * other, self.val * 0.0 + self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DualComplex):
            _check_divisor(other.val)
            return DualComplex(
                self.val / other.val,
                (self.eps * other.val - self.val * other.eps)
                / (other.val * other.val),
            )
        _check_divisor(other)
        return DualComplex(
            self.val / other, (self.eps * other - self.val * 0.0) / (other * other)
        )

    def __rtruediv__(self, other):
        if isinstance(other, DualComplex):
            return other.__truediv__(self)
        _check_divisor(self.val)
        return DualComplex(
            other / self.val,
            (0.0 * self.val - other * self.eps) / (self.val * self.val),
        )

    def __neg__(self):
        return DualComplex(-self.val, -self.eps)

    def __pos__(self):
        return self

    def __pow__(self, n):
        return ipow(self, n)


# ---------- elementary functions ----------


def sin(x):
    if isinstance(x, DualComplex):
        v = x.val
        if isinstance(v, (DualComplex, np.ndarray)):
            return DualComplex(sin(v), cos(v) * x.eps)
        return DualComplex(cmath.sin(v), cmath.cos(v) * x.eps)
    if isinstance(x, np.ndarray):
        return np.sin(x)
    return cmath.sin(x)


def cos(x):
    if isinstance(x, DualComplex):
        v = x.val
        if isinstance(v, (DualComplex, np.ndarray)):
            return DualComplex(cos(v), -(sin(v)) * x.eps)
        return DualComplex(cmath.cos(v), -(cmath.sin(v)) * x.eps)
    if isinstance(x, np.ndarray):
        return np.cos(x)
    return cmath.cos(x)


def tan(x):
    if isinstance(x, DualComplex):
        v = x.val
        t = tan(v) if isinstance(v, (DualComplex, np.ndarray)) else cmath.tan(v)
        return DualComplex(t, (1 + t * t) * x.eps)
    if isinstance(x, np.ndarray):
        return np.tan(x)
    return cmath.tan(x)


def _require_positive(v):
    # All square roots in scope act on sector integrals that are positive on
    # the guarded domain; the principal branch never sees a cut.
    if isinstance(v, np.ndarray):
        if (v.real <= 0).any():
            raise DomainError("square root of a non-positive sector value")
    elif complex(v).real <= 0:
        raise DomainError("square root of a non-positive sector value")


def sqrt(x):
    if isinstance(x, DualComplex):
        v = x.val
        if isinstance(v, (DualComplex, np.ndarray)):
            s = sqrt(v)
        else:
            _require_positive(v)
            s = cmath.sqrt(v)
        return DualComplex(s, x.eps / (2 * s))
    if isinstance(x, np.ndarray):
        _require_positive(x)
        return np.sqrt(x)
    _require_positive(x)
    return cmath.sqrt(x)


def ipow(x, n):
    """Integer power by repeated multiplication (no complex log/exp)."""
    if not isinstance(n, (int, np.integer)):
        raise TypeError(f"integer exponent required, got {n!r}")
    if n < 0:
        raise ValueError("negative exponents are not used here")
    if n == 0:
        return x * 0 + 1.0
    out = x
    for _ in range(n - 1):
        out = out * x
    return out

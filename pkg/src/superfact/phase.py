"""Phase points, observables, and the canonical bracket engine.

A phase point is the 4-tuple ``(q1, q2, p1, p2)``; the coordinate meaning is
fixed by the system that interprets it.  Observables are plain callables of
the four coordinates written against :mod:`superfact.scalars`, so the same
definition is evaluated at floats (values), dual numbers (derivatives), or
numpy arrays (batches of points at once).

All derivatives here are forward-mode dual-number derivatives: seed one
coordinate with a unit dual part and read the derivative off the output.
They are exact to machine rounding; no finite-difference step enters any
bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .scalars import DualComplex

COORDS = ("q1", "q2", "p1", "p2")

#: Relative singular-value cutoff used by :func:`jacobian_rank`.
RANK_TOL = 1e-8


@dataclass(frozen=True)
class PhasePoint:
    """A single phase-space point with finite coordinates."""

    q1: float
    q2: float
    p1: float
    p2: float

    def __post_init__(self):
        for name in COORDS:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate {name}={v!r}")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.p1, self.p2], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "PhasePoint":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def _coord_index(which) -> int:
    if isinstance(which, (int, np.integer)):
        if not 0 <= which <= 3:
            raise ValueError(f"coordinate index out of range: {which}")
        return int(which)
    try:
        return COORDS.index(which)
    except ValueError:
        raise ValueError(f"unknown coordinate {which!r}") from None


@dataclass(frozen=True)
class Observable:
    """A labelled phase-space function.

    ``fn(q1, q2, p1, p2)`` must be written against the scalar tower so that
    it accepts real, complex, array, and dual-number inputs alike.
    Evaluation is pure: identical inputs give bit-identical outputs.
    """

    fn: Callable
    label: str = ""

    def __call__(self, point: PhasePoint) -> complex:
        with np.errstate(divide="raise", invalid="raise"):
            try:
                out = self.fn(point.q1, point.q2, point.p1, point.p2)
            except (ZeroDivisionError, FloatingPointError) as exc:
                raise DomainError(
                    f"singular evaluation of {self.label or 'observable'}: {exc}"
                ) from exc
        return complex(out)

    # Small composition algebra; handy for building product observables in
    # checks without writing throwaway closures.
    def _binary(self, other, op, sym):
        if isinstance(other, Observable):
            f, g = self.fn, other.fn
            fn = lambda q1, q2, p1, p2: op(f(q1, q2, p1, p2), g(q1, q2, p1, p2))
            label = f"({self.label}{sym}{other.label})"
        else:
            f, c = self.fn, other
            fn = lambda q1, q2, p1, p2: op(f(q1, q2, p1, p2), c)
            label = f"({self.label}{sym}{other!r})"
        return Observable(fn, label)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __neg__(self):
        f = self.fn
        return Observable(lambda q1, q2, p1, p2: -f(q1, q2, p1, p2), f"(-{self.label})")


# ---------- pointwise derivatives ----------


def _point_scalars(point: PhasePoint):
    return [complex(point.q1), complex(point.q2), complex(point.p1), complex(point.p2)]


def _partials_scalar(fn, coords):
    """All four partial derivatives of ``fn`` at ``coords``.

    ``coords`` entries may themselves be dual numbers (outer seeding), in
    which case the returned partials track the outer seed: that nesting is
    what makes brackets of brackets differentiable.  Every coordinate is
    then lifted to the freshly introduced dual level (unseeded ones with a
    zero dual part) so an outer epsilon can never be mistaken for the inner
    one; flat representations without this lift confuse the two
    perturbations.  When no coordinate carries a dual part there is nothing
    to confuse, so only the seeded coordinate is lifted; unseeded scalars
    stay plain, which keeps their arithmetic out of the dual dispatch.
    """
    nested = any(isinstance(c, DualComplex) for c in coords)
    grads = []
    for k in range(4):
        if nested:
            args = [
                DualComplex(c, 1.0 if j == k else 0.0) for j, c in enumerate(coords)
            ]
        else:
            args = list(coords)
            args[k] = DualComplex(args[k], 1.0)
        out = fn(*args)
        grads.append(out.eps if isinstance(out, DualComplex) else 0.0)
    return grads


def bracket_value(ffn, gfn, coords):
    """Canonical bracket of two raw observable callables at ``coords``."""
    fq1, fq2, fp1, fp2 = _partials_scalar(ffn, coords)
    gq1, gq2, gp1, gp2 = _partials_scalar(gfn, coords)
    return fq1 * gp1 - fp1 * gq1 + fq2 * gp2 - fp2 * gq2


def _wrap_domain(callable_, *args):
    with np.errstate(divide="raise", invalid="raise"):
        try:
            return callable_(*args)
        except (ZeroDivisionError, FloatingPointError) as exc:
            raise DomainError(f"singular evaluation: {exc}") from exc


def partial_derivative(f: Observable, point: PhasePoint, which) -> complex:
    """Exact partial derivative of ``f`` with respect to one coordinate."""
    k = _coord_index(which)
    coords = _point_scalars(point)

    def run():
        args = list(coords)
        args[k] = DualComplex(coords[k], 1.0)
        out = f.fn(*args)
        return out.eps if isinstance(out, DualComplex) else 0.0

    return complex(_wrap_domain(run))


def poisson_bracket(f: Observable, g: Observable, point: PhasePoint) -> complex:
    """Canonical Poisson bracket {f, g} evaluated at ``point``."""
    coords = _point_scalars(point)
    return complex(_wrap_domain(bracket_value, f.fn, g.fn, coords))


def poisson_bracket_with_scale(f: Observable, g: Observable, point: PhasePoint):
    """Bracket value together with the magnitude sum of its four terms.

    The scale is the natural yardstick for residuals of brackets that should
    cancel to zero: it measures how large the cancelling terms were.
    """
    coords = _point_scalars(point)

    def run():
        fq1, fq2, fp1, fp2 = _partials_scalar(f.fn, coords)
        gq1, gq2, gp1, gp2 = _partials_scalar(g.fn, coords)
        t = (fq1 * gp1, fp1 * gq1, fq2 * gp2, fp2 * gq2)
        val = t[0] - t[1] + t[2] - t[3]
        scale = sum(abs(complex(x)) for x in t)
        return complex(val), float(scale)

    return _wrap_domain(run)


def bracket_observable(f: Observable, g: Observable) -> Observable:
    """The bracket {f, g} packaged as an observable (nesting-capable)."""
    ffn, gfn = f.fn, g.fn
    return Observable(
        lambda q1, q2, p1, p2: bracket_value(ffn, gfn, (q1, q2, p1, p2)),
        f"{{{f.label},{g.label}}}",
    )


def gradient(f: Observable, point: PhasePoint) -> np.ndarray:
    """Gradient (four partials) of ``f`` at ``point`` as a complex vector."""
    coords = _point_scalars(point)
    grads = _wrap_domain(_partials_scalar, f.fn, coords)
    return np.array([complex(g) for g in grads], dtype=complex)


# ---------- batched evaluation ----------


@dataclass(frozen=True)
class PhaseBatch:
    """A set of phase points stored column-wise for vectorized evaluation."""

    q1: np.ndarray
    q2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    @classmethod
    def from_points(cls, points) -> "PhaseBatch":
        arr = np.array([[p.q1, p.q2, p.p1, p.p2] for p in points], dtype=float)
        if arr.size == 0:
            arr = arr.reshape(0, 4)
        return cls.from_arrays(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])

    @classmethod
    def from_arrays(cls, q1, q2, p1, p2) -> "PhaseBatch":
        cols = [np.asarray(c, dtype=np.complex128) for c in (q1, q2, p1, p2)]
        n = {c.shape for c in cols}
        if len(n) != 1:
            raise ValueError("batch columns must share one shape")
        return cls(*cols)

    def arrays(self):
        return (self.q1, self.q2, self.p1, self.p2)

    def __len__(self):
        return self.q1.shape[0]

    def point(self, i: int) -> PhasePoint:
        return PhasePoint(
            self.q1[i].real, self.q2[i].real, self.p1[i].real, self.p2[i].real
        )


def eval_batch(f: Observable, batch: PhaseBatch) -> np.ndarray:
    """Evaluate ``f`` at every point of the batch (no derivatives)."""
    out = f.fn(*batch.arrays())
    return np.broadcast_to(np.asarray(out, dtype=np.complex128), (len(batch),))


def gradient_batch(f: Observable, batch: PhaseBatch):
    """Values and all four partials of ``f`` over a batch in one evaluation.

    The four seed directions are stacked into a leading axis, so one pass of
    the observable over ``(4, n)`` arrays yields the full Jacobian row.
    Returns ``(values (n,), grads (4, n))``.
    """
    n = len(batch)
    duals = []
    for k, col in enumerate(batch.arrays()):
        eps = np.zeros((4, n), dtype=np.complex128)
        eps[k, :] = 1.0
        duals.append(DualComplex(np.broadcast_to(col, (4, n)), eps))
    out = f.fn(*duals)
    if isinstance(out, DualComplex):
        val = np.asarray(out.val, dtype=np.complex128)
        val = val[0] if val.ndim == 2 else np.broadcast_to(val, (n,))
        grads = np.broadcast_to(np.asarray(out.eps, dtype=np.complex128), (4, n))
        return val, grads
    # Observable ignored every coordinate: constant value, zero gradient.
    val = np.broadcast_to(np.asarray(out, dtype=np.complex128), (n,))
    return val, np.zeros((4, n), dtype=np.complex128)


def bracket_batch_with_scale(f: Observable, g: Observable, batch: PhaseBatch):
    """Bracket values over a batch plus the per-point term-magnitude scale."""
    _, df = gradient_batch(f, batch)
    _, dg = gradient_batch(g, batch)
    t0 = df[0] * dg[2]
    t1 = df[2] * dg[0]
    t2 = df[1] * dg[3]
    t3 = df[3] * dg[1]
    val = t0 - t1 + t2 - t3
    scale = np.abs(t0) + np.abs(t1) + np.abs(t2) + np.abs(t3)
    return val, scale


def bracket_batch(f: Observable, g: Observable, batch: PhaseBatch) -> np.ndarray:
    return bracket_batch_with_scale(f, g, batch)[0]


# ---------- functional independence ----------


def jacobian_rank(fs, point: PhasePoint, tol: float = RANK_TOL) -> int:
    """Numerical rank of the Jacobian of real-valued observables at a point.

    Each gradient row is scaled to unit norm before the SVD: functional
    independence is a statement about gradient directions, and without the
    scaling an observable of large magnitude (a high-order product, say)
    would numerically swamp an O(1) one.  Rank is then the number of
    singular values above ``tol`` relative to the largest one.  Raises
    ``ValueError`` if any observable has a non-negligible imaginary part at
    ``point``.
    """
    rows = []
    for f in fs:
        v = f(point)
        if abs(v.imag) > tol * (1.0 + abs(v.real)):
            raise ValueError(f"observable {f.label!r} is not real-valued at {point}")
        row = gradient(f, point).real
        norm = np.linalg.norm(row)
        rows.append(row / norm if norm > 0.0 else row)
    mat = np.array(rows, dtype=float)
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > tol * s[0]).sum())

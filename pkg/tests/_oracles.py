"""Independent oracles shared by the test battery.

The library computes every derivative with dual numbers; these helpers give
a second, slower opinion (central finite differences) plus random polynomial
observables whose bracket algebra is known exactly.  Nothing here imports
from the modules under test beyond the public containers.
"""

import numpy as np

from superfact import (
    DomainBox,
    Family,
    Observable,
    PhasePoint,
    RationalGamma,
    SystemSpec,
)

FD_STEP = 1e-6

# Default TTW angular barrier strengths used throughout the tests.
TTW_ALPHA = 1.1
TTW_BETA = 0.7


def spec_for(family, gamma="1", omega=1.0, alpha=TTW_ALPHA, beta=TTW_BETA):
    """Build a SystemSpec from short string arguments."""
    g = RationalGamma.parse(str(gamma))
    if Family(family) is Family.TTW:
        return SystemSpec(Family.TTW, omega, g, alpha=alpha, beta=beta)
    return SystemSpec(Family(family), omega, g)


def narrow_box(family):
    """Sampling boxes keeping very high-order products (gamma = 141/100,
    polynomial order 241) inside double-precision range."""
    fam = Family(family)
    if fam is Family.EUCLIDEAN:
        return DomainBox(((-1.0, 1.0),) * 4)
    if fam is Family.SPHERE:
        return DomainBox(((-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0), (-1.0, 1.0)))
    return DomainBox(((1.0, 1.3), (0.55, 1.0), (-0.8, 0.8), (-0.8, 0.8)))


def fd_partial(fn, coords, k, h=FD_STEP):
    """Central-difference partial derivative of ``fn`` in coordinate ``k``."""
    plus = list(coords)
    minus = list(coords)
    plus[k] = plus[k] + h
    minus[k] = minus[k] - h
    return (fn(*plus) - fn(*minus)) / (2 * h)


def fd_gradient(fn, coords, h=FD_STEP):
    return np.array([fd_partial(fn, coords, k, h) for k in range(4)])


def fd_bracket(ffn, gfn, coords, h=FD_STEP):
    """Canonical bracket from finite-difference gradients."""
    df = fd_gradient(ffn, coords, h)
    dg = fd_gradient(gfn, coords, h)
    return df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1]


def random_polynomial(rng, degree=3, terms=5, label="poly"):
    """A random sparse polynomial in the four phase coordinates.

    Polynomials are smooth everywhere, so they are safe oracles for the
    bracket laws (antisymmetry, Leibniz, Jacobi) at any real point.
    """
    exponents = rng.integers(0, degree + 1, size=(terms, 4))
    coeffs = rng.uniform(-2.0, 2.0, size=terms)

    def fn(q1, q2, p1, p2):
        total = 0.0
        for c, row in zip(coeffs, exponents):
            term = c
            for v, e in zip((q1, q2, p1, p2), row):
                for _ in range(int(e)):
                    term = term * v
            total = total + term
        return total

    return Observable(fn, label)


def random_point(rng, lo=-1.5, hi=1.5):
    return PhasePoint(*rng.uniform(lo, hi, size=4))

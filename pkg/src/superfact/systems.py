"""The three Hamiltonian families and their coordinate/domain plumbing.

Internal coordinates are the ones every other module works in:

* Euclidean anisotropic oscillator: ``(xi, y, p_xi, p_y)`` with
  ``xi = gamma * x`` and ``p_xi = p_x / gamma``;
* anisotropic oscillator on the unit sphere, geodesic parallel coordinates:
  ``(xi, y, p_xi, p_y)`` with the same rescaling of the first pair;
* TTW system in polar-type coordinates: ``(r, theta, p_r, p_theta)`` with
  ``theta = gamma * phi`` and ``p_theta = p_phi / gamma``.

The frequency ratio ``gamma`` is always an exact reduced fraction ``m/n``;
the integer pair is what the higher-order constants of motion are built
from, so it is never collapsed to a float anywhere that matters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import scalars as sc
from .errors import DomainError, UnsupportedError
from .phase import Observable, PhasePoint

#: Default distance kept from coordinate singularities when sampling (rad).
DELTA_MARGIN = 0.05

#: Positivity floor for sector integrals under a square root.
DELTA_POS = 1e-8

_HALF_PI = math.pi / 2


class Family(str, Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    TTW = "ttw"


@dataclass(frozen=True)
class RationalGamma:
    """Frequency ratio ``m/n`` stored as a reduced pair of positive integers."""

    m: int
    n: int = 1

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or not isinstance(
            self.n, (int, np.integer)
        ):
            raise ValueError("gamma numerator and denominator must be integers")
        if self.m < 1 or self.n < 1:
            raise ValueError(f"gamma must be a positive fraction, got {self.m}/{self.n}")
        g = math.gcd(int(self.m), int(self.n))
        object.__setattr__(self, "m", int(self.m) // g)
        object.__setattr__(self, "n", int(self.n) // g)

    @property
    def value(self) -> float:
        return self.m / self.n

    @classmethod
    def parse(cls, text: str) -> "RationalGamma":
        """Parse ``"m/n"`` or a bare integer string."""
        s = str(text).strip()
        if "/" in s:
            num, _, den = s.partition("/")
            return cls(int(num), int(den))
        return cls(int(s), 1)

    def __str__(self):
        return f"{self.m}/{self.n}"


_GAMMA_FLOOR = {
    # least allowed gamma per family, as (numerator, denominator)
    Family.EUCLIDEAN: (0, 1),
    Family.SPHERE: (1, 2),
    Family.TTW: (1, 4),
}


@dataclass(frozen=True)
class SystemSpec:
    """Immutable description of one system instance."""

    family: Family
    omega: float
    gamma: RationalGamma
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        try:
            w = float(self.omega)
        except (TypeError, ValueError):
            raise ValueError(f"omega must be a positive number, got {self.omega!r}")
        if not (math.isfinite(w) and w > 0):
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        object.__setattr__(self, "omega", w)
        if not isinstance(self.gamma, RationalGamma):
            raise ValueError("gamma must be a RationalGamma")
        lo_m, lo_n = _GAMMA_FLOOR[fam]
        if self.gamma.m * lo_n < lo_m * self.gamma.n:
            raise ValueError(
                f"gamma={self.gamma} below the {fam.value} bound {lo_m}/{lo_n}"
            )
        if fam is Family.TTW:
            if self.alpha is None or self.beta is None:
                raise ValueError("ttw requires both alpha and beta")
            a, b = float(self.alpha), float(self.beta)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("alpha and beta must be finite")
            object.__setattr__(self, "alpha", a)
            object.__setattr__(self, "beta", b)
        else:
            if self.alpha is not None or self.beta is not None:
                raise ValueError(f"alpha/beta are ttw-only, not {fam.value}")

    # ----- serialization -----

    def to_json_dict(self) -> dict:
        d = {
            "family": self.family.value,
            "omega": self.omega,
            "gamma": {"m": self.gamma.m, "n": self.gamma.n},
        }
        if self.family is Family.TTW:
            d["alpha"] = self.alpha
            d["beta"] = self.beta
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "SystemSpec":
        gamma = d.get("gamma")
        if isinstance(gamma, dict):
            gamma = RationalGamma(int(gamma["m"]), int(gamma["n"]))
        elif isinstance(gamma, str):
            gamma = RationalGamma.parse(gamma)
        else:
            raise ValueError(f"bad gamma entry: {gamma!r}")
        return cls(
            family=Family(d["family"]),
            omega=d["omega"],
            gamma=gamma,
            alpha=d.get("alpha"),
            beta=d.get("beta"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SystemSpec":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class DomainBox:
    """Per-coordinate open sampling intervals plus the boundary margin."""

    intervals: tuple
    margin: float = DELTA_MARGIN

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if len(ivs) != 4 or any(lo >= hi for lo, hi in ivs):
            raise ValueError(f"need 4 ordered intervals, got {self.intervals!r}")
        object.__setattr__(self, "intervals", ivs)
        if self.margin < 0:
            raise ValueError("margin must be non-negative")

    def to_json_dict(self) -> dict:
        return {"intervals": [list(iv) for iv in self.intervals], "margin": self.margin}


@dataclass(frozen=True)
class DomainVerdict:
    valid: bool
    reason: str | None = None

    def __bool__(self):
        return self.valid


# ---------- domain handling ----------


def domain_check(spec: SystemSpec, point: PhasePoint, margin: float | None = None) -> DomainVerdict:
    """Total validity check; the verdict names the violated constraint."""
    m = DELTA_MARGIN if margin is None else float(margin)
    fam = spec.family
    if fam is Family.EUCLIDEAN:
        return DomainVerdict(True)
    if fam is Family.SPHERE:
        lim = _HALF_PI - m
        if not abs(point.q1) < lim:
            return DomainVerdict(False, f"|xi|={abs(point.q1):.6g} not < pi/2 - {m:g}")
        if not abs(point.q2) < lim:
            return DomainVerdict(False, f"|y|={abs(point.q2):.6g} not < pi/2 - {m:g}")
        return DomainVerdict(True)
    # TTW
    if not point.q1 > m:
        return DomainVerdict(False, f"r={point.q1:.6g} not > {m:g}")
    if not (m < point.q2 < _HALF_PI - m):
        return DomainVerdict(False, f"theta={point.q2:.6g} not in ({m:g}, pi/2 - {m:g})")
    return DomainVerdict(True)


def _require_in_domain(spec: SystemSpec, point: PhasePoint):
    verdict = domain_check(spec, point, margin=0.0)
    if not verdict:
        raise DomainError(f"{spec.family.value} point outside domain: {verdict.reason}")


# ---------- coordinate transforms ----------


def to_internal(spec: SystemSpec, external: PhasePoint) -> PhasePoint:
    """External chart -> internal chart (canonical rescaling of one pair).

    The flat and spherical families stretch the first coordinate
    (``xi = gamma * x``, ``p_xi = p_x / gamma``); the TTW family stretches
    the angle (``theta = gamma * phi``, ``p_theta = p_phi / gamma``).
    """
    g = spec.gamma.value
    if spec.family is Family.TTW:
        internal = PhasePoint(
            external.q1, g * external.q2, external.p1, external.p2 / g
        )
    else:
        internal = PhasePoint(
            g * external.q1, external.q2, external.p1 / g, external.p2
        )
    _require_in_domain(spec, internal)
    return internal


def to_external(spec: SystemSpec, internal: PhasePoint) -> PhasePoint:
    """Inverse of :func:`to_internal`."""
    _require_in_domain(spec, internal)
    g = spec.gamma.value
    if spec.family is Family.TTW:
        return PhasePoint(internal.q1, internal.q2 / g, internal.p1, g * internal.p2)
    return PhasePoint(internal.q1 / g, internal.q2, g * internal.p1, internal.p2)


def geodesic_polar(spec: SystemSpec, internal: PhasePoint):
    """Sphere only: geodesic polar ``(r, phi)`` of the configuration point.

    Read-only reporting helper; nothing downstream consumes it.
    """
    if spec.family is not Family.SPHERE:
        raise UnsupportedError("geodesic polar coordinates are sphere-only")
    _require_in_domain(spec, internal)
    x = internal.q1 / spec.gamma.value
    y = internal.q2
    r = math.acos(math.cos(x) * math.cos(y))
    phi = math.atan2(math.sin(y), math.sin(x) * math.cos(y))
    return r, phi


# ---------- observables ----------


def second_integral_observable(spec: SystemSpec) -> Observable:
    """The separated sector integral: oscillator sector energy for the flat
    and spherical families, the angular integral for TTW."""
    w = spec.omega
    g = spec.gamma.value
    fam = spec.family
    if fam is Family.EUCLIDEAN:
        k = w * w / (2 * g * g)

        def fn(q1, q2, p1, p2):
            return p1 * p1 / 2 + k * (q1 * q1)

        return Observable(fn, "Hxi")
    if fam is Family.SPHERE:
        k = w * w / (2 * g * g)

        def fn(q1, q2, p1, p2):
            c = sc.cos(q1)
            return p1 * p1 / 2 + k / (c * c)

        return Observable(fn, "Hxi")
    a2 = spec.alpha * spec.alpha
    b2 = spec.beta * spec.beta

    def fn(q1, q2, p1, p2):
        c = sc.cos(q2)
        s = sc.sin(q2)
        return p2 * p2 + a2 / (c * c) + b2 / (s * s)

    return Observable(fn, "Htheta")


def hamiltonian_observable(spec: SystemSpec) -> Observable:
    w = spec.omega
    g = spec.gamma.value
    g2 = g * g
    sector = second_integral_observable(spec).fn
    fam = spec.family
    if fam is Family.EUCLIDEAN:

        def fn(q1, q2, p1, p2):
            return p2 * p2 / 2 + w * w * q2 * q2 / 2 + g2 * sector(q1, q2, p1, p2)

    elif fam is Family.SPHERE:

        def fn(q1, q2, p1, p2):
            c = sc.cos(q2)
            return p2 * p2 / 2 + g2 * sector(q1, q2, p1, p2) / (c * c) - w * w / 2

    else:

        def fn(q1, q2, p1, p2):
            return p1 * p1 + w * w * q1 * q1 + g2 * sector(q1, q2, p1, p2) / (q1 * q1)

    return Observable(fn, f"H[{fam.value}]")


def euclid_y_sector_observable(spec: SystemSpec) -> Observable:
    """The y-sector oscillator energy of the Euclidean family."""
    if spec.family is not Family.EUCLIDEAN:
        raise UnsupportedError("y-sector energy is defined for the euclidean family")
    w = spec.omega

    def fn(q1, q2, p1, p2):
        return p2 * p2 / 2 + w * w * q2 * q2 / 2

    return Observable(fn, "Hy")


def epsilon_observable(spec: SystemSpec) -> Observable:
    """The frequency-like function: sqrt(2 * sector) on the sphere,
    sqrt(sector) for TTW.  Full phase-space dependence, so its derivatives
    chain through the sector integral."""
    sector = second_integral_observable(spec).fn
    if spec.family is Family.SPHERE:
        return Observable(
            lambda q1, q2, p1, p2: sc.sqrt(2 * sector(q1, q2, p1, p2)), "E"
        )
    if spec.family is Family.TTW:
        return Observable(
            lambda q1, q2, p1, p2: sc.sqrt(sector(q1, q2, p1, p2)), "E"
        )
    raise UnsupportedError("epsilon is not defined for the euclidean family")


# ---------- pointwise operations ----------


def _eval_real(obs: Observable, point: PhasePoint) -> float:
    return obs(point).real


def hamiltonian(spec: SystemSpec, point: PhasePoint) -> float:
    _require_in_domain(spec, point)
    return _eval_real(hamiltonian_observable(spec), point)


def second_integral(spec: SystemSpec, point: PhasePoint) -> float:
    _require_in_domain(spec, point)
    return _eval_real(second_integral_observable(spec), point)


def epsilon(spec: SystemSpec, point: PhasePoint) -> float:
    """Positive square root of the (doubled, on the sphere) sector integral."""
    if spec.family is Family.EUCLIDEAN:
        raise UnsupportedError("epsilon is not defined for the euclidean family")
    _require_in_domain(spec, point)
    i2 = _eval_real(second_integral_observable(spec), point)
    if i2 <= DELTA_POS:
        raise DomainError(f"sector integral {i2:.3g} <= {DELTA_POS:g}")
    if spec.family is Family.SPHERE:
        return math.sqrt(2 * i2)
    return math.sqrt(i2)


def higgs_potential_identity(x: float, y: float):
    """Both sides of the geodesic-polar rewriting of the central potential.

    ``lhs`` is the parallel-coordinate form ``tan^2 x / cos^2 y + tan^2 y``;
    ``rhs`` is ``tan^2 r`` expressed through ``cos r = cos x * cos y``.
    They agree identically on the open square ``|x|, |y| < pi/2``.
    """
    cx = math.cos(x)
    cy = math.cos(y)
    if not (abs(x) < _HALF_PI and abs(y) < _HALF_PI):
        raise DomainError(f"({x:.6g}, {y:.6g}) outside the open coordinate square")
    tx = math.tan(x)
    ty = math.tan(y)
    lhs = tx * tx / (cy * cy) + ty * ty
    c2 = cx * cx * cy * cy
    rhs = (1.0 - c2) / c2
    return lhs, rhs


def characteristic_period(spec: SystemSpec) -> float:
    """Coarse time scale of the bounded motion used for defaults: the
    y-sector period for the oscillator families, the radial period for TTW."""
    if spec.family is Family.TTW:
        return math.pi / spec.omega
    return 2 * math.pi / spec.omega


def default_box(spec: SystemSpec, margin: float | None = None) -> DomainBox:
    """A generic sampling box respecting the family's guards."""
    m = DELTA_MARGIN if margin is None else float(margin)
    mom = (-1.5, 1.5)
    if spec.family is Family.EUCLIDEAN:
        return DomainBox(((-1.5, 1.5), (-1.5, 1.5), mom, mom), margin=m)
    if spec.family is Family.SPHERE:
        ang = (-_HALF_PI + m, _HALF_PI - m)
        return DomainBox((ang, ang, mom, mom), margin=m)
    return DomainBox(((0.3, 2.2), (m, _HALF_PI - m), mom, mom), margin=m)

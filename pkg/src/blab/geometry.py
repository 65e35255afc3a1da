"""Radial planar domains, nested exhaustion families, and compact evaluation regions.

Everything downstream (quadrature, kernels, operators, experiments) works on
the three radial domain kinds defined here: discs, annuli, and the punctured
disc.  All values are immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("disc", "annulus", "punctured_disc")

#: Fractional part of the golden ratio; used to spread sample angles.
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DomainError(ValueError):
    """Raised for invalid domain parameters or points outside a domain."""


@dataclass(frozen=True)
class DomainSpec:
    """A radial planar domain: ``disc``, ``annulus``, or ``punctured_disc``.

    Membership is an open condition: boundary circles are excluded, and the
    punctured disc additionally excludes the origin.
    """

    kind: str
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}; expected one of {KINDS}")
        if not (0.0 <= self.r_inner < self.r_outer):
            raise DomainError(f"need 0 <= r_inner < r_outer, got {self.r_inner}, {self.r_outer}")
        if self.kind in ("disc", "punctured_disc") and self.r_inner != 0.0:
            raise DomainError(f"{self.kind} must have r_inner = 0, got {self.r_inner}")

    @property
    def area(self) -> float:
        return math.pi * (self.r_outer**2 - self.r_inner**2)

    @property
    def excludes_origin(self) -> bool:
        return self.kind != "disc"

    def __str__(self) -> str:
        return f"{self.kind}:{self.r_inner:g}:{self.r_outer:g}"


def disc(radius: float = 1.0) -> DomainSpec:
    return DomainSpec("disc", 0.0, radius)


def annulus(r_inner: float, r_outer: float = 1.0) -> DomainSpec:
    return DomainSpec("annulus", r_inner, r_outer)


def punctured_disc(radius: float = 1.0) -> DomainSpec:
    return DomainSpec("punctured_disc", 0.0, radius)


def parse_domain(text: str) -> DomainSpec:
    """Parse a ``kind:r_inner:r_outer`` string; a bare kind gets radii 0 and 1."""
    parts = text.strip().split(":")
    kind = parts[0]
    if kind not in KINDS:
        raise DomainError(f"unknown domain kind {kind!r} in {text!r}")
    if len(parts) == 1:
        return DomainSpec(kind, 0.0, 1.0)
    if len(parts) == 2:
        # single radius: inner radius for an annulus (outer 1), outer otherwise
        r = float(parts[1])
        if kind == "annulus":
            return DomainSpec(kind, r, 1.0)
        return DomainSpec(kind, 0.0, r)
    if len(parts) == 3:
        return DomainSpec(kind, float(parts[1]), float(parts[2]))
    raise DomainError(f"malformed domain string {text!r}")


def contains(d: DomainSpec, z: complex) -> bool:
    """Strict membership: boundary excluded, origin excluded unless ``d`` is a disc."""
    a = abs(z)
    if a >= d.r_outer:
        return False
    if d.kind == "disc":
        return True
    if d.kind == "punctured_disc":
        return a > 0.0
    return a > d.r_inner


def inside(d: DomainSpec, z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`contains` for arrays of points."""
    a = np.abs(np.asarray(z))
    ok = a < d.r_outer
    if d.excludes_origin:
        lo = d.r_inner if d.kind == "annulus" else 0.0
        ok &= a > lo
    return ok


def is_subdomain(u: DomainSpec, omega: DomainSpec) -> bool:
    """Set inclusion u ⊆ omega for radial domains (origin bookkeeping included)."""
    if u.r_outer > omega.r_outer:
        return False
    if u.kind == "disc" and omega.excludes_origin:
        return False
    inner_u = u.r_inner if u.kind == "annulus" else 0.0
    inner_o = omega.r_inner if omega.kind == "annulus" else 0.0
    return inner_u >= inner_o


@dataclass(frozen=True)
class ExhaustionPlan:
    """A nested family of domains increasing to (or decreasing onto) a limit."""

    name: str
    direction: str  # "increasing" | "decreasing"
    limit: DomainSpec
    domains: tuple[DomainSpec, ...]

    def __post_init__(self):
        if self.direction not in ("increasing", "decreasing"):
            raise DomainError(f"bad direction {self.direction!r}")
        if len(self.domains) < 2:
            raise DomainError("an exhaustion needs at least two indices")
        seq = list(self.domains)
        if self.direction == "increasing":
            chain = seq + [self.limit]
            for a, b in zip(chain[:-1], chain[1:]):
                if not is_subdomain(a, b):
                    raise DomainError(f"increasing plan violates nesting: {a} vs {b}")
        else:
            chain = [self.limit] + seq[::-1]
            for a, b in zip(chain[:-1], chain[1:]):
                if not is_subdomain(a, b):
                    raise DomainError(f"decreasing plan violates nesting: {b} vs {a}")

    def __len__(self) -> int:
        return len(self.domains)

    def domain(self, j: int) -> DomainSpec:
        """Domain at 1-based index j."""
        if not 1 <= j <= len(self.domains):
            raise DomainError(f"index {j} outside plan of length {len(self.domains)}")
        return self.domains[j - 1]

    @property
    def indices(self) -> range:
        return range(1, len(self.domains) + 1)

    def describe(self) -> str:
        return f"{self.name}[{self.direction}; {len(self.domains)} -> {self.limit}]"


#: Named geometric schedules.  Radii approach the limit like 2^{-j}.
STANDARD_EXHAUSTIONS = ("annuli_to_punctured_disc", "discs_increasing", "discs_decreasing")


def standard_exhaustions(name: str, length: int) -> ExhaustionPlan:
    """Return one of the named geometric exhaustion families.

    - ``annuli_to_punctured_disc``: annuli r_j < |z| < 1 with r_j = 2^{-j},
      increasing to the punctured unit disc;
    - ``discs_increasing``: discs of radius 1 - 2^{-j}, increasing to the unit disc;
    - ``discs_decreasing``: discs of radius 1 + 2^{-j}, decreasing onto the unit disc.
    """
    if length < 2:
        raise DomainError("exhaustion length must be at least 2")
    js = range(1, length + 1)
    if name == "annuli_to_punctured_disc":
        doms = tuple(annulus(2.0**-j, 1.0) for j in js)
        return ExhaustionPlan(name, "increasing", punctured_disc(1.0), doms)
    if name == "discs_increasing":
        doms = tuple(disc(1.0 - 2.0**-j) for j in js)
        return ExhaustionPlan(name, "increasing", disc(1.0), doms)
    if name == "discs_decreasing":
        doms = tuple(disc(1.0 + 2.0**-j) for j in js)
        return ExhaustionPlan(name, "decreasing", disc(1.0), doms)
    raise DomainError(f"unknown exhaustion family {name!r}; known: {STANDARD_EXHAUSTIONS}")


@dataclass(frozen=True)
class CompactRegion:
    """A closed radial band r_min <= |z| <= r_max with a finite sample set."""

    domain: DomainSpec
    r_min: float
    r_max: float
    sample_points: tuple[complex, ...] = field(repr=False)

    def __post_init__(self):
        lo = self.domain.r_inner
        if not (lo < self.r_min <= self.r_max < self.domain.r_outer):
            raise DomainError(
                f"band [{self.r_min}, {self.r_max}] not compactly inside {self.domain}"
            )
        for z in self.sample_points:
            if not contains(self.domain, z):
                raise DomainError(f"sample point {z} outside {self.domain}")
            a = abs(z)
            if not (self.r_min - 1e-12 <= a <= self.r_max + 1e-12):
                raise DomainError(f"sample point {z} outside band [{self.r_min}, {self.r_max}]")

    def points(self) -> np.ndarray:
        return np.asarray(self.sample_points, dtype=complex)

    def fits_inside(self, d: DomainSpec) -> bool:
        inner = d.r_inner if d.kind == "annulus" else 0.0
        return inner < self.r_min and self.r_max < d.r_outer

    def describe(self) -> str:
        return f"band[{self.r_min:g},{self.r_max:g}]x{len(self.sample_points)}"


def default_compact(d: DomainSpec, margin: float, count: int) -> CompactRegion:
    """Deterministic sample band at distance ``margin`` from the boundary.

    Points are spread over min(count, ~sqrt(count)) radii; angles follow a
    golden-ratio sequence so no two points align.  The construction is a pure
    function of its arguments.
    """
    half = (d.r_outer - d.r_inner) / 2.0
    if not (0.0 < margin <= half + 1e-15):
        raise DomainError(f"margin {margin} too large for {d} (max {half})")
    if count < 1:
        raise DomainError("need at least one sample point")
    r_lo = d.r_inner + margin
    r_hi = max(d.r_outer - margin, r_lo)
    return compact_band(d, r_lo, r_hi, count)


def compact_band(d: DomainSpec, r_lo: float, r_hi: float, count: int) -> CompactRegion:
    """Compact region on an explicit radial band with golden-angle samples."""
    n_rings = min(count, max(1, round(math.sqrt(count))))
    radii = np.linspace(r_lo, r_hi, n_rings)
    pts = []
    for k in range(count):
        rho = radii[k % n_rings]
        theta = 2.0 * math.pi * ((k + 1) * _GOLDEN % 1.0)
        pts.append(complex(rho * math.cos(theta), rho * math.sin(theta)))
    return CompactRegion(d, r_lo, r_hi, tuple(pts))

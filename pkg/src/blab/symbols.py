"""Symbol expressions for Toeplitz operators, and finite operator words.

The registry covers constants, log|w|, |w|^alpha, the disc Green's function
log|psi_a(w)| with an interior pole, and two-sided clamping
clamp(phi, k) = min(max(phi, -k), k).  Symbols know whether they are radial,
whether they are bounded, where their radial kinks sit (so quadrature panels
can align with them), and whether they carry an interior log pole.

Config strings: ``const:0.5``, ``log_abs``, ``abs_power:-1``,
``green:0.3+0.0i``, ``clamp:log_abs:10``.  Operator words are ``;``-separated
sums of ``,``-separated products, e.g. ``green:0.3,clamp:log_abs:5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DomainSpec


class SymbolError(ValueError):
    """Raised for malformed symbol/word specifications."""


class SymbolExpr:
    """Base class; subclasses are immutable and evaluable at domain points."""

    is_radial: bool = True
    bounded: bool = True
    is_real: bool = True

    def __call__(self, w):
        raise NotImplementedError

    def radial_profile(self, rho):
        """Value as a function of |w| (radial symbols only)."""
        raise SymbolError(f"{self} is not radial")

    def sup_norm(self, domain: DomainSpec) -> float:
        """Essential sup of |phi| on the domain; may be inf."""
        raise NotImplementedError

    def radial_breakpoints(self, domain: DomainSpec) -> tuple[float, ...]:
        """Radii where the profile is non-smooth (quadrature panel boundaries)."""
        return ()

    @property
    def singular_at_origin(self) -> bool:
        """True when the radial profile is non-smooth as rho -> 0."""
        return False

    @property
    def pole(self):
        """Interior log-pole location, or None."""
        return None


@dataclass(frozen=True)
class Const(SymbolExpr):
    value: complex = 1.0

    def __call__(self, w):
        w = np.asarray(w)
        return np.full(w.shape, complex(self.value)) if w.ndim else complex(self.value)

    def radial_profile(self, rho):
        rho = np.asarray(rho)
        return np.full(rho.shape, complex(self.value)) if rho.ndim else complex(self.value)

    @property
    def is_real(self) -> bool:  # type: ignore[override]
        return complex(self.value).imag == 0.0

    def sup_norm(self, domain: DomainSpec) -> float:
        return abs(self.value)

    def __str__(self) -> str:
        v = complex(self.value)
        return f"const:{v.real:g}" if v.imag == 0 else f"const:{v.real:g}{v.imag:+g}i"


@dataclass(frozen=True)
class LogAbs(SymbolExpr):
    """log|w|; unbounded below near the origin."""

    bounded = False

    def __call__(self, w):
        return self.radial_profile(np.abs(w))

    def radial_profile(self, rho):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(rho, dtype=float))

    def sup_norm(self, domain: DomainSpec) -> float:
        hi = abs(math.log(domain.r_outer)) if domain.r_outer != 1.0 else 0.0
        if domain.r_inner == 0.0:
            return math.inf
        return max(hi, abs(math.log(domain.r_inner)))

    @property
    def singular_at_origin(self) -> bool:
        return True

    def __str__(self) -> str:
        return "log_abs"


@dataclass(frozen=True)
class AbsPower(SymbolExpr):
    """|w|^alpha."""

    alpha: float = 1.0

    def __call__(self, w):
        return self.radial_profile(np.abs(w))

    def radial_profile(self, rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            return rho**self.alpha

    @property
    def bounded(self) -> bool:  # type: ignore[override]
        return self.alpha >= 0

    def sup_norm(self, domain: DomainSpec) -> float:
        if self.alpha >= 0:
            return domain.r_outer**self.alpha
        if domain.r_inner == 0.0:
            return math.inf
        return domain.r_inner**self.alpha

    @property
    def singular_at_origin(self) -> bool:
        # non-smooth endpoint behaviour unless a genuine polynomial in rho
        return self.alpha < 0 or self.alpha != int(self.alpha)

    def __str__(self) -> str:
        return f"abs_power:{self.alpha:g}"


@dataclass(frozen=True)
class Green(SymbolExpr):
    """G_a(w) = log|(a - w) / (1 - conj(a) w)|, the disc Green's function.

    Flagged bounded: the log pole sits at the fixed interior point a, the
    symbol is p-integrable for every finite p, and its Toeplitz operator is
    bounded, so it participates in bounded-word experiments.  The sup norm is
    reported as inf, keeping norm-bound checks honest.
    """

    a: complex = 0.0
    is_radial = False

    def __post_init__(self):
        if abs(self.a) >= 1.0:
            raise SymbolError(f"green pole must satisfy |a| < 1, got {self.a}")

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore"):
            out = np.log(np.abs((self.a - w) / (1.0 - np.conj(self.a) * w)))
        return out if out.ndim else float(out)

    def sup_norm(self, domain: DomainSpec) -> float:
        return math.inf

    @property
    def pole(self):
        return complex(self.a)

    def __str__(self) -> str:
        av = complex(self.a)
        return f"green:{av.real:g}{av.imag:+g}i"


@dataclass(frozen=True)
class Clamp(SymbolExpr):
    """min(max(phi, -k), k): two-sided truncation of a real symbol at level k."""

    inner: SymbolExpr = LogAbs()
    level: float = 1.0

    def __post_init__(self):
        if self.level <= 0:
            raise SymbolError("clamp level must be positive")
        if not self.inner.is_real:
            raise SymbolError("clamp needs a real-valued inner symbol")

    def __call__(self, w):
        return np.clip(np.real(self.inner(w)), -self.level, self.level)

    @property
    def is_radial(self) -> bool:  # type: ignore[override]
        return self.inner.is_radial

    def radial_profile(self, rho):
        return np.clip(np.real(self.inner.radial_profile(rho)), -self.level, self.level)

    def sup_norm(self, domain: DomainSpec) -> float:
        return min(self.level, self.inner.sup_norm(domain))

    def radial_breakpoints(self, domain: DomainSpec) -> tuple[float, ...]:
        pts = list(self.inner.radial_breakpoints(domain))
        if isinstance(self.inner, LogAbs):
            pts += [math.exp(-self.level), math.exp(self.level)]
        elif isinstance(self.inner, AbsPower) and self.inner.alpha != 0:
            pts += [self.level ** (1.0 / self.inner.alpha)]
        return tuple(p for p in pts if domain.r_inner < p < domain.r_outer)

    def __str__(self) -> str:
        return f"clamp:{self.inner}:{self.level:g}"


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise SymbolError(f"malformed complex value {text!r}") from exc


def parse_symbol(text: str) -> SymbolExpr:
    """Parse a registry name like ``green:0.3+0.0i`` or ``clamp:log_abs:10``."""
    text = text.strip()
    if text == "log_abs":
        return LogAbs()
    head, _, rest = text.partition(":")
    if head == "const":
        if not rest:
            raise SymbolError("const needs a value, e.g. const:0.5")
        return Const(_parse_complex(rest))
    if head == "abs_power":
        try:
            return AbsPower(float(rest))
        except ValueError as exc:
            raise SymbolError(f"malformed exponent in {text!r}") from exc
    if head == "green":
        return Green(_parse_complex(rest))
    if head == "clamp":
        inner_spec, sep, level = rest.rpartition(":")
        if not sep:
            raise SymbolError("clamp needs an inner symbol and a level, e.g. clamp:log_abs:10")
        try:
            lv = float(level)
        except ValueError as exc:
            raise SymbolError(f"malformed clamp level in {text!r}") from exc
        return Clamp(parse_symbol(inner_spec), lv)
    raise SymbolError(
        f"unknown symbol {text!r}; registry: const:c, log_abs, abs_power:a, green:a, clamp:inner:k"
    )


@dataclass(frozen=True)
class OperatorWord:
    """A finite sum of finite products of Toeplitz symbols.

    ``terms[m]`` is the ordered factor tuple (phi_{m,1}, ..., phi_{m,k_m}) of
    the product T_{phi_{m,1}} ... T_{phi_{m,k_m}} (rightmost acts first).
    """

    terms: tuple[tuple[SymbolExpr, ...], ...]

    def __post_init__(self):
        if not self.terms or any(not t for t in self.terms):
            raise SymbolError("an operator word needs at least one nonempty product")

    @property
    def bounded(self) -> bool:
        return all(f.bounded for t in self.terms for f in t)

    def sup_bound(self, domain: DomainSpec) -> float:
        """Sum over terms of the products of factor sup norms (may be inf)."""
        return sum(math.prod(f.sup_norm(domain) for f in t) for t in self.terms)

    def factors(self):
        for t in self.terms:
            yield from t

    def __str__(self) -> str:
        return ";".join(",".join(str(f) for f in t) for t in self.terms)


def parse_word(text: str) -> OperatorWord:
    """Parse ``;``-separated products of ``,``-separated symbol names."""
    terms = []
    for chunk in text.strip().split(";"):
        factors = tuple(parse_symbol(f) for f in chunk.split(",") if f.strip())
        if not factors:
            raise SymbolError(f"empty product in word {text!r}")
        terms.append(factors)
    return OperatorWord(tuple(terms))


def single(symbol: SymbolExpr) -> OperatorWord:
    """The word consisting of one Toeplitz operator."""
    return OperatorWord(((symbol,),))

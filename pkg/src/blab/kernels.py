"""Bergman kernels on radial domains: closed forms, series, and basis models.

Three evaluable representations share one :class:`KernelModel` container:

- ``closed_form_disc``: K(z, w) = R^2 / (pi (R^2 - z conj(w))^2) on a disc of
  radius R.  The punctured disc has the same kernel (the origin is a
  removable singularity for square-integrable holomorphic functions, so the
  two Bergman spaces coincide).
- ``annulus_series``: on r < |z| < 1 the kernel is
  -1/(2 pi z conj(w) log r) + (1/(pi z conj(w))) Sum_{k != 0} k (z conj(w))^k / (1 - r^{2k});
  the discarded tail is bounded by explicit geometric series and the bound is
  verified before a value is returned.
- ``basis_series``: K(z, w) = Sum_n z^n conj(w)^n / ||w^n||^2 over a finite
  exponent window, with the squared norms measured by quadrature (monomials
  are orthogonal on radial domains).

Every model also carries the exponent window and squared norms, which define
the orthonormal basis e_n(w) = w^n / ||w^n|| used by the operator machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import DomainSpec, DomainError, contains, inside, is_subdomain
from .quadrature import QuadratureGrid, monomial_radial_integral

_SERIES_TOL = 1e-12
_SERIES_MAX_TERMS = 200_000
_ZERO_TOL_FACTOR = 1e-14

REPRESENTATIONS = ("closed_form_disc", "annulus_series", "basis_series")


class ZeroSetError(ArithmeticError):
    """Raised when K(z, z) is below the model's zero tolerance.

    On the bounded radial domains supported here the kernel diagonal is
    strictly positive, so this signals numerical degeneracy rather than a
    genuine kernel zero.
    """


class KernelError(ValueError):
    """Raised for invalid kernel evaluations or insufficient truncation."""


def disc_kernel(radius: float, z, w) -> complex | np.ndarray:
    """Closed-form Bergman kernel of a disc of the given radius."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(z) >= radius) or np.any(np.abs(w) >= radius):
        raise DomainError(f"kernel arguments must lie strictly inside |z| < {radius}")
    r2 = radius * radius
    out = r2 / (np.pi * (r2 - z * np.conj(w)) ** 2)
    return out if out.ndim else complex(out)


def _geom_tail(q: float, m: int) -> float:
    # Sum_{k > m} k q^k for 0 <= q < 1
    if q <= 0.0:
        return 0.0
    return q ** (m + 1) * ((m + 1) * (1.0 - q) + q) / (1.0 - q) ** 2


def annulus_series_tail_bound(r: float, zw_abs: float, m: int) -> float:
    """Bound on the modulus of the annulus-kernel series tail beyond degree m."""
    q_pos = zw_abs
    q_neg = r * r / zw_abs
    return (_geom_tail(q_pos, m) + _geom_tail(q_neg, m)) / (np.pi * zw_abs * (1.0 - r * r))


def annulus_kernel(r: float, z, w, truncation: int | None = None, tol: float = _SERIES_TOL):
    """Bergman kernel of the annulus r < |z| < 1 via its Laurent series.

    ``truncation`` fixes the number of retained terms per sign; when omitted
    it is grown until the verified tail bound drops below ``tol``.  A
    truncation too small for the requested tolerance raises KernelError.
    """
    if not 0.0 < r < 1.0:
        raise DomainError(f"annulus inner radius must be in (0, 1), got {r}")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    for name, v in (("z", z), ("w", w)):
        a = np.abs(v)
        if np.any(a <= r) or np.any(a >= 1.0):
            raise DomainError(f"annulus kernel argument {name} outside {r} < |.| < 1")
    zw = z * np.conj(w)
    q_worst = float(np.max(np.abs(zw)))
    q_neg_worst = float(r * r / np.min(np.abs(zw)))

    def bound(m: int) -> float:
        return (_geom_tail(q_worst, m) + _geom_tail(q_neg_worst, m)) / (
            np.pi * float(np.min(np.abs(zw))) * (1.0 - r * r)
        )

    if truncation is None:
        m = 32
        while bound(m) > tol:
            m *= 2
            if m > _SERIES_MAX_TERMS:
                raise KernelError(
                    f"annulus series does not reach tolerance {tol} within "
                    f"{_SERIES_MAX_TERMS} terms (|z conj(w)| up to {q_worst})"
                )
    else:
        m = int(truncation)
        if bound(m) > tol:
            raise KernelError(
                f"truncation {m} insufficient: tail bound {bound(m):.3e} exceeds {tol}"
            )

    log_r = np.log(r)
    total = np.zeros(np.broadcast(z, w).shape, dtype=complex)
    pos = np.ones_like(total)
    neg = np.ones_like(total)
    zw_b = np.broadcast_to(zw, total.shape)
    inv = (r * r) / zw_b
    for k in range(1, m + 1):
        pos = pos * zw_b
        neg = neg * inv
        denom = 1.0 - r ** (2 * k)
        total += k * (pos + neg) / denom
    out = -1.0 / (2.0 * np.pi * zw * log_r) + total / (np.pi * zw)
    return out if out.ndim else complex(out)


def norm_sq_exact(domain: DomainSpec, n) -> np.ndarray:
    """Closed-form squared L^2 norm of w^n on the domain (2 pi radial moment)."""
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    out = np.array(
        [2.0 * np.pi * monomial_radial_integral(domain.r_inner, domain.r_outer, int(k)) for k in ns]
    )
    return out if np.ndim(n) else float(out[0])


def basis_exponents(domain: DomainSpec, max_degree: int) -> np.ndarray:
    """Monomial exponents carried by A^2: n >= 0, plus negative n on annuli."""
    if domain.kind == "annulus":
        return np.arange(-max_degree, max_degree + 1)
    return np.arange(0, max_degree + 1)


@dataclass(frozen=True, eq=False)
class KernelModel:
    """An evaluable Bergman-kernel representation with its basis data."""

    domain: DomainSpec
    representation: str
    exponents: np.ndarray = field(repr=False)
    norms_sq: np.ndarray = field(repr=False)
    truncation: int
    zero_tolerance: float

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise KernelError(f"unknown representation {self.representation!r}")
        if np.any(self.norms_sq <= 0) or not np.all(np.isfinite(self.norms_sq)):
            raise KernelError("basis norms must be positive and finite")
        if self.zero_tolerance <= 0:
            raise KernelError("zero_tolerance must be positive")

    # -- evaluation ---------------------------------------------------------

    def eval(self, z, w):
        """K(z, w); either argument may be an array (broadcasting)."""
        if self.representation == "closed_form_disc":
            return disc_kernel(self.domain.r_outer, z, w)
        if self.representation == "annulus_series":
            return annulus_kernel(self.domain.r_inner, z, w)
        zc = np.asarray(z, dtype=complex)
        wc = np.asarray(w, dtype=complex)
        if np.any(~inside(self.domain, zc)) or np.any(~inside(self.domain, wc)):
            raise DomainError(f"kernel arguments outside {self.domain}")
        zw = zc * np.conj(wc)
        out = np.zeros(np.broadcast(zc, wc).shape, dtype=complex)
        zw_b = np.broadcast_to(zw, out.shape)
        for n, nu in zip(self.exponents, self.norms_sq):
            out += zw_b ** int(n) / nu
        return out if out.ndim else complex(out)

    def diag(self, z):
        """K(z, z) as a real value (array-compatible)."""
        out = np.real(self.eval(z, z))
        return out if np.ndim(out) else float(out)

    def diag_checked(self, z) -> float:
        val = self.diag(z)
        if np.any(np.asarray(val) <= self.zero_tolerance):
            raise ZeroSetError(
                f"K(z, z) <= zero tolerance {self.zero_tolerance:.3e} at z = {z}"
            )
        return val


def kernel_from_basis(domain: DomainSpec, max_degree: int, grid: QuadratureGrid) -> KernelModel:
    """Basis-series model with squared norms measured on the grid."""
    if max_degree < 1:
        raise KernelError("max_degree must be at least 1")
    if grid.domain != domain:
        raise KernelError(f"grid belongs to {grid.domain}, not {domain}")
    if domain.kind == "annulus" and 2 * max_degree * np.log10(1.0 / domain.r_inner) > 300:
        raise KernelError(
            "negative-exponent norms overflow at this degree; use the series representation"
        )
    exps = basis_exponents(domain, max_degree)
    sq = np.abs(grid.nodes) ** 2
    norms = np.empty(exps.size)
    for i, n in enumerate(exps):
        norms[i] = float(np.sum(grid.weights * sq ** int(n)))
    model = KernelModel(
        domain,
        "basis_series",
        exps,
        norms,
        int(max_degree),
        _default_zero_tolerance(domain),
    )
    return model


def _default_zero_tolerance(domain: DomainSpec) -> float:
    z_ref = 0.5 * (domain.r_inner + domain.r_outer)
    scale = float(np.real(disc_kernel(domain.r_outer, z_ref, z_ref))) if domain.kind != "annulus" else None
    if scale is None:
        # crude but positive reference: constant-function bound 1/area
        scale = 1.0 / domain.area
    return _ZERO_TOL_FACTOR * scale


def model_for(domain: DomainSpec, max_degree: int = 64, zero_tolerance: float | None = None) -> KernelModel:
    """Preferred model per domain kind: closed form on (punctured) discs,
    the Laurent series on annuli with outer radius 1, a basis series otherwise.
    Basis norms use the exact radial moments."""
    exps = basis_exponents(domain, max_degree)
    if domain.kind == "annulus" and 0.0 < domain.r_inner < 1.0:
        # negative-exponent norms grow like r_inner^{2n+2}; trim the window
        # to representable magnitudes (the trimmed coefficients are far below
        # round-off at any evaluation radius anyway)
        cap = int(140.0 / np.log10(1.0 / domain.r_inner)) + 1
        exps = exps[exps >= -min(max_degree, max(1, cap))]
    norms = norm_sq_exact(domain, exps)
    if domain.kind in ("disc", "punctured_disc"):
        rep = "closed_form_disc"
    elif domain.r_outer == 1.0:
        rep = "annulus_series"
    else:
        rep = "basis_series"
    tol = zero_tolerance if zero_tolerance is not None else _default_zero_tolerance(domain)
    return KernelModel(domain, rep, exps, np.asarray(norms), int(max_degree), tol)


def normalized_coefficients(model: KernelModel, zs, exponents: np.ndarray | None = None) -> np.ndarray:
    """Rows of basis coefficients of k_z: c_n(z) = conj(z)^n / (||w^n|| sqrt(K(z,z))).

    ``zs`` may be a scalar or 1-D array; the result has one row per point.
    Raises ZeroSetError if any diagonal falls below the zero tolerance.
    """
    zv = np.atleast_1d(np.asarray(zs, dtype=complex))
    if exponents is None:
        exponents = model.exponents
        norms = model.norms_sq
    else:
        idx = _window_indices(model, exponents)
        norms = model.norms_sq[idx]
    diag = np.atleast_1d(model.diag(zv))
    if np.any(diag <= model.zero_tolerance):
        raise ZeroSetError("normalized kernel undefined: K(z, z) at zero tolerance")
    zc = np.conj(zv)[:, None] ** exponents[None, :]
    return zc / np.sqrt(norms)[None, :] / np.sqrt(diag)[:, None]


def _window_indices(model: KernelModel, exponents: np.ndarray) -> np.ndarray:
    pos = {int(n): i for i, n in enumerate(model.exponents)}
    try:
        return np.asarray([pos[int(n)] for n in exponents])
    except KeyError as exc:
        raise KernelError(f"exponent {exc} outside the model window") from exc


def normalized_kernel(model: KernelModel, z):
    """The unit vector k_z as a callable, plus its basis coefficient vector."""
    if not contains(model.domain, z):
        raise DomainError(f"{z} outside {model.domain}")
    kzz = model.diag_checked(z)
    root = np.sqrt(kzz)

    def k_z(w):
        return model.eval(w, z) / root

    coeffs = normalized_coefficients(model, z)[0]
    return k_z, coeffs


def diag_ratio(model_u: KernelModel, model_omega: KernelModel, z) -> float:
    """K^U(z, z) / K^Omega(z, z) for z in U, a subdomain of Omega; always >= 1."""
    if not is_subdomain(model_u.domain, model_omega.domain):
        raise DomainError(f"{model_u.domain} is not a subdomain of {model_omega.domain}")
    if not contains(model_u.domain, z):
        raise DomainError(f"{z} outside {model_u.domain}")
    denom = model_omega.diag_checked(z)
    return float(model_u.diag(z) / denom)

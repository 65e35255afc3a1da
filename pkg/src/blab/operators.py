"""Toeplitz matrices, operator words, restriction operators, and Berezin transforms.

Matrix conventions: with the orthonormal monomial basis e_n(w) = w^n / ||w^n||
of A^2 on a radial domain, an operator T is truncated to entries
M[m, n] = <T e_n, e_m>, so compositions multiply in writing order
(T S -> M_T @ M_S) and the Berezin transform is the quadratic form
B T(z) = c(z)* M c(z) with c(z) the normalized-kernel coefficient vector.

Quadrature policy: radial symbols reduce to 1-D radial integrals (exact
piecewise const/log profiles are integrated in closed form, anything else by
a graded panel rule whose panels align with the profile's kinks).  The Green
symbol G_a = log|psi_a| carries an interior log pole; on a disc its integrals
are computed on the image of an origin-graded grid under the disc
automorphism swapping a and 0, which places the pole at the grid's graded
center.  The pulled-back grid is an ordinary QuadratureGrid, so all
downstream code is oblivious to the substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import DomainSpec, DomainError, contains, inside, is_subdomain
from .kernels import (
    KernelModel,
    KernelError,
    normalized_coefficients,
)
from .quadrature import QuadratureGrid, QuadratureError, build_polar_grid, radial_rule
from .symbols import Clamp, Const, Green, LogAbs, OperatorWord, SymbolExpr

__all__ = [
    "OperatorMatrix",
    "BerezinField",
    "mobius",
    "green",
    "poisson_kernel",
    "poisson_square_mean",
    "grid_for_symbol",
    "green_adapted_grid",
    "toeplitz_matrix",
    "word_matrix",
    "berezin_of_operator",
    "berezin_of_symbol",
    "berezin_values",
    "berezin_field",
    "berezin_radial",
    "berezin_log_abs_annulus",
    "radial_toeplitz_diagonal",
    "restriction_apply",
    "restriction_adjoint_apply",
    "cross_gram",
    "compressed_operator",
    "truncated_exponents",
    "basis_columns",
]


# ---------------------------------------------------------------------------
# classical functions on the unit disc
# ---------------------------------------------------------------------------

def mobius(a: complex, z):
    """psi_a(z) = (a - z) / (1 - conj(a) z), the disc involution swapping 0 and a."""
    if abs(a) >= 1.0:
        raise DomainError(f"mobius parameter must satisfy |a| < 1, got {a}")
    z = np.asarray(z, dtype=complex)
    out = (a - z) / (1.0 - np.conj(a) * z)
    return out if out.ndim else complex(out)


def green(a: complex, z):
    """G_a(z) = log|psi_a(z)|; returns -inf at the pole z = a."""
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(mobius(a, z)))
    return out if np.ndim(out) else float(out)


def poisson_kernel(z: complex, zeta: complex) -> float:
    """P(z, zeta) = (1 - |z|^2) / |zeta - z|^2 for |z| < 1, |zeta| = 1."""
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise DomainError(f"poisson kernel needs |zeta| = 1, got |zeta| = {abs(zeta)}")
    if abs(z) >= 1.0:
        raise DomainError(f"poisson kernel needs |z| < 1, got {abs(z)}")
    return (1.0 - abs(z) ** 2) / abs(zeta - z) ** 2


def poisson_square_mean(s: float, z: complex, n_angular: int = 512) -> float:
    """Trapezoid angular mean of P(s z, e^{it})^2; spectrally exact here."""
    if not 0.0 < s < 1.0:
        raise DomainError(f"scaling factor must be in (0, 1), got {s}")
    if abs(z) >= 1.0:
        raise DomainError(f"need |z| < 1, got {abs(z)}")
    x = s * z
    zeta = np.exp(2j * np.pi * np.arange(n_angular) / n_angular)
    p = (1.0 - abs(x) ** 2) / np.abs(zeta - x) ** 2
    return float(np.mean(p**2))


# ---------------------------------------------------------------------------
# symbol-adapted quadrature grids
# ---------------------------------------------------------------------------

def green_adapted_grid(
    domain: DomainSpec, a: complex, n_radial: int = 96, n_angular: int = 256
) -> QuadratureGrid:
    """Grid on a disc pulled back through the automorphism swapping ``a`` and 0.

    The map w(u) = R^2 (a - u) / (R^2 - conj(a) u) fixes the disc of radius R
    and sends 0 to a, so an integrand with a log pole at ``a`` becomes
    log|u| + smooth on the base grid, which is graded toward the origin.
    Weights carry |w'(u)|^2; the result is a plain QuadratureGrid.
    """
    if domain.kind == "annulus":
        raise DomainError("the adapted grid applies to discs only")
    R = domain.r_outer
    if abs(a) >= R:
        raise DomainError(f"pole {a} not inside {domain}")
    base = build_polar_grid(domain, n_radial, n_angular, graded=True)
    r2 = R * R
    denom = r2 - np.conj(a) * base.nodes
    image = r2 * (a - base.nodes) / denom
    jac_sq = np.abs(r2 * (abs(a) ** 2 - r2) / denom**2) ** 2
    return QuadratureGrid(domain, image, base.weights * jac_sq, base.n_radial, base.n_angular)


def grid_for_symbol(
    domain: DomainSpec, symbol: SymbolExpr, n_radial: int = 96, n_angular: int = 256
) -> QuadratureGrid:
    """Quadrature grid adequate for integrals of ``symbol`` against smooth factors."""
    pole = symbol.pole
    if pole is not None and contains(domain, pole):
        if domain.kind != "annulus":
            return green_adapted_grid(domain, pole, n_radial, n_angular)
        # fallback on annuli: panels refined toward the pole circle plus
        # angular oversampling against the log spike
        pa = abs(pole)
        cuts = [pa * (1.0 + s * 2.0**-k) for k in range(1, 11) for s in (-1.0, 1.0)]
        cuts.append(pa)
        return build_polar_grid(
            domain,
            n_radial,
            max(n_angular, 1024),
            graded=True,
            breakpoints=tuple(cuts),
        )
    graded = symbol.singular_at_origin
    return build_polar_grid(
        domain,
        n_radial,
        n_angular,
        graded=graded,
        breakpoints=symbol.radial_breakpoints(domain),
    )


# ---------------------------------------------------------------------------
# truncated operator matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense truncation M[m, n] = <T e_n, e_m> over an exponent window."""

    domain: DomainSpec
    exponents: np.ndarray = field(repr=False)
    entries: np.ndarray = field(repr=False)
    truncation: int
    label: str = ""

    def __post_init__(self):
        n = self.exponents.size
        if self.entries.shape != (n, n):
            raise KernelError("entries must be square over the exponent window")

    def norm(self) -> float:
        """Largest singular value of the truncated matrix."""
        return float(np.linalg.norm(self.entries, 2))

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.domain != other.domain or not np.array_equal(self.exponents, other.exponents):
            raise KernelError("operator matrices live on different bases")
        return OperatorMatrix(
            self.domain,
            self.exponents,
            self.entries @ other.entries,
            self.truncation,
            f"{self.label}*{other.label}",
        )


def truncated_exponents(model: KernelModel, truncation: int) -> np.ndarray:
    """First ``truncation`` basis exponents: 0..N-1 on discs, a window centered
    just below zero on annuli ([-N/2, N/2) )."""
    if truncation < 1:
        raise KernelError("truncation must be at least 1")
    if model.domain.kind == "annulus":
        lo = -(truncation // 2)
        exps = np.arange(lo, lo + truncation)
    else:
        exps = np.arange(truncation)
    if exps.min() < model.exponents.min() or exps.max() > model.exponents.max():
        raise KernelError(
            f"truncation {truncation} exceeds the model window "
            f"[{model.exponents.min()}, {model.exponents.max()}]"
        )
    return exps


def basis_columns(model: KernelModel, nodes: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Vandermonde-type matrix V[i, k] = e_{n_k}(nodes[i])."""
    idx = {int(n): i for i, n in enumerate(model.exponents)}
    cols = np.empty((nodes.size, exponents.size), dtype=complex)
    for k, n in enumerate(exponents):
        nu = model.norms_sq[idx[int(n)]]
        cols[:, k] = nodes ** int(n) / math.sqrt(nu)
    return cols


# -- radial diagonal path ----------------------------------------------------

def _log_const_pieces(domain: DomainSpec, symbol: SymbolExpr):
    """Decompose a radial profile into (a, b, kind, value) pieces with
    kind in {const, log}, or return None when not exactly representable."""
    r, R = domain.r_inner, domain.r_outer
    if isinstance(symbol, Const):
        return [(r, R, "const", complex(symbol.value))]
    if isinstance(symbol, LogAbs):
        return [(r, R, "log", 1.0)]
    if isinstance(symbol, Clamp) and isinstance(symbol.inner, LogAbs):
        k = symbol.level
        lo, hi = math.exp(-k), math.exp(k)
        pieces = []
        if r < min(lo, R):
            pieces.append((r, min(lo, R), "const", -k))
        if max(lo, r) < min(hi, R):
            pieces.append((max(lo, r), min(hi, R), "log", 1.0))
        if max(hi, r) < R:
            pieces.append((max(hi, r), R, "const", k))
        return pieces
    return None


def _lambda_exact(domain: DomainSpec, pieces, n: int) -> complex:
    """<phi e_n, e_n> for a piecewise const/log radial profile, stably for any n."""
    r, R = domain.r_inner, domain.r_outer
    e = 2 * n + 2
    if e == 0:
        J = math.log(R / r)
        I = 0.0
        for a, b, kind, v in pieces:
            if kind == "const":
                I += v * math.log(b / a)
            else:
                I += v * (math.log(b) ** 2 - math.log(a) ** 2) / 2.0
        return I / J

    logc = math.log(R) if e > 0 else math.log(r)

    def t(x: float) -> float:
        if x == 0.0:
            return 0.0
        return math.exp(e * (math.log(x) - logc))

    def f_log(x: float) -> float:
        if x == 0.0:
            return 0.0
        return t(x) * (e * math.log(x) - 1.0) / (e * e)

    J = (t(R) - t(r)) / e
    I = 0.0
    for a, b, kind, v in pieces:
        if kind == "const":
            I += v * (t(b) - t(a)) / e
        else:
            I += v * (f_log(b) - f_log(a))
    return I / J


def radial_toeplitz_diagonal(
    domain: DomainSpec,
    symbol: SymbolExpr,
    exponents: np.ndarray,
    n_radial: int = 96,
) -> np.ndarray:
    """Diagonal entries <phi e_n, e_n> of a radial symbol's Toeplitz matrix.

    Piecewise const/log profiles (const, log|w|, clamped log) are integrated
    in closed form; other radial profiles fall back to a graded 1-D rule with
    panels aligned to the profile's kinks, evaluated as the ratio
    integral(phi rho^{2n+1}) / integral(rho^{2n+1}) in a scale-free form.
    """
    if not symbol.is_radial:
        raise KernelError(f"{symbol} is not radial")
    pieces = _log_const_pieces(domain, symbol)
    if pieces is not None:
        return np.asarray([_lambda_exact(domain, pieces, int(n)) for n in exponents])
    rho, w = radial_rule(
        domain,
        n_radial,
        graded=symbol.singular_at_origin or domain.kind == "annulus",
        breakpoints=symbol.radial_breakpoints(domain),
    )
    prof = np.asarray(symbol.radial_profile(rho))
    logr = np.log(rho)
    out = np.empty(exponents.size, dtype=complex)
    for i, n in enumerate(exponents):
        e = 2 * int(n)
        ref = logr.max() if e >= 0 else logr.min()
        g = np.exp(e * (logr - ref))
        den = float(np.sum(w * g))
        out[i] = np.sum(w * g * prof) / den
    return out


def toeplitz_matrix(
    model: KernelModel,
    symbol: SymbolExpr,
    grid: QuadratureGrid | None = None,
    truncation: int = 48,
    n_radial: int = 96,
    n_angular: int = 256,
) -> OperatorMatrix:
    """Truncated Toeplitz matrix of ``symbol`` on the model's domain.

    With an explicit ``grid`` the entries are the 2-D quadrature inner
    products <phi e_n, e_m> on it.  Without one, radial symbols use the exact
    1-D diagonal reduction and other symbols get a symbol-adapted grid.
    """
    exps = truncated_exponents(model, truncation)
    label = str(symbol)
    if grid is None and symbol.is_radial:
        lam = radial_toeplitz_diagonal(model.domain, symbol, exps, n_radial)
        return OperatorMatrix(model.domain, exps, np.diag(lam.astype(complex)), truncation, label)
    if grid is None:
        grid = grid_for_symbol(model.domain, symbol, n_radial, n_angular)
    elif grid.domain != model.domain:
        raise QuadratureError(f"grid on {grid.domain} does not match {model.domain}")
    vals = np.asarray(symbol(grid.nodes))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"symbol {label} is non-finite at a quadrature node")
    v = basis_columns(model, grid.nodes, exps)
    entries = (v.conj().T * (grid.weights * vals)[None, :]) @ v
    return OperatorMatrix(model.domain, exps, entries, truncation, label)


def word_matrix(
    model: KernelModel,
    word: OperatorWord,
    grid: QuadratureGrid | None = None,
    truncation: int = 48,
    n_radial: int = 96,
    n_angular: int = 256,
) -> OperatorMatrix:
    """Sum over word terms of the ordered products of factor Toeplitz matrices."""
    exps = truncated_exponents(model, truncation)
    total = np.zeros((exps.size, exps.size), dtype=complex)
    for term in word.terms:
        prod = np.eye(exps.size, dtype=complex)
        for factor in term:
            m = toeplitz_matrix(model, factor, grid, truncation, n_radial, n_angular)
            prod = prod @ m.entries
        total += prod
    return OperatorMatrix(model.domain, exps, total, truncation, str(word))


# ---------------------------------------------------------------------------
# Berezin transforms
# ---------------------------------------------------------------------------

def berezin_of_operator(matrix: OperatorMatrix, model: KernelModel, z) -> complex:
    """B T(z) = <T k_z, k_z> = c(z)* M c(z)."""
    c = normalized_coefficients(model, z, matrix.exponents)[0]
    return complex(c.conj() @ matrix.entries @ c)


def berezin_values(matrix: OperatorMatrix, model: KernelModel, zs) -> np.ndarray:
    """Vectorized Berezin transform of a matrix over an array of points."""
    c = normalized_coefficients(model, zs, matrix.exponents)
    return np.einsum("in,nm,im->i", c.conj(), matrix.entries, c)


@dataclass(frozen=True, eq=False)
class BerezinField:
    """Berezin-transform samples, optionally extended by zero outside a subdomain."""

    label: str
    domain: DomainSpec
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    extended: bool = False


def berezin_field(
    matrix: OperatorMatrix,
    model: KernelModel,
    points,
    ambient: DomainSpec | None = None,
) -> BerezinField:
    """Sample B T on ``points``; with ``ambient`` given, points of the ambient
    domain outside the operator's domain get the value 0 (extension by zero)."""
    pts = np.asarray(points, dtype=complex)
    if ambient is None:
        return BerezinField(matrix.label, matrix.domain, pts, berezin_values(matrix, model, pts))
    if not is_subdomain(matrix.domain, ambient):
        raise DomainError(f"{matrix.domain} is not a subdomain of {ambient}")
    mask = inside(matrix.domain, pts)
    vals = np.zeros(pts.shape, dtype=complex)
    if np.any(mask):
        vals[mask] = berezin_values(matrix, model, pts[mask])
    return BerezinField(matrix.label, ambient, pts, vals, extended=True)


def berezin_of_symbol(model: KernelModel, symbol: SymbolExpr, grid: QuadratureGrid | None, z) -> complex:
    """Direct quadrature of integral phi |k_z|^2 dV: the truncation-free oracle."""
    if grid is None:
        grid = grid_for_symbol(model.domain, symbol)
    elif grid.domain != model.domain:
        raise QuadratureError(f"grid on {grid.domain} does not match {model.domain}")
    kzz = model.diag_checked(z)
    kz_sq = np.abs(model.eval(grid.nodes, z)) ** 2 / kzz
    vals = np.asarray(symbol(grid.nodes))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"symbol {symbol} non-finite at a quadrature node")
    return complex(np.sum(grid.weights * vals * kz_sq))


def _log_norm_sq(domain: DomainSpec, n: int) -> float:
    """log ||w^n||^2 in a form stable for any window and tiny inner radii."""
    r, R = domain.r_inner, domain.r_outer
    e = 2 * n + 2
    if e == 0:
        return math.log(2 * math.pi * math.log(R / r))
    if e > 0:
        ratio = 0.0 if r == 0.0 else math.exp(e * (math.log(r) - math.log(R)))
        return math.log(2 * math.pi / e) + e * math.log(R) + math.log1p(-ratio)
    ratio = math.exp(-e * (math.log(r) - math.log(R)))
    return math.log(2 * math.pi / -e) + e * math.log(r) + math.log1p(-ratio)


def berezin_radial(
    domain: DomainSpec,
    symbol: SymbolExpr,
    z_abs,
    n_pos: int = 320,
    n_neg: int = 64,
    n_radial: int = 96,
) -> np.ndarray:
    """Berezin transform of a radial symbol at radii ``z_abs`` via the diagonal
    reduction B(z) = (sum_n lambda_n |z|^{2n} / nu_n) / (sum_n |z|^{2n} / nu_n).

    Works in log space, so arbitrarily thin annuli are handled.  The window
    [-n_neg, n_pos) must cover the coefficient decay at the evaluation radii
    (|z| <= 0.95 with the defaults).
    """
    if not symbol.is_radial:
        raise KernelError(f"{symbol} is not radial")
    za = np.atleast_1d(np.asarray(z_abs, dtype=float))
    if np.any(za <= domain.r_inner) or np.any(za >= domain.r_outer):
        raise DomainError("evaluation radii must lie strictly inside the domain")
    lo = -n_neg if domain.kind == "annulus" else 0
    exps = np.arange(lo, n_pos)
    lam = radial_toeplitz_diagonal(domain, symbol, exps, n_radial)
    log_nu = np.asarray([_log_norm_sq(domain, int(n)) for n in exps])
    logz = np.log(za)
    t = np.exp(2.0 * exps[None, :] * logz[:, None] - log_nu[None, :])
    num = t @ lam
    den = t.sum(axis=1)
    out = num / den
    return out if np.ndim(z_abs) else complex(out[0])


def berezin_log_abs_annulus(r: float, z_abs, terms: int = 64) -> np.ndarray:
    """B_{A_r} log|.| on the annulus r < |z| < 1, exactly, at radii ``z_abs``.

    Uses closed geometric resummations of the diagonal series (expansion in
    powers of s = r^2), so it is accurate uniformly up to both edges; the
    truncation-free reference for the shrinking-annulus experiments.
    """
    x = np.atleast_1d(np.asarray(z_abs, dtype=float)) ** 2
    s = r * r
    L = math.log(1.0 / r)
    kp = np.zeros_like(x)
    npos = np.zeros_like(x)
    for q in range(terms):
        sq = s**q
        if sq == 0.0:
            break
        g = x * sq
        kp += sq / (1.0 - g) ** 2
        npos += -(q + 1) * sq / (1.0 - g)
        if q >= 1:
            npos += q * sq * (2.0 * L / (1.0 - g) ** 2 + 1.0 / (1.0 - g))
    kp /= math.pi
    npos /= 2.0 * math.pi
    k1 = 1.0 / (2.0 * math.pi * L * x)
    n1 = -1.0 / (4.0 * math.pi * x)
    km = np.zeros_like(x)
    nm = np.zeros_like(x)
    for q in range(terms):
        sq1 = s ** (q + 1)
        if sq1 == 0.0:
            break
        km += sq1 / (x - sq1) ** 2
        if q >= 1:
            sq = s**q
            h, h2 = sq / x, sq1 / x
            nm += q * ((sq / x**2) / (1 - h) - 2 * L * (sq / x**2) / (1 - h) ** 2 - (sq1 / x**2) / (1 - h2))
    km /= math.pi
    nm /= 2.0 * math.pi
    out = (npos + n1 + nm) / (kp + k1 + km)
    return out if np.ndim(z_abs) else float(out[0])


# ---------------------------------------------------------------------------
# restriction operators
# ---------------------------------------------------------------------------

def restriction_apply(model: KernelModel, coeffs: np.ndarray, subdomain: DomainSpec):
    """f|_U for f = sum c_n e_n on the model's domain: same expression, new tag."""
    if not is_subdomain(subdomain, model.domain):
        raise DomainError(f"{subdomain} is not a subdomain of {model.domain}")
    coeffs = np.asarray(coeffs, dtype=complex)
    exps = model.exponents[: coeffs.size]

    def f(w):
        w = np.asarray(w, dtype=complex)
        if not np.all(inside(subdomain, w)):
            raise DomainError(f"evaluation point outside {subdomain}")
        v = basis_columns(model, np.atleast_1d(w).ravel(), exps)
        out = (v @ coeffs).reshape(np.atleast_1d(w).shape)
        return out if np.ndim(w) else complex(out[0])

    return f


def restriction_adjoint_apply(
    model_omega: KernelModel,
    grid_u: QuadratureGrid,
    f,
    exponents: np.ndarray | None = None,
) -> np.ndarray:
    """Coefficients of R_U^* f on the ambient basis: c_m = <f, e_m>_{L^2(U)}.

    Valid because R_U^* = (Bergman projection) o (extension by zero), whose
    basis coefficients are exactly these integrals over U.
    """
    if not is_subdomain(grid_u.domain, model_omega.domain):
        raise DomainError(f"{grid_u.domain} is not a subdomain of {model_omega.domain}")
    exps = model_omega.exponents if exponents is None else exponents
    vals = np.asarray(f(grid_u.nodes) if callable(f) else f)
    v = basis_columns(model_omega, grid_u.nodes, exps)
    return v.conj().T @ (grid_u.weights * vals)


def cross_gram(
    model_u: KernelModel,
    model_omega: KernelModel,
    grid_u: QuadratureGrid,
    exps_u: np.ndarray,
    exps_omega: np.ndarray,
) -> np.ndarray:
    """A[m, n] = <e_n^U, e_m^Omega>_{L^2(U)}: the matrix of R_U^* in the bases."""
    if grid_u.domain != model_u.domain:
        raise QuadratureError(f"grid on {grid_u.domain} does not match {model_u.domain}")
    vu = basis_columns(model_u, grid_u.nodes, exps_u)
    vo = basis_columns(model_omega, grid_u.nodes, exps_omega)
    return vo.conj().T @ (grid_u.weights[:, None] * vu)


def compressed_operator(
    matrix: OperatorMatrix,
    model_omega: KernelModel,
    model_u: KernelModel,
    grid_u: QuadratureGrid | None = None,
    truncation: int | None = None,
    n_radial: int = 96,
    n_angular: int = 256,
) -> OperatorMatrix:
    """Matrix of R_U T R_U^* on A^2(U), entries through ambient coefficients."""
    n = matrix.truncation if truncation is None else truncation
    exps_u = truncated_exponents(model_u, n)
    if grid_u is None:
        grid_u = build_polar_grid(model_u.domain, n_radial, n_angular)
    a = cross_gram(model_u, model_omega, grid_u, exps_u, matrix.exponents)
    entries = a.conj().T @ matrix.entries @ a
    return OperatorMatrix(
        model_u.domain, exps_u, entries, n, f"R({matrix.label})R*"
    )

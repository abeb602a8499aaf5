"""Wall damping functions beta(z) for the Smagorinsky eddy viscosity.

Five profile kinds are supported:

``constant``
    beta(z) = value (1 by default, 0 switches the model off).
``van-driest-exact``
    1 - exp(-z+/A+) measured from the moving lid, with the equilibrium
    friction-velocity estimate u_tau = U / 2**(1/4).
``algebraic``
    Re**alpha (z/L)**alpha near z = 0, Re**alpha (1 - z/L)**alpha near z = L
    and 1 in between (the "beta_w" profile).
``hermite``
    (z/L)**alpha (1 - z/L)**alpha in the two gamma*L strips, 1 in the core and
    C1 cubic blends over [gamma L, 2 gamma L] and [L - 2 gamma L, L - gamma L]
    (the "beta_d" profile).
``tabulated``
    piecewise-linear interpolation of user samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .core import DomainParams
from .exceptions import DomainError, IntegrationError, OverlapError, ParameterError, ValidityError

A_PLUS = 26.0
KINDS = ("constant", "van-driest-exact", "algebraic", "hermite", "tabulated")
_ALIASES = {
    "constant-one": "constant",
    "one": "constant",
    "beta_w": "algebraic",
    "van-driest-algebraic": "algebraic",
    "beta_d": "hermite",
    "van-driest": "van-driest-exact",
}
# slack for faces computed as k * L / n
_Z_SLACK = 1e-12


@dataclass(frozen=True)
class HermiteCoefficients:
    """Coefficients of the two cubic blends of the hermite profile.

    First blend: a1 s^3 + b1 s^2 + c1 s + d1 with s = z - gamma L.
    Second blend: a2 s^3 + b2 s^2 + 1 with s = z + 2 gamma L - L.
    ``printed`` holds the closed-form values, ``discrepancy`` the largest
    relative difference between them and the solved ones.
    """

    a1: float
    b1: float
    c1: float
    d1: float
    a2: float
    b2: float
    printed: dict = field(default_factory=dict, compare=False)
    discrepancy: float = 0.0


@dataclass(frozen=True)
class DampingProfile:
    kind: str = "constant"
    alpha: int = 0
    value: float = 1.0
    coeffs: HermiteCoefficients | None = None
    table: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ParameterError(f"unknown damping kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if int(self.alpha) != self.alpha or self.alpha < 0:
            raise ParameterError(f"alpha must be a nonnegative integer, got {self.alpha!r}")
        object.__setattr__(self, "alpha", int(self.alpha))
        if kind == "constant" and (not math.isfinite(self.value) or self.value < 0):
            raise ParameterError("constant damping must be finite and nonnegative")
        if kind == "tabulated":
            if self.table is None:
                raise ParameterError("tabulated profile needs a (z, beta) table")
            z, b = (np.asarray(a, dtype=float) for a in self.table)
            _check_table(z, b)
            object.__setattr__(self, "table", (z, b))

    @property
    def label(self) -> str:
        if self.kind in ("algebraic", "hermite"):
            return f"{self.kind}(alpha={self.alpha})"
        if self.kind == "constant":
            return f"constant({self.value:g})"
        return self.kind

    def __call__(self, z, domain: DomainParams):
        return eval_beta(self, z, domain)


def constant(value: float = 1.0) -> DampingProfile:
    return DampingProfile("constant", value=value)


def van_driest() -> DampingProfile:
    return DampingProfile("van-driest-exact")


def algebraic(alpha: int = 2) -> DampingProfile:
    return DampingProfile("algebraic", alpha=alpha)


def hermite(alpha: int = 2, coeffs: HermiteCoefficients | None = None) -> DampingProfile:
    return DampingProfile("hermite", alpha=alpha, coeffs=coeffs)


def tabulated(z, beta) -> DampingProfile:
    return DampingProfile("tabulated", table=(np.asarray(z, float), np.asarray(beta, float)))


def _check_table(z, b):
    if z.ndim != 1 or z.shape != b.shape or z.size < 2:
        raise ParameterError("table needs two equal-length 1-D columns with at least two rows")
    if np.any(np.diff(z) <= 0):
        raise ParameterError("table z values must be strictly increasing")
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise ParameterError("table beta values must be finite and nonnegative")


def load_table(path, domain: DomainParams | None = None) -> DampingProfile:
    """Read a whitespace-separated two-column ``z beta`` file."""
    try:
        data = np.loadtxt(Path(path), ndmin=2)
    except ValueError as exc:
        raise ParameterError(f"{path}: {exc}") from exc
    if data.shape[1] != 2:
        raise ParameterError(f"{path}: expected two columns, found {data.shape[1]}")
    z, b = data[:, 0], data[:, 1]
    if domain is not None and (z[0] < 0 or z[-1] > domain.L):
        raise ParameterError(f"{path}: z samples must lie in [0, {domain.L}]")
    return tabulated(z, b)


def save_table(path, z, beta) -> None:
    np.savetxt(Path(path), np.column_stack([z, beta]), fmt="%.17g")


# ---------------------------------------------------------------------------
# wall scales and the exact van Driest function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WallScales:
    """Near-lid scales from the equilibrium estimate <eps> = U^3/L."""

    u_tau: float
    nu: float
    L: float
    eps_wall: float
    a_plus: float = A_PLUS

    def z_plus(self, z):
        return self.u_tau * (self.L - np.asarray(z, dtype=float)) / self.nu


def wall_scales(domain: DomainParams) -> WallScales:
    # eps_wall ~ U^4 / (2 nu); u_tau = (nu * eps_wall)**(1/4) = U / 2**(1/4)
    eps_wall = 0.5 * domain.U ** 4 / domain.nu
    u_tau = (domain.nu * eps_wall) ** 0.25
    return WallScales(u_tau, domain.nu, domain.L, eps_wall)


def _as_z(z, domain: DomainParams):
    arr = np.asarray(z, dtype=float)
    slack = _Z_SLACK * domain.L
    if np.any(arr < -slack) or np.any(arr > domain.L + slack) or np.any(np.isnan(arr)):
        raise DomainError(f"z must lie in [0, {domain.L}]")
    return np.clip(arr, 0.0, domain.L)


def _van_driest_rate(domain: DomainParams) -> float:
    """Decay rate c in f_w = 1 - exp(-c (L - z))."""
    ws = wall_scales(domain)
    return ws.u_tau / (ws.nu * ws.a_plus)


def van_driest_exact(z, domain: DomainParams):
    """1 - exp(-z+/26) with z+ = u_tau (L - z) / nu."""
    zz = _as_z(z, domain)
    out = -np.expm1(-_van_driest_rate(domain) * (domain.L - zz))
    return float(out) if np.ndim(out) == 0 else out


def taylor_approx_f_w(z, domain: DomainParams, k: int):
    """k-term Taylor polynomial of the van Driest function about the lid.

    Only defined where Re (1 - z/L) < 1.
    """
    if k < 1:
        raise ParameterError("Taylor order k must be >= 1")
    zz = _as_z(z, domain)
    reach = domain.re * (1.0 - zz / domain.L)
    if np.any(reach >= 1.0):
        raise ValidityError("Taylor expansion needs Re (1 - z/L) < 1")
    x = reach / (A_PLUS * 2 ** 0.25)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for n in range(1, k + 1):
        term = term * x / n
        total = total + (-1) ** (n + 1) * term
    return float(total) if np.ndim(total) == 0 else total


# ---------------------------------------------------------------------------
# hermite coefficients
# ---------------------------------------------------------------------------


def printed_hermite_coefficients(gamma: float, alpha: int, L: float = 1.0) -> dict:
    """Closed-form blend coefficients."""
    g, a = gamma, alpha
    one_g = 1.0 - g
    # alpha * gamma**(alpha - k) vanishes identically for alpha = 0
    slope = a * g ** (a - 1) * one_g ** (a - 1) * (1 - 2 * g) if a else 0.0
    a1 = (-2 / (g ** 3 * L ** 3)
          + (a * g ** (a - 3) * one_g ** (a - 1) * (1 - 2 * g) if a else 0.0) / L ** 3
          + 2 * g ** (a - 3) * one_g ** a / L ** 3)
    b1 = (3 / (g ** 2 * L ** 2)
          - 2 * (a * g ** (a - 2) * one_g ** (a - 1) * (1 - 2 * g) if a else 0.0) / L ** 2
          - 3 * g ** (a - 2) * one_g ** a / L ** 2)
    c1 = slope / L
    d1 = g ** a * one_g ** a
    b2 = (-3 / (g ** 2 * L ** 2)
          + (a * g ** (a - 2) * one_g ** (a - 1) * (1 - 2 * g) if a else 0.0) / L ** 2
          + 3 * g ** (a - 2) * one_g ** a / L ** 2)
    return {"a1": a1, "b1": b1, "c1": c1, "d1": d1, "a2": -a1, "b2": b2}


def _outer_value_slope(gamma: float, alpha: int, L: float):
    """Value and z-slope of (z/L)^a (1-z/L)^a at z = gamma L."""
    g = gamma
    val = (g * (1 - g)) ** alpha
    if alpha == 0:
        return val, 0.0
    slope = alpha * (g * (1 - g)) ** (alpha - 1) * (1 - 2 * g) / L
    return val, slope


def solve_hermite_system(gamma: float, alpha: int, L: float = 1.0) -> dict:
    """Solve the four C1 matching conditions for (a1, b1, a2, b2).

    c1, d1 are fixed by the outer polynomial at z = gamma L. The first blend
    must reach 1 with zero slope at 2 gamma L; the second must leave 1 with
    zero slope at L - 2 gamma L and land on (d1, -c1) at L - gamma L.
    """
    h = gamma * L
    d1, c1 = _outer_value_slope(gamma, alpha, L)
    A = np.array([
        [h ** 3, h ** 2, 0.0, 0.0],
        [3 * h ** 2, 2 * h, 0.0, 0.0],
        [0.0, 0.0, h ** 3, h ** 2],
        [0.0, 0.0, 3 * h ** 2, 2 * h],
    ])
    rhs = np.array([1.0 - d1 - c1 * h, -c1, d1 - 1.0, -c1])
    a1, b1, a2, b2 = np.linalg.solve(A, rhs)
    return {"a1": a1, "b1": b1, "c1": c1, "d1": d1, "a2": a2, "b2": b2}


def _check_gamma_for_blend(gamma: float):
    if not gamma < 0.25:
        raise OverlapError(f"gamma={gamma:g} >= 1/4: the blended pieces overlap")


def hermite_coefficients(domain: DomainParams, alpha: int, gamma: float | None = None) -> HermiteCoefficients:
    """Blend coefficients from the matching system, cross-checked against the
    closed forms. The solved values are the ones returned."""
    if int(alpha) != alpha or alpha < 0:
        raise ParameterError("alpha must be a nonnegative integer")
    gamma = domain.gamma if gamma is None else gamma
    _check_gamma_for_blend(gamma)
    solved = solve_hermite_system(gamma, int(alpha), domain.L)
    printed = printed_hermite_coefficients(gamma, int(alpha), domain.L)
    disc = 0.0
    for key, val in solved.items():
        ref = printed[key]
        scale = max(abs(val), abs(ref))
        if scale > 0:
            disc = max(disc, abs(val - ref) / scale)
    return HermiteCoefficients(printed=printed, discrepancy=disc, **solved)


def _coeffs_for(profile: DampingProfile, domain: DomainParams) -> HermiteCoefficients:
    if profile.coeffs is not None:
        return profile.coeffs
    return hermite_coefficients(domain, profile.alpha)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _eval_hermite(zz, domain, alpha, co: HermiteCoefficients):
    L, g = domain.L, domain.gamma
    _check_gamma_for_blend(g)
    h = g * L
    t = zz / L
    outer = (t * (1 - t)) ** alpha
    s1 = zz - h
    blend1 = ((co.a1 * s1 + co.b1) * s1 + co.c1) * s1 + co.d1
    s2 = zz + 2 * h - L
    blend2 = (co.a2 * s2 + co.b2) * s2 * s2 + 1.0
    return np.select(
        [zz <= h, zz <= 2 * h, zz < L - 2 * h, zz < L - h],
        [outer, blend1, 1.0, blend2],
        outer,
    )


def _eval_algebraic(zz, domain, alpha):
    L, h, re = domain.L, domain.strip_width, domain.re
    return np.select(
        [zz <= h, zz < L - h],
        [(re * zz / L) ** alpha, 1.0],
        (re * (1 - zz / L)) ** alpha,
    )


def eval_beta(profile: DampingProfile, z, domain: DomainParams):
    """Evaluate beta at wall-normal position(s) z in [0, L]."""
    zz = _as_z(z, domain)
    kind = profile.kind
    if kind == "constant":
        out = np.full_like(zz, profile.value)
    elif kind == "van-driest-exact":
        out = -np.expm1(-_van_driest_rate(domain) * (domain.L - zz))
    elif kind == "algebraic":
        out = _eval_algebraic(zz, domain, profile.alpha)
    elif kind == "hermite":
        out = _eval_hermite(zz, domain, profile.alpha, _coeffs_for(profile, domain))
    else:
        tz, tb = profile.table
        out = np.interp(zz, tz, tb)
    return float(out) if np.ndim(out) == 0 else out


def eval_beta_derivative(profile: DampingProfile, z, domain: DomainParams):
    """d beta / dz, piecewise analytic; used for the C1 junction checks."""
    zz = _as_z(z, domain)
    L = domain.L
    kind = profile.kind
    if kind == "constant":
        out = np.zeros_like(zz)
    elif kind == "van-driest-exact":
        c = _van_driest_rate(domain)
        out = -c * np.exp(-c * (L - zz))
    elif kind == "algebraic":
        a, re, h = profile.alpha, domain.re, domain.strip_width
        lo = a * re ** a * (zz / L) ** max(a - 1, 0) / L if a else 0.0 * zz
        hi = -a * re ** a * (1 - zz / L) ** max(a - 1, 0) / L if a else 0.0 * zz
        out = np.select([zz <= h, zz < L - h], [lo, 0.0], hi)
    elif kind == "hermite":
        return _hermite_piece_slopes(zz, domain, profile.alpha, _coeffs_for(profile, domain))
    else:
        tz, tb = profile.table
        slopes = np.diff(tb) / np.diff(tz)
        idx = np.clip(np.searchsorted(tz, zz, side="right") - 1, 0, slopes.size - 1)
        out = slopes[idx]
    return float(out) if np.ndim(out) == 0 else out


def _outer_slope(zz, L, alpha):
    if alpha == 0:
        return np.zeros_like(zz)
    t = zz / L
    return alpha * (t * (1 - t)) ** (alpha - 1) * (1 - 2 * t) / L


def _hermite_piece_slopes(zz, domain, alpha, co):
    L, h = domain.L, domain.strip_width
    s1 = zz - h
    s2 = zz + 2 * h - L
    out = np.select(
        [zz <= h, zz <= 2 * h, zz < L - 2 * h, zz < L - h],
        [_outer_slope(zz, L, alpha), (3 * co.a1 * s1 + 2 * co.b1) * s1 + co.c1, 0.0,
         (3 * co.a2 * s2 + 2 * co.b2) * s2],
        _outer_slope(zz, L, alpha),
    )
    return float(out) if np.ndim(out) == 0 else out


def hermite_pieces(domain: DomainParams, alpha: int, coeffs: HermiteCoefficients | None = None):
    """The five pieces of the hermite profile as (value, slope) callables in z,
    in order from the bottom wall up."""
    co = coeffs or hermite_coefficients(domain, alpha)
    L, h = domain.L, domain.strip_width

    def outer(z):
        t = z / L
        return (t * (1 - t)) ** alpha, float(_outer_slope(np.asarray(z, float), L, alpha))

    def blend1(z):
        s = z - h
        return ((co.a1 * s + co.b1) * s + co.c1) * s + co.d1, (3 * co.a1 * s + 2 * co.b1) * s + co.c1

    def core(z):
        return 1.0, 0.0

    def blend2(z):
        s = z + 2 * h - L
        return (co.a2 * s + co.b2) * s * s + 1.0, (3 * co.a2 * s + 2 * co.b2) * s

    return [outer, blend1, core, blend2, outer]


def junction_mismatch(domain: DomainParams, alpha: int, coeffs: HermiteCoefficients | None = None):
    """Value and slope jumps of the hermite profile at its four junctions.

    Returns a list of ``(z, value_jump, slope_jump)``. Values are O(1) so the
    value jump is already relative; the slope jump is scaled by gamma*L, the
    width over which the profile varies.
    """
    pieces = hermite_pieces(domain, alpha, coeffs)
    L, h = domain.L, domain.strip_width
    out = []
    for z, left, right in zip((h, 2 * h, L - 2 * h, L - h), pieces[:-1], pieces[1:]):
        vl, sl = left(z)
        vr, sr = right(z)
        out.append((z, abs(vl - vr), abs(sl - sr) * h))
    return out


# ---------------------------------------------------------------------------
# strip integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StripIntegral:
    closed_form: float
    quadrature: float
    difference: float

    @property
    def relative_difference(self) -> float:
        scale = max(abs(self.closed_form), abs(self.quadrature))
        return self.difference / scale if scale else 0.0

    def __float__(self):
        return float(self.closed_form)


def binomial_terms(alpha: int, gamma: float) -> list[float]:
    """Terms of int_0^gamma t^a (1-t)^a dt expanded by the binomial theorem."""
    return [(-1) ** k * math.comb(alpha, k) * gamma ** (alpha + 1 + k) / (alpha + 1 + k)
            for k in range(alpha + 1)]


def c_alpha(alpha: int) -> float:
    """Envelope constant with int_{L-gL}^L beta_d <= C_alpha L gamma^(alpha+1).

    Keeps only the positive binomial terms and bounds gamma^k by 1.
    """
    return sum(math.comb(alpha, k) / (alpha + 1 + k) for k in range(0, alpha + 1, 2))


def _closed_strip(profile: DampingProfile, domain: DomainParams) -> float:
    L, g, h = domain.L, domain.gamma, domain.strip_width
    kind = profile.kind
    if kind == "constant":
        return profile.value * h
    if kind == "van-driest-exact":
        c = _van_driest_rate(domain)
        # h - (1 - exp(-c h)) / c
        return h + math.expm1(-c * h) / c
    if kind == "algebraic":
        a = profile.alpha
        return L * g * (domain.re * g) ** a / (a + 1)
    if kind == "hermite":
        _check_gamma_for_blend(g)
        terms = binomial_terms(profile.alpha, g)
        # alternating sum; fsum keeps the cancellation exact to rounding
        return L * math.fsum(terms)
    tz, tb = profile.table
    lo = L - h
    inner = (tz > lo) & (tz < L)
    zs = np.concatenate([[lo], tz[inner], [L]])
    bs = np.interp(zs, tz, tb)
    return float(np.sum(0.5 * (bs[1:] + bs[:-1]) * np.diff(zs)))


def _quad(f, a, b, points=None):
    with np.errstate(all="ignore"):
        val, err, *info = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=500,
                                         points=points, full_output=1)
    if len(info) > 1 and info[0]["last"] >= 500:
        raise IntegrationError(f"adaptive quadrature did not converge on [{a}, {b}]")
    if not math.isfinite(val):
        raise IntegrationError("quadrature returned a non-finite value")
    return val


def _breakpoints(profile, domain, a, b):
    L, h = domain.L, domain.strip_width
    pts = []
    if profile.kind in ("algebraic", "hermite"):
        pts = [h, 2 * h, L - 2 * h, L - h]
    elif profile.kind == "tabulated":
        pts = list(profile.table[0])
    pts = sorted(p for p in pts if a < p < b)
    return pts or None


def strip_integral(profile: DampingProfile, domain: DomainParams) -> StripIntegral:
    """Integral of beta over the lid strip [L - gamma L, L]."""
    L = domain.L
    lo = L - domain.strip_width
    closed = _closed_strip(profile, domain)
    quad = _quad(lambda z: eval_beta(profile, z, domain), lo, L, _breakpoints(profile, domain, lo, L))
    return StripIntegral(closed, quad, abs(closed - quad))


def full_integral(profile: DampingProfile, domain: DomainParams) -> float:
    """Integral of beta over [0, L], by quadrature with the profile breakpoints."""
    L = domain.L
    return _quad(lambda z: eval_beta(profile, z, domain), 0.0, L, _breakpoints(profile, domain, 0.0, L))


def damping_table(profile: DampingProfile, domain: DomainParams, n_samples: int = 1001):
    z = np.linspace(0.0, domain.L, n_samples)
    return z, np.asarray(eval_beta(profile, z, domain), dtype=float)


def leading_re_exponent(profile: DampingProfile):
    """Re power of Re^3 * strip integral at leading order, or None if unknown."""
    if profile.kind == "constant":
        return 2 if profile.value > 0 else None
    if profile.kind in ("algebraic", "van-driest-exact"):
        return 2
    if profile.kind == "hermite":
        return 2 - profile.alpha
    return None

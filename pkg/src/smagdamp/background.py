"""Background shear flow supported in the lid strip, and discrete checks of
the thin-strip Poincare-Friedrichs and Hardy inequalities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import DomainParams
from .damping import _as_z, _quad
from .exceptions import ParameterError, UndefinedRatioError


@dataclass(frozen=True)
class StripRegion:
    """The slab L - gamma L <= z <= L of the periodic box."""

    z_lo: float
    z_hi: float
    L: float

    @classmethod
    def from_domain(cls, domain: DomainParams) -> "StripRegion":
        return cls(domain.L - domain.strip_width, domain.L, domain.L)

    @property
    def width(self) -> float:
        return self.z_hi - self.z_lo

    @property
    def volume(self) -> float:
        return self.width * self.L ** 2


@dataclass(frozen=True)
class BackgroundFlow:
    """Phi = (phi(z), 0, 0): zero below the strip, linear ramp to U inside it."""

    domain: DomainParams

    @property
    def strip(self) -> StripRegion:
        return StripRegion.from_domain(self.domain)

    def phi(self, z):
        return eval_phi(z, self)

    def dphi(self, z):
        zz = _as_z(z, self.domain)
        slope = self.domain.U / self.domain.strip_width
        out = np.where(zz >= self.strip.z_lo, slope, 0.0)
        return float(out) if np.ndim(out) == 0 else out


def eval_phi(z, bf: BackgroundFlow):
    d = bf.domain
    zz = _as_z(z, d)
    foot = d.L - d.strip_width
    out = np.where(zz <= foot, 0.0, d.U / d.strip_width * (zz - foot))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class NormsReport:
    """Analytic values and their quadrature counterparts."""

    sup_phi: float
    sup_grad_phi: float
    l2_sq: float
    grad_l2_sq: float
    sup_phi_quad: float
    sup_grad_phi_quad: float
    l2_sq_quad: float
    grad_l2_sq_quad: float

    def max_relative_error(self) -> float:
        pairs = [(self.sup_phi, self.sup_phi_quad), (self.sup_grad_phi, self.sup_grad_phi_quad),
                 (self.l2_sq, self.l2_sq_quad), (self.grad_l2_sq, self.grad_l2_sq_quad)]
        return max(abs(a - b) / abs(a) for a, b in pairs)


def phi_norms(bf: BackgroundFlow) -> NormsReport:
    """sup|Phi| = U, sup|grad Phi| = U/(gamma L), ||Phi||^2 = U^2 gamma L^3 / 3
    and ||grad Phi||^2 = U^2 L / gamma. The L^2 norms are over the whole box;
    the integrands only depend on z, so the x-y integral is a factor L^2."""
    d = bf.domain
    L, U, g = d.L, d.U, d.gamma
    foot = L - d.strip_width
    pts = [foot]
    l2 = L ** 2 * _quad(lambda z: bf.phi(z) ** 2, 0.0, L, pts)
    gl2 = L ** 2 * _quad(lambda z: bf.dphi(z) ** 2, 0.0, L, pts)
    zs = np.linspace(0.0, L, 4097)
    zs = np.union1d(zs, [foot])
    return NormsReport(
        sup_phi=U,
        sup_grad_phi=U / (g * L),
        l2_sq=U ** 2 * g * L ** 3 / 3,
        grad_l2_sq=U ** 2 * L / g,
        sup_phi_quad=float(np.max(np.abs(bf.phi(zs)))),
        sup_grad_phi_quad=float(np.max(np.abs(bf.dphi(zs)))),
        l2_sq_quad=l2,
        grad_l2_sq_quad=gl2,
    )


# ---------------------------------------------------------------------------
# discrete functional inequalities on the strip
# ---------------------------------------------------------------------------


def _z_integral(f, z):
    return integrate.simpson(f, x=z, axis=-1)


def _xy_mean(f):
    # periodic rectangle rule: exact for trigonometric polynomials
    return f.mean(axis=(0, 1)) if f.ndim == 3 else f


def _check_trace(v, atol):
    if np.max(np.abs(v[..., -1])) > atol + 1e-12 * np.max(np.abs(v)):
        raise ParameterError("test field must vanish at z = L")


def poincare_ratio(v, z, strip: StripRegion, spacing=None, atol: float = 1e-12) -> float:
    """||v|| / ||grad v|| over the strip for samples ``v[..., iz]`` at nodes ``z``.

    ``v`` is a scalar field, either 1-D in z or ``(nx, ny, nz)`` on a periodic
    x-y lattice with ``spacing = (hx, hy)``; vector fields go in component by
    component through :func:`poincare_ratio_vector`. The last node must be
    z = L, where v vanishes. z-derivatives are second-order finite
    differences, z-integrals Simpson's rule.
    """
    num, den = _poincare_parts(np.asarray(v, dtype=float), np.asarray(z, dtype=float), spacing, atol)
    return _ratio(num, den)


def poincare_ratio_vector(components, z, strip: StripRegion, spacing=None, atol: float = 1e-12) -> float:
    num = den = 0.0
    for c in components:
        n, d = _poincare_parts(np.asarray(c, dtype=float), np.asarray(z, dtype=float), spacing, atol)
        num += n
        den += d
    return _ratio(num, den)


def _ratio(num_sq, den_sq):
    if not den_sq > 0:
        raise UndefinedRatioError("gradient norm is zero; ratio undefined")
    return float(np.sqrt(num_sq / den_sq))


def _poincare_parts(v, z, spacing, atol):
    _check_z(z)
    if np.max(np.abs(v)) <= atol:
        raise UndefinedRatioError("test field is zero to within machine noise")
    _check_trace(v, atol)
    dz = np.gradient(v, z, axis=-1, edge_order=2)
    grad_sq = dz ** 2
    if v.ndim == 3:
        if spacing is None:
            raise ParameterError("3-D samples need the x-y spacing")
        hx, hy = spacing
        n = v.shape[0]
        k = np.fft.fftfreq(n, d=hx) * 2 * np.pi
        dx = np.real(np.fft.ifft(1j * k[:, None, None] * np.fft.fft(v, axis=0), axis=0))
        m = v.shape[1]
        ky = np.fft.fftfreq(m, d=hy) * 2 * np.pi
        dy = np.real(np.fft.ifft(1j * ky[None, :, None] * np.fft.fft(v, axis=1), axis=1))
        grad_sq = grad_sq + dx ** 2 + dy ** 2
    num = _z_integral(_xy_mean(v ** 2), z)
    den = _z_integral(_xy_mean(grad_sq), z)
    return float(num), float(den)


def _check_z(z):
    if z.ndim != 1 or z.size < 5 or np.any(np.diff(z) <= 0):
        raise ParameterError("z nodes must be a strictly increasing 1-D array with >= 5 entries")


def hardy_ratio(v, z, p: float, strip: StripRegion, atol: float = 1e-12) -> float:
    """||v / (L - z)||_p / ||dv/dz||_p over the strip.

    At z = L the quotient is replaced by its limit -dv/dz, taken from the
    one-sided second-order difference.
    """
    if not p > 1:
        raise ParameterError(f"Hardy exponent must exceed 1, got {p!r}")
    v = np.asarray(v, dtype=float)
    z = np.asarray(z, dtype=float)
    _check_z(z)
    if np.max(np.abs(v)) <= atol:
        raise UndefinedRatioError("test field is zero to within machine noise")
    _check_trace(v, atol)
    dz = np.gradient(v, z, axis=-1, edge_order=2)
    dist = strip.L - z
    quot = np.empty_like(v)
    quot[..., :-1] = v[..., :-1] / dist[:-1]
    quot[..., -1] = -dz[..., -1]
    num = _z_integral(_xy_mean(np.abs(quot) ** p), z)
    den = _z_integral(_xy_mean(np.abs(dz) ** p), z)
    if not den > 0:
        raise UndefinedRatioError("derivative norm is zero; ratio undefined")
    return float((num / den) ** (1.0 / p))


def hardy_constant(p: float) -> float:
    return p / (p - 1.0)


def strip_nodes(strip: StripRegion, n: int = 257) -> np.ndarray:
    """Uniform nodes across the strip ending exactly at z = L."""
    z = np.linspace(strip.z_lo, strip.z_hi, n)
    z[-1] = strip.z_hi
    return z


def random_trace_zero_field(rng: np.random.Generator, strip: StripRegion, z, n_xy: int = 8,
                            max_degree: int = 6):
    """Polynomial in (L - z), vanishing at z = L, times a random x-y
    trigonometric factor. Returns ``(values, (hx, hy))``."""
    s = (strip.z_hi - z) / strip.width
    degree = int(rng.integers(1, max_degree + 1))
    coef = rng.normal(size=degree)
    coef[rng.integers(0, degree)] += np.sign(rng.normal()) * 1.0
    poly = sum(c * s ** (k + 1) for k, c in enumerate(coef))
    h = strip.L / n_xy
    x = np.arange(n_xy) * h
    kx, ky = rng.integers(0, 3, size=2)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    trig = (1.5 + np.cos(2 * np.pi * kx * x / strip.L + phase[0]))[:, None] \
        * (1.5 + np.sin(2 * np.pi * ky * x / strip.L + phase[1]))[None, :]
    return trig[:, :, None] * poly[None, None, :], (h, h)

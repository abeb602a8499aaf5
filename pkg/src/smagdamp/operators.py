"""Finite-difference operators on the MAC grid.

Array conventions (see :class:`smagdamp.core.Grid`): ``u, v`` are
``(nx, ny, nz)`` on x-/y-faces, ``w`` is ``(nx, ny, nz + 1)`` on z-faces with
the wall entries held at zero. Wall conditions for the tangential
components are imposed through one ghost layer on each side in z:
``u_ghost = 2 u_wall - u_interior``.
"""
from __future__ import annotations

import numpy as np
from scipy import fft

from .core import Grid


def _xm(a):  # value at i - 1
    return np.roll(a, 1, axis=0)


def _xp(a):  # value at i + 1
    return np.roll(a, -1, axis=0)


def _ym(a):
    return np.roll(a, 1, axis=1)


def _yp(a):
    return np.roll(a, -1, axis=1)


def ghost_z(a, bottom: float, top: float):
    """Pad a z-centred tangential component with wall ghost layers."""
    lo = 2.0 * bottom - a[..., :1]
    hi = 2.0 * top - a[..., -1:]
    return np.concatenate([lo, a, hi], axis=-1)


def center_velocity(u, v, w):
    """Face velocities averaged to cell centres."""
    return 0.5 * (u + _xp(u)), 0.5 * (v + _yp(v)), 0.5 * (w[..., 1:] + w[..., :-1])


def center_gradient(u, v, w, grid: Grid, lid: float):
    """All nine velocity derivatives at cell centres, ``g[i][j] = d u_j / d x_i``.

    Diagonal entries are compact face differences; off-diagonal ones are
    centred differences of the centre-averaged components, using the wall
    ghosts in z.
    """
    hx, hy, hz = grid.spacing
    uc, vc, wc = center_velocity(u, v, w)
    ucz = ghost_z(uc, 0.0, lid)
    vcz = ghost_z(vc, 0.0, 0.0)
    g = [[None] * 3 for _ in range(3)]
    g[0][0] = (_xp(u) - u) / hx
    g[1][1] = (_yp(v) - v) / hy
    g[2][2] = (w[..., 1:] - w[..., :-1]) / hz
    g[1][0] = (_yp(uc) - _ym(uc)) / (2 * hy)
    g[2][0] = (ucz[..., 2:] - ucz[..., :-2]) / (2 * hz)
    g[0][1] = (_xp(vc) - _xm(vc)) / (2 * hx)
    g[2][1] = (vcz[..., 2:] - vcz[..., :-2]) / (2 * hz)
    g[0][2] = (_xp(wc) - _xm(wc)) / (2 * hx)
    g[1][2] = (_yp(wc) - _ym(wc)) / (2 * hy)
    return g


def gradient_magnitude(u, v, w, grid: Grid, lid: float):
    """Frobenius norm of the velocity gradient at cell centres."""
    g = center_gradient(u, v, w, grid, lid)
    sq = sum(gij * gij for row in g for gij in row)
    return np.sqrt(sq)


def divergence(u, v, w, grid: Grid):
    hx, hy, hz = grid.spacing
    return (_xp(u) - u) / hx + (_yp(v) - v) / hy + (w[..., 1:] - w[..., :-1]) / hz


# ---------------------------------------------------------------------------
# edge averages of a cell-centred scalar
# ---------------------------------------------------------------------------


def edge_xy(c):
    """Average onto (x-face i, y-face j) edges."""
    return 0.25 * (c + _xm(c) + _ym(c) + _xm(_ym(c)))


def _pad_replicate_z(c):
    return np.concatenate([c[..., :1], c, c[..., -1:]], axis=-1)


def edge_xz(c):
    """Average onto (x-face i, z-face f) edges, f = 0..nz; walls copy the
    adjacent cell."""
    cp = _pad_replicate_z(c)
    cx = 0.5 * (cp + _xm(cp))
    return 0.5 * (cx[..., 1:] + cx[..., :-1])


def edge_yz(c):
    cp = _pad_replicate_z(c)
    cy = 0.5 * (cp + _ym(cp))
    return 0.5 * (cy[..., 1:] + cy[..., :-1])


# ---------------------------------------------------------------------------
# momentum terms
# ---------------------------------------------------------------------------


def skew_advection(u, v, w, grid: Grid, lid: float, tu=None, tv=None, tw=None):
    """Skew-symmetric advection 1/2 [T . grad phi + div(T phi)] of each
    component phi of (u, v, w) by the transport field T (defaults to the
    velocity itself).

    With centred averages this collapses to
    sum_d [T_{d,+} phi_+ - T_{d,-} phi_-] / (2 h_d), an antisymmetric operator
    in phi, so sum(phi * A(phi)) = 0 whenever phi's boundary data vanish.
    Returns the three components on their own staggered locations (w only on
    interior faces; wall rows are zero).
    """
    hx, hy, hz = grid.spacing
    tu = u if tu is None else tu
    tv = v if tv is None else tv
    tw = w if tw is None else tw

    # ---- u on x-faces
    t_c = 0.5 * (tu + _xp(tu))                   # at centres
    t_xy = 0.5 * (tv + _xm(tv))                  # (x-face i, y-face j)
    t_xz = 0.5 * (tw + _xm(tw))                  # (x-face i, z-face f)
    uz = ghost_z(u, 0.0, lid)
    au = (t_c * _xp(u) - _xm(t_c) * _xm(u)) / (2 * hx)
    au += (_yp(t_xy) * _yp(u) - t_xy * _ym(u)) / (2 * hy)
    au += (t_xz[..., 1:] * uz[..., 2:] - t_xz[..., :-1] * uz[..., :-2]) / (2 * hz)

    # ---- v on y-faces
    s_c = 0.5 * (tv + _yp(tv))
    s_xy = 0.5 * (tu + _ym(tu))                  # (x-face i, y-face j)
    s_yz = 0.5 * (tw + _ym(tw))                  # (y-face j, z-face f)
    vz = ghost_z(v, 0.0, 0.0)
    av = (_xp(s_xy) * _xp(v) - s_xy * _xm(v)) / (2 * hx)
    av += (s_c * _yp(v) - _ym(s_c) * _ym(v)) / (2 * hy)
    av += (s_yz[..., 1:] * vz[..., 2:] - s_yz[..., :-1] * vz[..., :-2]) / (2 * hz)

    # ---- w on z-faces
    r_xz = 0.5 * (tu[..., 1:] + tu[..., :-1])    # (x-face i, interior z-face)
    r_yz = 0.5 * (tv[..., 1:] + tv[..., :-1])
    r_c = 0.5 * (tw[..., 1:] + tw[..., :-1])     # centres
    wi = w[..., 1:-1]
    aw = np.zeros_like(w)
    aw[..., 1:-1] = (_xp(r_xz) * _xp(wi) - r_xz * _xm(wi)) / (2 * hx)
    aw[..., 1:-1] += (_yp(r_yz) * _yp(wi) - r_yz * _ym(wi)) / (2 * hy)
    aw[..., 1:-1] += (r_c[..., 1:] * w[..., 2:] - r_c[..., :-1] * w[..., :-2]) / (2 * hz)
    return au, av, aw


class Viscosity:
    """Effective viscosity nu + beta (C_s delta)^2 |grad u| on the flux
    locations of the staggered stencil.

    |grad u| is taken at cell centres and averaged to edges; beta is
    evaluated at the z-coordinate of each flux location.
    """

    def __init__(self, nu, model_sq, beta_c, beta_f, gmag):
        self.nu = nu
        m_c = model_sq * beta_c * gmag
        self.model_c = m_c
        self.model_xy = model_sq * beta_c * edge_xy(gmag)
        self.model_xz = model_sq * beta_f * edge_xz(gmag)
        self.model_yz = model_sq * beta_f * edge_yz(gmag)

    def max(self):
        return self.nu + max(float(np.max(m)) for m in
                             (self.model_c, self.model_xy, self.model_xz, self.model_yz))


def _face_gradients(u, v, w, grid: Grid, lid: float):
    """Differences living on the flux locations of each component."""
    hx, hy, hz = grid.spacing
    uz = ghost_z(u, 0.0, lid)
    vz = ghost_z(v, 0.0, 0.0)
    return {
        "u": ((_xp(u) - u) / hx,                       # centres
              (u - _ym(u)) / hy,                       # xy-edges
              (uz[..., 1:] - uz[..., :-1]) / hz),      # xz-edges, f = 0..nz
        "v": ((v - _xm(v)) / hx,                       # xy-edges
              (_yp(v) - v) / hy,                       # centres
              (vz[..., 1:] - vz[..., :-1]) / hz),      # yz-edges
        "w": ((w - _xm(w)) / hx,                       # xz-edges
              (w - _ym(w)) / hy,                       # yz-edges
              (w[..., 1:] - w[..., :-1]) / hz),        # centres
    }


def _flux_coefficients(visc: Viscosity, part: str):
    if part == "model":
        nu = 0.0
        mc, mxy, mxz, myz = visc.model_c, visc.model_xy, visc.model_xz, visc.model_yz
    else:
        nu = visc.nu
        if part == "viscous":
            mc = mxy = mxz = myz = 0.0
        else:
            mc, mxy, mxz, myz = visc.model_c, visc.model_xy, visc.model_xz, visc.model_yz
    return {
        "u": (nu + mc, nu + mxy, nu + mxz),
        "v": (nu + mxy, nu + mc, nu + myz),
        "w": (nu + mxz, nu + myz, nu + mc),
    }


def stress_divergence(u, v, w, grid: Grid, lid: float, visc: Viscosity, part: str = "total"):
    """div(nu_eff grad phi) for each component. ``part`` selects the
    viscous, model or total coefficient."""
    hx, hy, hz = grid.spacing
    grads = _face_gradients(u, v, w, grid, lid)
    coef = _flux_coefficients(visc, part)

    fx, fy, fz = (c * g for c, g in zip(coef["u"], grads["u"]))
    du = (fx - _xm(fx)) / hx + (_yp(fy) - fy) / hy + (fz[..., 1:] - fz[..., :-1]) / hz

    fx, fy, fz = (c * g for c, g in zip(coef["v"], grads["v"]))
    dv = (_xp(fx) - fx) / hx + (fy - _ym(fy)) / hy + (fz[..., 1:] - fz[..., :-1]) / hz

    fx, fy, fz = (c * g for c, g in zip(coef["w"], grads["w"]))
    dw = np.zeros_like(w)
    dw[..., 1:-1] = ((_xp(fx) - fx)[..., 1:-1] / hx + (_yp(fy) - fy)[..., 1:-1] / hy
                     + (fz[..., 1:] - fz[..., :-1]) / hz)
    return du, dv, dw


def energy_rate(u, v, w, grid: Grid, lid: float, visc: Viscosity, part: str = "total") -> float:
    """-(nu_eff grad u, grad u)_h for the chosen ``part`` (viscous, model or
    total): the stress contracted with the face gradients and summed with
    the control-volume weights of the stencil. Wall faces of u and v see half
    a control volume; w is zero on the walls so only interior w rows count.

    Together with the lid work this closes the discrete energy balance
    d/dt (1/2 sum |u|^2 h^3) = lid power + energy_rate.
    """
    grads = _face_gradients(u, v, w, grid, lid)
    coef = _flux_coefficients(visc, part)
    vol = grid.cell_volume
    total = 0.0
    for comp in ("u", "v"):
        for d, (c, g) in enumerate(zip(coef[comp], grads[comp])):
            term = c * g * g
            if d == 2:
                total -= (float(np.sum(term[..., 1:-1])) + 0.5 * float(np.sum(term[..., [0, -1]]))) * vol
            else:
                total -= float(np.sum(term)) * vol
    for d, (c, g) in enumerate(zip(coef["w"], grads["w"])):
        term = c * g * g
        total -= float(np.sum(term if d == 2 else term[..., 1:-1])) * vol
    return total


def model_energy_rate(u, v, w, grid: Grid, lid: float, visc: Viscosity) -> float:
    """-(beta (C_s delta)^2 |grad u| grad u, grad u)_h; never positive."""
    return energy_rate(u, v, w, grid, lid, visc, "model")


def staggered_kinetic_energy(u, v, w, grid: Grid) -> float:
    """1/2 sum of squares over the staggered unknowns times h^3: the norm in
    which the stencil's energy balance is exact."""
    return 0.5 * grid.cell_volume * float(np.sum(u * u) + np.sum(v * v) + np.sum(w * w))


# ---------------------------------------------------------------------------
# pressure projection
# ---------------------------------------------------------------------------


class PoissonSolver:
    """Exact solve of the discrete Laplacian div(grad p) = rhs.

    Periodic in x and y (FFT) and homogeneous Neumann in z, where the
    cell-centred second-difference matrix is diagonalised by the DCT-II.
    The mean of p is fixed to zero.
    """

    def __init__(self, grid: Grid):
        nx, ny, nz = grid.shape
        hx, hy, hz = grid.spacing
        lx = -(2.0 * np.sin(np.pi * np.arange(nx) / nx) / hx) ** 2
        ly = -(2.0 * np.sin(np.pi * np.arange(ny) / ny) / hy) ** 2
        lz = -(2.0 * np.sin(np.pi * np.arange(nz) / (2 * nz)) / hz) ** 2
        eig = lx[:, None, None] + ly[None, :, None] + lz[None, None, :]
        eig[0, 0, 0] = 1.0
        self._inv = 1.0 / eig
        self._inv[0, 0, 0] = 0.0

    def solve(self, rhs):
        r = fft.dct(rhs, type=2, axis=2, norm="ortho")
        r = fft.fft2(r, axes=(0, 1))
        r *= self._inv
        r = np.real(fft.ifft2(r, axes=(0, 1)))
        return fft.idct(r, type=2, axis=2, norm="ortho")


def pressure_gradient(p, grid: Grid):
    hx, hy, hz = grid.spacing
    gx = (p - _xm(p)) / hx
    gy = (p - _ym(p)) / hy
    gz = np.zeros(p.shape[:2] + (p.shape[2] + 1,))
    gz[..., 1:-1] = (p[..., 1:] - p[..., :-1]) / hz
    return gx, gy, gz


def project(u, v, w, grid: Grid, poisson: PoissonSolver):
    """Remove the discrete gradient part of (u, v, w). Returns the projected
    components and the potential phi with u_new = u - grad phi."""
    phi = poisson.solve(divergence(u, v, w, grid))
    gx, gy, gz = pressure_gradient(phi, grid)
    return u - gx, v - gy, w - gz, phi

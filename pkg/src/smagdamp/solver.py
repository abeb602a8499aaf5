"""Explicit projection solver for the damped Smagorinsky system in the
lid-driven periodic box, and the steady one-dimensional shear oracle.

Time stepping is Heun's second-order Runge-Kutta with a pressure projection
after each stage. Advection uses the skew-symmetric form; the viscous and
model stresses are discretised together as div(nu_eff grad u) with
nu_eff = nu + beta(z) (C_s delta)^2 |grad u|.
"""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DomainParams, Grid, VelocityField
from .damping import DampingProfile, _breakpoints, _quad, eval_beta
from .dissipation import DissipationSeries, _sum, eps_instant, kinetic_energy
from .exceptions import BoundednessError, OracleError, ParameterError, SolverError, StabilityError
from .operators import (
    PoissonSolver,
    Viscosity,
    divergence,
    energy_rate,
    gradient_magnitude,
    model_energy_rate,
    project,
    skew_advection,
    stress_divergence,
)

log = logging.getLogger(__name__)

INITIAL_CONDITIONS = ("couette", "couette_plus_perturbation", "checkpoint", "zero")
GUARD_FACTOR = 100.0


@dataclass(frozen=True)
class SolverConfig:
    cfl_number: float = 0.4
    projection_tolerance: float = 1e-10
    end_time: float = 1.0
    sample_interval: float = 0.0
    deterministic_reduction: bool = False
    initial_condition: str = "couette"
    amplitude: float = 0.1
    seed: int = 0
    checkpoint: str | None = None
    max_steps: int | None = None
    steady_tolerance: float | None = None

    def __post_init__(self):
        if not 0 < self.cfl_number < 1:
            raise ParameterError(f"cfl_number must lie in (0, 1), got {self.cfl_number!r}")
        if not self.end_time > 0:
            raise ParameterError(f"end_time must be positive, got {self.end_time!r}")
        if self.sample_interval < 0:
            raise ParameterError("sample_interval must be nonnegative")
        if not self.projection_tolerance > 0:
            raise ParameterError("projection_tolerance must be positive")
        if self.initial_condition not in INITIAL_CONDITIONS:
            raise ParameterError(f"initial_condition must be one of {INITIAL_CONDITIONS}")
        if self.initial_condition == "checkpoint" and not self.checkpoint:
            raise ParameterError("checkpoint initial condition needs a checkpoint path")


# ---------------------------------------------------------------------------
# one-dimensional steady oracle
# ---------------------------------------------------------------------------


@dataclass
class SteadyShearProfile:
    z_nodes: np.ndarray
    u_of_z: np.ndarray
    tau: float
    residual: float
    slope: np.ndarray = field(repr=False, default=None)

    def at(self, z):
        return np.interp(z, self.z_nodes, self.u_of_z)


def _slope_from_stress(tau, nu, a):
    """Positive root of a s^2 + nu s - tau = 0, written to stay accurate
    when a -> 0."""
    return 2.0 * tau / (nu + np.sqrt(nu * nu + 4.0 * a * tau))


def _composite_gauss(z_nodes, breakpoints, order=8):
    """Knots, weights and owning interval for composite Gauss-Legendre over
    the node intervals, each further split at the profile breakpoints."""
    knots = np.union1d(z_nodes, [b for b in breakpoints if z_nodes[0] < b < z_nodes[-1]])
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = knots[:-1, None], knots[1:, None]
    pts = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    wts = 0.5 * (hi - lo) * w[None, :]
    # index of the last node at or below each sub-interval start
    owner = np.searchsorted(z_nodes, knots[:-1], side="right") - 1
    return pts, wts, owner


def steady_shear_profile(profile: DampingProfile, domain: DomainParams, n_nodes: int = 1025,
                         max_iter: int = 200) -> SteadyShearProfile:
    """Steady unidirectional solution u(z) of the damped model.

    The shear stress (nu + beta (C_s delta)^2 |u'|) u' = tau is constant in
    z. For a trial tau the slope follows pointwise from the quadratic and u
    is its composite Gauss-Legendre integral (sub-intervals split at the
    kinks of beta); tau is bisected until u(L) = U.
    """
    if n_nodes < 64:
        raise ParameterError("the steady oracle needs at least 64 nodes")
    L, U, nu = domain.L, domain.U, domain.nu
    z = np.linspace(0.0, L, n_nodes)
    ms = domain.model_length ** 2
    pts, wts, owner = _composite_gauss(z, _breakpoints(profile, domain, 0.0, L) or [])
    a_q = ms * np.asarray(eval_beta(profile, pts, domain), dtype=float)
    a = ms * np.asarray(eval_beta(profile, z, domain), dtype=float)
    if not (np.all(np.isfinite(a_q)) and np.all(np.isfinite(a))):
        raise OracleError("damping profile is not finite on the oracle nodes")

    def pieces(tau):
        return np.sum(wts * _slope_from_stress(tau, nu, a_q), axis=1)

    def top_speed(tau):
        return math.fsum(pieces(tau))

    # at this stress every slope is at least U / L; doubled to absorb rounding
    lo, hi = 0.0, 2.0 * (nu + float(np.max(a_q)) * U / L) * U / L
    if U > 0 and not top_speed(hi) >= U:
        raise OracleError("bisection bracket does not contain the wall stress")
    tau = 0.5 * (lo + hi)
    for _ in range(max_iter):
        tau = 0.5 * (lo + hi)
        top = top_speed(tau)
        if abs(top - U) <= 1e-12 * max(U, 1e-300):
            break
        if top < U:
            lo = tau
        else:
            hi = tau
        if hi - lo <= 1e-16 * hi:
            break
    per_node = np.bincount(owner, weights=pieces(tau), minlength=n_nodes - 1)
    u = np.concatenate([[0.0], np.cumsum(per_node)])
    slope = _slope_from_stress(tau, nu, a)
    # defect of the sampled profile, so it measures the node resolution
    du = np.gradient(u, z, edge_order=2)
    residual = float(np.max(np.abs((nu + a * np.abs(du)) * du - tau)))
    return SteadyShearProfile(z, u, float(tau), residual, slope)


def oracle_dissipation(profile: DampingProfile, domain: DomainParams, tau: float) -> float:
    """(1/L) int (nu u'^2 + (C_s delta)^2 beta |u'|^3) dz for the stress tau,
    by adaptive quadrature on the pointwise slope."""
    nu, ms = domain.nu, domain.model_length ** 2

    def integrand(z):
        a = ms * eval_beta(profile, z, domain)
        s = _slope_from_stress(tau, nu, a)
        return nu * s * s + a * s ** 3

    return _quad(integrand, 0.0, domain.L, _breakpoints(profile, domain, 0.0, domain.L)) / domain.L


# ---------------------------------------------------------------------------
# 3-D solver
# ---------------------------------------------------------------------------


@dataclass
class SolverStats:
    steps: int = 0
    last_dt: float = math.nan
    max_divergence: float = 0.0
    max_model_energy_rate: float = -math.inf
    guard_tripped: bool = False
    steady: bool = False


class DampedSmagorinskySolver:
    """Owns the operators for one (domain, grid, profile) combination."""

    def __init__(self, domain: DomainParams, grid: Grid, profile: DampingProfile,
                 config: SolverConfig | None = None, lid_speed: float | None = None):
        if abs(grid.L - domain.L) > 1e-14 * domain.L:
            raise ParameterError("grid and domain disagree on L")
        self.domain = domain
        self.grid = grid
        self.profile = profile
        self.config = config or SolverConfig()
        # the lid normally moves at U; a different speed (e.g. 0) leaves Re and gamma untouched
        self.lid = domain.U if lid_speed is None else float(lid_speed)
        self.beta_c = np.asarray(eval_beta(profile, grid.z_centers(), domain), dtype=float)
        self.beta_f = np.asarray(eval_beta(profile, grid.z_faces(), domain), dtype=float)
        if np.any(self.beta_c < 0) or np.any(self.beta_f < 0):
            raise ParameterError("damping profile must be nonnegative")
        self.poisson = PoissonSolver(grid)
        self.stats = SolverStats()
        hx, hy, hz = grid.spacing
        self._inv_h2 = 1 / hx ** 2 + 1 / hy ** 2 + 1 / hz ** 2

    # -- building blocks ---------------------------------------------------

    def viscosity(self, u, v, w) -> Viscosity:
        gmag = gradient_magnitude(u, v, w, self.grid, self.lid)
        return Viscosity(self.domain.nu, self.domain.model_length ** 2, self.beta_c, self.beta_f, gmag)

    def tendency(self, u, v, w, visc: Viscosity | None = None):
        """-advection + stress divergence, before projection."""
        visc = visc or self.viscosity(u, v, w)
        au, av, aw = skew_advection(u, v, w, self.grid, self.lid)
        du, dv, dw = stress_divergence(u, v, w, self.grid, self.lid, visc)
        return du - au, dv - av, dw - aw

    def relative_divergence(self, u, v, w) -> float:
        div = divergence(u, v, w, self.grid)
        scale = max(self.domain.U, float(np.max(np.abs(u))), float(np.max(np.abs(v))),
                    float(np.max(np.abs(w))), 1e-300)
        return float(np.max(np.abs(div))) * min(self.grid.spacing) / scale

    def time_step(self, u, v, w, visc: Viscosity) -> float:
        cfg = self.config
        vmax = max(float(np.max(np.abs(u))), float(np.max(np.abs(v))), float(np.max(np.abs(w))),
                   abs(self.lid))
        dt_adv = cfg.cfl_number * min(self.grid.spacing) / vmax if vmax > 0 else math.inf
        # explicit diffusion limit 1 / (2 nu sum 1/h^2); equals h^2 / (6 nu) on cubic cells
        dt_diff = cfg.cfl_number / (2.0 * visc.max() * self._inv_h2)
        return min(dt_adv, dt_diff)

    def lid_stress(self, field: VelocityField) -> float:
        """Mean x-shear stress on the lid from the one-sided wall difference,
        nu_eff * 2 (U - u_top) / hz, matching the wall flux of the stencil."""
        visc = self.viscosity(field.u, field.v, field.w)
        coef = self.domain.nu + visc.model_xz[..., -1]
        grad = 2.0 * (self.lid - field.u[..., -1]) / self.grid.hz
        return float(np.mean(coef * grad))

    def lid_power(self, field: VelocityField) -> float:
        """Rate of work done by the lid, tau * U * L^2."""
        return self.lid_stress(field) * self.lid * self.domain.L ** 2

    def model_energy_rate(self, field: VelocityField) -> float:
        visc = self.viscosity(field.u, field.v, field.w)
        return model_energy_rate(field.u, field.v, field.w, self.grid, self.lid, visc)

    def stencil_dissipation(self, field: VelocityField, part: str = "total") -> float:
        """Total dissipation (not per volume) in the stencil's own quadrature;
        d/dt staggered_kinetic_energy = lid_power - stencil_dissipation."""
        visc = self.viscosity(field.u, field.v, field.w)
        return -energy_rate(field.u, field.v, field.w, self.grid, self.lid, visc, part)

    def _project(self, u, v, w):
        u, v, w, phi = project(u, v, w, self.grid, self.poisson)
        rel = self.relative_divergence(u, v, w)
        self.stats.max_divergence = max(self.stats.max_divergence, rel)
        if not rel <= self.config.projection_tolerance:
            raise SolverError(f"projection left relative divergence {rel:.3e}")
        return u, v, w, phi

    # -- stepping ----------------------------------------------------------

    def advance(self, field: VelocityField, dt: float | None = None) -> VelocityField:
        """One Heun step. Returns a new field; the input is untouched."""
        u0, v0, w0 = field.u, field.v, field.w
        visc = self.viscosity(u0, v0, w0)
        mer = model_energy_rate(u0, v0, w0, self.grid, self.lid, visc)
        self.stats.max_model_energy_rate = max(self.stats.max_model_energy_rate, mer)
        if dt is None:
            dt = self.time_step(u0, v0, w0, visc)
        if not (math.isfinite(dt) and dt > 1e-14 * max(self.config.end_time, 1.0)):
            raise StabilityError(f"time step underflow (dt={dt!r}); effective viscosity blew up")
        k1 = self.tendency(u0, v0, w0, visc)
        u1, v1, w1, _ = self._project(u0 + dt * k1[0], v0 + dt * k1[1], w0 + dt * k1[2])
        k2 = self.tendency(u1, v1, w1)
        u2 = 0.5 * (u0 + u1 + dt * k2[0])
        v2 = 0.5 * (v0 + v1 + dt * k2[1])
        w2 = 0.5 * (w0 + w1 + dt * k2[2])
        u2, v2, w2, phi = self._project(u2, v2, w2)
        if not (np.all(np.isfinite(u2)) and np.all(np.isfinite(v2)) and np.all(np.isfinite(w2))):
            raise StabilityError(f"non-finite velocity after step at t={field.time + dt:g}")
        w2[..., 0] = 0.0
        w2[..., -1] = 0.0
        self.stats.steps += 1
        self.stats.last_dt = dt
        return VelocityField(u2, v2, w2, phi / (0.5 * dt), field.time + dt)

    def sample(self, field: VelocityField):
        det = self.config.deterministic_reduction
        ev, em = eps_instant(field, self.profile, self.domain, self.grid, det, beta_c=self.beta_c,
                             lid=self.lid)
        return field.time, kinetic_energy(field, self.grid, det), ev, em

    def run(self, field: VelocityField, series: DissipationSeries | None = None):
        """Integrate to ``config.end_time`` (or until steady / ``max_steps``).

        Samples diagnostics at the configured cadence and aborts with
        :class:`BoundednessError` if the kinetic energy exceeds 100 times the
        running median of its samples.
        """
        cfg = self.config
        field.check_shapes(self.grid)
        series = series if series is not None else DissipationSeries()
        history: list[float] = []
        end = cfg.end_time
        next_sample = field.time

        def take_sample(f):
            rec = series.accumulate(*self.sample(f))
            ke = rec.kinetic_energy
            bisect.insort(history, ke)
            median = history[len(history) // 2] if len(history) % 2 else \
                0.5 * (history[len(history) // 2 - 1] + history[len(history) // 2])
            if len(history) > 1 and ke > GUARD_FACTOR * median:
                self.stats.guard_tripped = True
                raise BoundednessError(
                    f"kinetic energy {ke:.4g} exceeds {GUARD_FACTOR:g}x running median {median:.4g} "
                    f"at t={f.time:g}",
                    report={"time": f.time, "ke": ke, "median": median, "samples": len(history)},
                )
            return rec

        if not series.records or series.last.time < field.time:
            take_sample(field)
            next_sample = field.time + cfg.sample_interval
        while field.time < end * (1 - 1e-14):
            if cfg.max_steps is not None and self.stats.steps >= cfg.max_steps:
                break
            visc = self.viscosity(field.u, field.v, field.w)
            dt = min(self.time_step(field.u, field.v, field.w, visc), end - field.time)
            new = self.advance(field, dt)
            done = new.time >= end * (1 - 1e-14)
            if cfg.steady_tolerance is not None:
                scale = max(self.domain.U, 1e-300)
                change = max(float(np.max(np.abs(new.u - field.u))), float(np.max(np.abs(new.v - field.v))),
                             float(np.max(np.abs(new.w - field.w))))
                rate = change / dt * self.domain.L / scale ** 2
                if rate <= cfg.steady_tolerance:
                    self.stats.steady = True
                    done = True
            field = new
            if cfg.sample_interval == 0 or field.time >= next_sample - 1e-12 * end or done:
                take_sample(field)
                while next_sample <= field.time:
                    next_sample += cfg.sample_interval if cfg.sample_interval > 0 else math.inf
            if done:
                break
        return field, series


def trilinear_form(transport: VelocityField, phi: VelocityField, grid: Grid) -> float:
    """Discrete b_h(T, phi, phi) = sum phi . A_T(phi) over the staggered
    unknowns, with homogeneous wall data for phi."""
    au, av, aw = skew_advection(phi.u, phi.v, phi.w, grid, 0.0, transport.u, transport.v, transport.w)
    total = _sum(phi.u * au, True) + _sum(phi.v * av, True) + _sum((phi.w * aw)[..., 1:-1], True)
    return total * grid.cell_volume


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def perturbation(grid: Grid, amplitude: float, seed: int, L: float | None = None) -> VelocityField:
    """Divergence-free sum of low trigonometric modes with seeded random
    amplitudes and phases, tapered by sin^2(pi z / L) towards both walls."""
    L = grid.L if L is None else L
    rng = np.random.default_rng(seed)
    f = VelocityField.zeros(grid)
    xf, xc = grid.x_faces(), grid.x_centers()
    yf, yc = grid.y_faces(), grid.y_centers()
    zc, zf = grid.z_centers(), grid.z_faces()
    modes = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)]
    targets = ((f.u, xf, yc, zc), (f.v, xc, yf, zc), (f.w, xc, yc, zf))
    for kx, ky in modes:
        for arr, x, y, z in targets:
            amp = rng.normal()
            ph = rng.uniform(0, 2 * np.pi)
            kz = rng.integers(1, 3)
            arg = 2 * np.pi * (kx * x[:, None] + ky * y[None, :]) / L + ph
            env = np.sin(np.pi * kz * z / L) ** 2
            arr += amp * np.cos(arg)[:, :, None] * env[None, None, :]
    f.w[..., 0] = f.w[..., -1] = 0.0
    u, v, w, _ = project(f.u, f.v, f.w, grid, PoissonSolver(grid))
    peak = max(np.max(np.abs(u)), np.max(np.abs(v)), np.max(np.abs(w)))
    scale = amplitude / peak if peak > 0 else 0.0
    return VelocityField(u * scale, v * scale, w * scale, np.zeros(grid.shape))


def initial_field(domain: DomainParams, grid: Grid, config: SolverConfig) -> VelocityField:
    ic = config.initial_condition
    if ic == "zero":
        return VelocityField.zeros(grid)
    if ic == "checkpoint":
        from .checkpoint import read_checkpoint

        field, ck_domain, ck_grid = read_checkpoint(config.checkpoint)
        if ck_grid.shape != grid.shape:
            raise ParameterError(f"checkpoint grid {ck_grid.shape} does not match {grid.shape}")
        return field
    base = VelocityField.couette(grid, domain.U)
    if ic == "couette_plus_perturbation":
        pert = perturbation(grid, config.amplitude * domain.U, config.seed)
        base.u += pert.u
        base.v += pert.v
        base.w += pert.w
    return base


def advance(field: VelocityField, profile: DampingProfile, domain: DomainParams, grid: Grid,
            config: SolverConfig | None = None) -> VelocityField:
    return DampedSmagorinskySolver(domain, grid, profile, config).advance(field)


def run(field: VelocityField, profile: DampingProfile, domain: DomainParams, grid: Grid,
        config: SolverConfig | None = None):
    return DampedSmagorinskySolver(domain, grid, profile, config).run(field)

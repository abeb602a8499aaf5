"""Fast self-checks over every module, used by the ``verify`` subcommand.

Each check returns ``(passed, detail)``. Nothing here takes more than a
few seconds; the long solver runs live in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds, damping
from .background import (
    BackgroundFlow,
    StripRegion,
    hardy_constant,
    hardy_ratio,
    phi_norms,
    poincare_ratio,
    random_trace_zero_field,
    strip_nodes,
)
from .checkpoint import read_checkpoint, write_checkpoint
from .core import VelocityField, make_domain, make_grid
from .dissipation import eps_instant
from .solver import (
    DampedSmagorinskySolver,
    oracle_dissipation,
    perturbation,
    steady_shear_profile,
    trilinear_form,
)

VERIFY_COLUMNS = ("module", "check", "passed", "detail")


@dataclass(frozen=True)
class CheckResult:
    module: str
    check: str
    passed: bool
    detail: str

    def row(self):
        return (self.module, self.check, "PASS" if self.passed else "FAIL", self.detail)


def _domain(re=100.0, delta=0.05, c_s=0.1):
    return make_domain(1.0, 1.0, 1.0 / re, delta, c_s)


def check_strip_fraction():
    d = _domain(250.0)
    err = abs(d.gamma - 1.0 / (5.1 * 250.0))
    return err < 1e-15, f"gamma error {err:.2e}"


def check_hermite_junctions():
    worst = 0.0
    for re in (20.0, 100.0, 1000.0):
        for alpha in (1, 2, 3):
            for _, dv, ds in damping.junction_mismatch(_domain(re), alpha):
                worst = max(worst, abs(dv), abs(ds))
    return worst < 1e-10, f"max junction mismatch {worst:.2e}"


def check_strip_integrals():
    d = _domain(100.0)
    z = np.linspace(0.0, 1.0, 201)
    profiles = [damping.constant(1.0), damping.van_driest(), damping.algebraic(2), damping.hermite(2),
                damping.hermite(1), damping.tabulated(z, z * (1 - z))]
    worst = max(damping.strip_integral(p, d).relative_difference for p in profiles)
    return worst < 1e-10, f"max closed-form/quadrature difference {worst:.2e}"


def check_taylor_strip():
    d = _domain(100.0)
    z = np.linspace(1.0 - d.strip_width, 1.0, 50)
    err = float(np.max(np.abs(damping.taylor_approx_f_w(z, d, 8) - damping.van_driest_exact(z, d))))
    return err < 1e-6, f"k=8 error {err:.2e}"


def check_profile_endpoints():
    d = _domain(100.0)
    b = damping.eval_beta(damping.hermite(2), np.array([0.0, 0.5, 1.0]), d)
    ok = b[0] == 0.0 and b[2] == 0.0 and abs(b[1] - 1.0) < 1e-15
    return ok, f"beta_d(0, L/2, L) = {b[0]:g}, {b[1]:g}, {b[2]:g}"


def check_background_norms():
    err = phi_norms(BackgroundFlow(_domain(100.0))).max_relative_error()
    return err < 1e-10, f"max closed-form/quadrature difference {err:.2e}"


def check_functional_inequalities(n_fields=20, seed=7):
    rng = np.random.default_rng(seed)
    strip = StripRegion.from_domain(_domain(50.0))
    z = strip_nodes(strip, 257)
    worst_p = worst_h = 0.0
    for _ in range(n_fields):
        v, spacing = random_trace_zero_field(rng, strip, z)
        worst_p = max(worst_p, poincare_ratio(v, z, strip, spacing) / strip.width)
        for p in (1.5, 2.0, 3.0):
            worst_h = max(worst_h, hardy_ratio(v, z, p, strip) / hardy_constant(p))
    return worst_p <= 1 and worst_h <= 1, f"Poincare/(gamma L) {worst_p:.3f}, Hardy/(p/(p-1)) {worst_h:.3f}"


def check_couette_dissipation():
    d = _domain(100.0, delta=0.5, c_s=0.2)
    g = make_grid(d, 4, 4, 8)
    ev, em = eps_instant(VelocityField.couette(g, d.U), damping.constant(1.0), d, g)
    err = abs(ev + em - 0.02) / 0.02
    return err < 1e-12, f"eps = {ev + em!r}"


def check_traced_constants():
    tc = bounds.traced_constants(1.0)
    ok = abs(tc.c1 - 583.1) < 1e-9 and abs(tc.c2 - 4510.134) < 1e-9 and abs(tc.m - 1 / 102) < 1e-15
    return ok, f"c1 = {tc.c1:.10g}, c2 = {tc.c2:.10g}"


def check_corollary_slopes():
    res = (1e2, 1e3, 1e4)
    expected = {("algebraic_3_2", 2): 2.0, ("hermite_3_4", 2): 0.0, ("hermite_3_4", 3): 0.0,
                ("hermite_alpha1_3_5", 1): 1.0}
    d = _domain(100.0)
    parts = []
    ok = True
    for (kind, alpha), want in expected.items():
        terms = [bounds.corollary_bound(d.with_re(re), kind, alpha).model_term for re in res]
        s = bounds.loglog_slope(res, terms)
        ok &= abs(s - want) <= 0.01
        parts.append(f"{kind}/{alpha}: {s:.4f}")
    return ok, "; ".join(parts)


def check_couette_steady():
    d = _domain(100.0, delta=0.25)
    g = make_grid(d, 4, 4, 8)
    s = DampedSmagorinskySolver(d, g, damping.constant(1.0))
    f0 = VelocityField.couette(g, d.U)
    f1 = s.advance(f0)
    change = float(np.max(np.abs(f1.u - f0.u)))
    return change < 1e-12, f"max change {change:.2e}"


def check_skew_symmetry():
    d = _domain(100.0)
    g = make_grid(d, 8, 8, 8)
    t = perturbation(g, 1.0, 3)
    phi = perturbation(g, 1.0, 4)
    b = trilinear_form(t, phi, g)
    return abs(b) < 1e-12, f"b_h(u, v, v) = {b:.2e}"


def check_projection_and_model_sign():
    d = _domain(1000.0, delta=0.125)
    g = make_grid(d, 8, 8, 8)
    s = DampedSmagorinskySolver(d, g, damping.hermite(2))
    f = VelocityField.couette(g, d.U)
    p = perturbation(g, 0.3, 1)
    f.u += p.u
    f.v += p.v
    f.w += p.w
    for _ in range(5):
        f = s.advance(f)
    ok = s.stats.max_divergence <= 1e-10 and s.stats.max_model_energy_rate <= 0
    return ok, f"divergence {s.stats.max_divergence:.2e}, model energy rate {s.stats.max_model_energy_rate:.3e}"


def check_oracle_power_balance():
    d = _domain(1.0, delta=0.5, c_s=0.2)
    orc = steady_shear_profile(damping.hermite(2), d, 2049)
    eps = oracle_dissipation(damping.hermite(2), d, orc.tau)
    err = abs(eps / (orc.tau * d.U / d.L) - 1)
    return err < 1e-10, f"relative power-balance defect {err:.2e}"


def check_checkpoint_roundtrip(tmpdir):
    d = _domain(100.0)
    g = make_grid(d, 4, 5, 6)
    f = perturbation(g, 0.5, 11)
    f.time = 0.375
    path = Path(tmpdir) / "roundtrip.smdl"
    write_checkpoint(path, f, d, g)
    f2, d2, g2 = read_checkpoint(path)
    ok = d2 == d and g2 == g and f2.time == f.time and all(
        np.array_equal(getattr(f, k), getattr(f2, k)) for k in "uvwp")
    return ok, "bitwise identical" if ok else "mismatch after reload"


CHECKS = (
    ("core", "strip fraction", check_strip_fraction),
    ("damping", "hermite C1 junctions", check_hermite_junctions),
    ("damping", "strip integrals", check_strip_integrals),
    ("damping", "Taylor van Driest", check_taylor_strip),
    ("damping", "hermite endpoints", check_profile_endpoints),
    ("background", "closed-form norms", check_background_norms),
    ("background", "Poincare and Hardy ratios", check_functional_inequalities),
    ("dissipation", "Couette dissipation", check_couette_dissipation),
    ("bounds", "traced constants", check_traced_constants),
    ("bounds", "corollary slopes", check_corollary_slopes),
    ("solver", "Couette steady state", check_couette_steady),
    ("solver", "skew-symmetric advection", check_skew_symmetry),
    ("solver", "projection and model sign", check_projection_and_model_sign),
    ("solver", "oracle power balance", check_oracle_power_balance),
)


def run_checks(tmpdir) -> list[CheckResult]:
    """Run every check; an exception counts as a failure with its message."""
    results = []
    for module, name, fn in CHECKS + (("checkpoint", "round trip", lambda: check_checkpoint_roundtrip(tmpdir)),):
        try:
            passed, detail = fn()
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(module, name, bool(passed), detail))
    return results

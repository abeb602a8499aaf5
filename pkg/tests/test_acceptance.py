"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line that is echoed in the terminal summary
(and printed, so ``-s`` shows it inline).
"""
import filecmp
import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from smagdamp import bounds as bd
from smagdamp import damping as dm
from smagdamp.background import (
    BackgroundFlow,
    StripRegion,
    hardy_constant,
    hardy_ratio,
    phi_norms,
    poincare_ratio,
    random_trace_zero_field,
    strip_nodes,
)
from smagdamp.cli import main
from smagdamp.core import VelocityField, make_domain, make_grid
from smagdamp.dissipation import eps_instant
from smagdamp.experiments import ExperimentConfig, run_point
from smagdamp.operators import gradient_magnitude
from smagdamp.solver import DampedSmagorinskySolver, SolverConfig, perturbation, steady_shear_profile, trilinear_form


def record(number, title, passed, detail, started):
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}  {title}: {detail} [{time.perf_counter() - started:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


# ----------------------------------------------------------------------------
# 1. laminar oracle
# ----------------------------------------------------------------------------

def _couette_run(re):
    d = make_domain(1.0, 1.0, 1.0 / re, 0.5, 0.2)  # C_s delta = 0.1
    g = make_grid(d, 32, 32, 32)
    s = DampedSmagorinskySolver(d, g, dm.constant(1.0), SolverConfig(end_time=10.0, max_steps=20))
    f, series = s.run(VelocityField.couette(g, d.U))
    exact = d.U * g.z_centers() / d.L
    profile_err = float(np.max(np.abs(f.u - exact)) / d.U)
    cross = max(float(np.max(np.abs(f.v))), float(np.max(np.abs(f.w))))
    hand = d.nu * (d.U / d.L) ** 2 + d.model_length ** 2 * (d.U / d.L) ** 3
    return profile_err, cross, series.running_average, hand


def test_criterion_1_laminar_oracle():
    t0 = time.perf_counter()
    err1, cross1, eps1, hand1 = _couette_run(1.0)
    err100, cross100, eps100, hand100 = _couette_run(100.0)
    # at Re = 1 the laminar value is nu (U/L)^2 + (C_s delta)^2 (U/L)^3 = 1.01;
    # the quoted 0.02 is the same formula at Re = 100, so both are checked
    rel1 = abs(eps1 - hand1) / hand1
    rel100 = abs(eps100 - 0.02) / 0.02
    ok = max(err1, err100, cross1, cross100) < 1e-6 and rel1 < 1e-4 and rel100 < 1e-4 and hand1 == pytest.approx(1.01)
    record(1, "laminar Couette oracle", ok,
           f"profile err {max(err1, err100):.1e}; eps(Re=1) = {eps1:.10g} vs {hand1:.10g}; "
           f"eps(Re=100) = {eps100:.10g} vs 0.02", t0)


# ----------------------------------------------------------------------------
# 2. one-dimensional oracle cross-check
# ----------------------------------------------------------------------------

def _steady_3d(nz):
    d = make_domain(1.0, 1.0, 1.0, 0.5, 0.2)  # Re = 1, C_s delta = 0.1
    g = make_grid(d, 4, 4, nz)
    prof = dm.hermite(2)
    cfg = SolverConfig(cfl_number=0.9, end_time=50.0, steady_tolerance=1e-11, sample_interval=1.0)
    s = DampedSmagorinskySolver(d, g, prof, cfg)
    f, series = s.run(VelocityField.couette(g, d.U))
    refine = 64
    orc = steady_shear_profile(prof, d, 2 * nz * refine + 1)
    at_centres = orc.u_of_z[refine::2 * refine]
    err = float(np.max(np.abs(f.u - at_centres[None, None, :])) / d.U)
    ev, em = eps_instant(f, prof, d, g)
    power = s.lid_stress(f) * d.U * d.L ** 2
    balance = abs((ev + em) * d.volume - power) / power
    return err, balance, s.stats.steady, orc.tau, s.lid_stress(f)


def test_criterion_2_oracle_cross_check():
    t0 = time.perf_counter()
    e32, b32, s32, tau, tau32 = _steady_3d(32)
    e64, b64, s64, _, tau64 = _steady_3d(64)
    order = math.log2(e32 / e64)
    ok = (s32 and s64 and order >= 1.8 and e32 <= (1 / 32) ** 2 and e64 <= (1 / 64) ** 2
          and max(b32, b64) < 1e-3)
    record(2, "3-D steady state vs 1-D oracle", ok,
           f"err(32) = {e32:.2e}, err(64) = {e64:.2e}, order {order:.2f}; power balance defect "
           f"{max(b32, b64):.1e}; tau oracle {tau:.8g} vs 3-D {tau64:.8g}", t0)


# ----------------------------------------------------------------------------
# 3. theorem inequality on strip-resolved grids
# ----------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_3_theorem_inequality():
    t0 = time.perf_counter()
    end = 0.1
    solver = SolverConfig(end_time=end, sample_interval=end / 200, initial_condition="couette_plus_perturbation",
                          amplitude=0.2, seed=17)
    rows = []
    for re, nz in ((50.0, 512), (100.0, 1024)):
        # delta defaults to the largest cell width, 1/4
        cfg = ExperimentConfig(nx=4, ny=4, nz=nz, solver=solver)
        for kind, alpha in (("constant", 0), ("algebraic", 2), ("hermite", 2)):
            rows.append(run_point(cfg, re, None, alpha, kind, nz))
    tc = bd.traced_constants()
    constants_ok = tc.c1 == pytest.approx(583.1, rel=1e-12) and tc.c2 == pytest.approx(4510.134, rel=1e-12)
    ok = constants_ok and all(r["status"] == "ok" and r["strip_resolved"] and r["within_bound"] is True for r in rows)
    worst = max(r["limsup_proxy"] / r["theorem_bound"] for r in rows if r["status"] == "ok")
    record(3, "finite-horizon average below theorem bound", ok,
           f"{sum(r['within_bound'] is True for r in rows)}/{len(rows)} cases, largest proxy/bound {worst:.2e}", t0)


# ----------------------------------------------------------------------------
# 4. scaling laws
# ----------------------------------------------------------------------------

def test_criterion_4_scaling_laws():
    t0 = time.perf_counter()
    res = (1e2, 1e3, 1e4)
    cases = [("algebraic_3_2", 2, 2.0), ("hermite_3_4", 2, 0.0), ("hermite_3_4", 3, 0.0),
             ("hermite_alpha1_3_5", 1, 1.0)]
    base = make_domain(1.0, 1.0, 0.01, 0.05, 0.1)
    slopes = {}
    for kind, alpha, _ in cases:
        terms = [bd.corollary_bound(base.with_re(re), kind, alpha).model_term for re in res]
        slopes[(kind, alpha)] = bd.loglog_slope(res, terms)
    ok = all(abs(slopes[(k, a)] - want) <= 0.01 for k, a, want in cases)
    record(4, "corollary scaling exponents", ok,
           ", ".join(f"{k}(alpha={a}) {slopes[(k, a)]:.4f}" for k, a, _ in cases), t0)


# ----------------------------------------------------------------------------
# 5. functional inequalities
# ----------------------------------------------------------------------------

def test_criterion_5_functional_inequalities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240517)
    violations = 0
    worst_p = worst_h = 0.0
    for i in range(100):
        re = (1.0, 10.0, 100.0, 1000.0)[i % 4]
        strip = StripRegion.from_domain(make_domain(1.0, 1.0, 1.0 / re, 0.1, 0.1))
        z = strip_nodes(strip, 257)
        v, spacing = random_trace_zero_field(rng, strip, z)
        rp = poincare_ratio(v, z, strip, spacing) / strip.width
        worst_p = max(worst_p, rp)
        violations += rp > 1
        for p in (1.5, 2.0, 3.0):
            rh = hardy_ratio(v, z, p, strip) / hardy_constant(p)
            worst_h = max(worst_h, rh)
            violations += rh > 1
    norm_err = max(phi_norms(BackgroundFlow(make_domain(L, U, U * L / re, 0.1 * L, 0.1))).max_relative_error()
                   for L, U, re in ((1.0, 1.0, 1.96), (1.0, 1.0, 100.0), (2.0, 3.0, 50.0)))
    ok = violations == 0 and norm_err < 1e-10
    record(5, "Poincare, Hardy and background norms", ok,
           f"{violations} violations in 100 fields (max ratio/bound {max(worst_p, worst_h):.3f}); "
           f"norm closed forms rel err {norm_err:.1e}", t0)


# ----------------------------------------------------------------------------
# 6. damping profiles
# ----------------------------------------------------------------------------

def test_criterion_6_damping_profiles():
    t0 = time.perf_counter()
    junction = 0.0
    strip_err = 0.0
    taylor = 0.0
    zt = np.linspace(0.0, 1.0, 401)
    for re in (2.0, 10.0, 100.0, 1000.0, 5000.0):
        d = make_domain(1.0, 1.0, 1.0 / re, 0.1, 0.1)
        for alpha in (1, 2, 3, 4):
            co = dm.hermite_coefficients(d, alpha)
            for _, dv, ds in dm.junction_mismatch(d, alpha, co):
                junction = max(junction, dv, ds)
        kinds = [dm.constant(1.0), dm.constant(0.3), dm.van_driest(), dm.algebraic(1), dm.algebraic(2),
                 dm.hermite(1), dm.hermite(2), dm.hermite(3), dm.tabulated(zt, 1 - np.cos(np.pi * zt) ** 4)]
        for p in kinds:
            strip_err = max(strip_err, dm.strip_integral(p, d).relative_difference)
        z = np.linspace(1.0 - d.strip_width, 1.0, 101)
        taylor = max(taylor, float(np.max(np.abs(dm.taylor_approx_f_w(z, d, 8) - dm.van_driest_exact(z, d)))))
    ok = junction < 1e-10 and strip_err < 1e-10 and taylor < 1e-6
    record(6, "damping-profile suite", ok,
           f"junction mismatch {junction:.1e}, strip integral rel diff {strip_err:.1e}, Taylor k=8 err {taylor:.1e}",
           t0)


# ----------------------------------------------------------------------------
# 7. discrete structure
# ----------------------------------------------------------------------------

def _l2(a, g):
    return math.sqrt(float(np.sum(a * a)) * g.cell_volume)


def test_criterion_7_discrete_structure():
    t0 = time.perf_counter()
    d = make_domain(1.0, 1.0, 1e-3, 1 / 32, 0.1)
    g = make_grid(d, 32, 32, 32)
    skew = 0.0
    for seed in range(5):
        t = perturbation(g, 1.0, 100 + seed)
        phi = perturbation(g, 1.0, 200 + seed)
        scale = (max(np.abs(t.u).max(), np.abs(t.v).max(), np.abs(t.w).max())
                 * _l2(gradient_magnitude(phi.u, phi.v, phi.w, g, 0.0), g)
                 * math.sqrt(_l2(phi.u, g) ** 2 + _l2(phi.v, g) ** 2 + _l2(phi.w, g) ** 2))
        skew = max(skew, abs(trilinear_form(t, phi, g)) / scale)

    cfg = SolverConfig(end_time=1e3, max_steps=500, initial_condition="couette_plus_perturbation",
                       amplitude=0.3, seed=5)
    s = DampedSmagorinskySolver(d, g, dm.hermite(2), cfg)
    f = VelocityField.couette(g, d.U)
    p = perturbation(g, 0.3 * d.U, 5)
    f.u += p.u
    f.v += p.v
    f.w += p.w
    f, series = s.run(f)
    finite = all(math.isfinite(r.kinetic_energy) for r in series)
    ok = (skew <= 1e-12 and s.stats.steps == 500 and s.stats.max_divergence <= 1e-10
          and s.stats.max_model_energy_rate <= 0 and not s.stats.guard_tripped and finite)
    record(7, "skew symmetry, projection, model sign, energy guard", ok,
           f"relative b_h {skew:.1e}; {s.stats.steps} steps at Re=1000: max divergence {s.stats.max_divergence:.1e}, "
           f"max model energy rate {s.stats.max_model_energy_rate:.2e}, guard tripped {s.stats.guard_tripped}", t0)


# ----------------------------------------------------------------------------
# 8. reproducibility
# ----------------------------------------------------------------------------

CONFIG = """\
[run]
mode = sweep

[grid]
nx = 8
ny = 8
nz = 16

[solver]
end_time = 0.05
initial_condition = couette_plus_perturbation
amplitude = 0.25

[sweep]
re = 50, 100
profile = constant, algebraic, hermite
alpha = 2
"""


def test_criterion_8_reproducibility(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "sweep.ini"
    cfg.write_text(CONFIG)
    outs = [tmp_path / "first", tmp_path / "second"]
    codes = []
    for mode in ("sweep", "run"):
        for out in outs:
            codes.append(main([mode, "--config", str(cfg), "--out", str(out / mode), "--seed", "12345",
                               "--deterministic"]))
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*.csv"))
    same = all(filecmp.cmp(outs[0] / f, outs[1] / f, shallow=False) for f in files)
    same &= filecmp.cmp(outs[0] / "run" / "checkpoint.smdl", outs[1] / "run" / "checkpoint.smdl", shallow=False)
    ok = codes == [0, 0, 0, 0] and same and len(files) >= 8
    record(8, "byte-identical deterministic reruns", ok,
           f"{len(files)} CSV files and the checkpoint compared, identical = {same}, exit codes {codes}", t0)

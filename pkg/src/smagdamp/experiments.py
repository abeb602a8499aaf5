"""Configuration, single runs, parameter sweeps and bound tables.

Configuration files are INI-style ``key = value`` lines under section
headers; lists are comma separated and ``#`` starts a comment::

    [run]
    mode = sweep              # run | sweep | bounds | damping-table | verify

    [domain]
    L = 1.0
    U = 1.0
    re = 100                  # or nu = 0.01
    delta = 0.0625            # default: largest cell width
    c_s = 0.1
    kappa = 1.0

    [grid]
    nx = 16
    ny = 16
    nz = 32

    [profile]
    kind = hermite            # constant | van-driest-exact | algebraic | hermite | tabulated
    alpha = 2
    value = 1.0               # constant profiles only
    table = beta.txt          # tabulated profiles only

    [solver]
    cfl_number = 0.4
    end_time = 2.0
    sample_interval = 0.0
    initial_condition = couette_plus_perturbation
    amplitude = 0.1
    seed = 0

    [sweep]
    re = 50, 100
    profile = constant, algebraic, hermite
    alpha = 2
    delta = 0.0625
    nz = 32
    workers = 1

    [output]
    directory = out
    damping_samples = 1001

Output files (all CSV columns are plain ``repr`` floats):

``dissipation.csv``    time, ke, eps_viscous, eps_model, eps_total, running_avg
``summary.csv``        one bound-vs-measurement row, columns ``POINT_COLUMNS``
``sweep.csv``          one such row per sweep point
``slopes.csv``         group, quantity, slope of log(model term) against log(Re)
``bounds.csv``         ``bounds.REPORT_COLUMNS`` for each Re and profile
``damping_table.csv``  z followed by one beta column per profile
``verify.csv``         module, check, passed, detail
"""
from __future__ import annotations

import configparser
import csv
import itertools
import logging
import re as _re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import bounds as _bounds
from .checkpoint import write_checkpoint
from .core import make_domain, make_grid
from .damping import DampingProfile, damping_table, load_table
from .dissipation import write_series_csv
from .exceptions import ConfigError, SmagdampError
from .solver import DampedSmagorinskySolver, SolverConfig, initial_field

log = logging.getLogger(__name__)

MODES = ("run", "sweep", "bounds", "damping-table", "verify")
SECTIONS = {
    "run": {"mode"},
    "domain": {"l", "u", "re", "nu", "delta", "c_s", "kappa"},
    "grid": {"nx", "ny", "nz"},
    "profile": {"kind", "alpha", "value", "table"},
    "solver": {f.name for f in fields(SolverConfig)},
    "sweep": {"re", "delta", "alpha", "profile", "nz", "workers"},
    "output": {"directory", "damping_samples"},
}
POINT_COLUMNS = (
    "re", "delta", "alpha", "profile", "nz", "nx", "ny", "status", "error",
    "strip_resolved", "cells_in_strip", "steps", "end_time", "final_ke",
    "measured_avg", "limsup_proxy", "cauchy_spread",
    "theorem_bound", "theorem_model_term", "corollary", "corollary_bound", "corollary_model_term",
    "reference_boundary_layer", "reference_no_boundary_layer", "within_bound",
)
SLOPE_COLUMNS = ("group", "quantity", "n_points", "slope")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "run"
    L: float = 1.0
    U: float = 1.0
    re: float = 100.0
    delta: float | None = None
    c_s: float = 0.1
    kappa: float = 1.0
    nx: int = 16
    ny: int = 16
    nz: int = 16
    profile: str = "constant"
    alpha: int = 2
    value: float = 1.0
    table: str | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep_re: tuple[float, ...] = ()
    sweep_delta: tuple[float, ...] = ()
    sweep_alpha: tuple[int, ...] = ()
    sweep_profile: tuple[str, ...] = ()
    sweep_nz: tuple[int, ...] = ()
    workers: int = 1
    out: Path = Path("out")
    damping_samples: int = 1001

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")

    def points(self):
        """Cartesian product of the sweep axes, falling back to the single
        values when an axis is empty."""
        return list(itertools.product(
            self.sweep_re or (self.re,),
            self.sweep_delta or (self.delta,),
            self.sweep_alpha or (self.alpha,),
            self.sweep_profile or (self.profile,),
            self.sweep_nz or (self.nz,),
        ))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_KEY = _re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")
_SECTION = _re.compile(r"^\s*\[([^\]]+)\]")


def _line_numbers(text: str) -> dict:
    """(section, key) -> 1-based line number, plus (section, None) for headers."""
    where, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        m = _SECTION.match(line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        m = _KEY.match(line)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), i)
    return where


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key before any [section] header", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line!r}", lineno) from exc
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message.split(":")[-1].strip(), exc.lineno) from exc
    where = _line_numbers(text)

    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", where.get((section, None)))
        for key in parser[section]:
            if key not in SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", where.get((section, key)))

    def get(section, key, conv, default):
        if not parser.has_option(section, key):
            return default
        raw = parser.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] {key}: {exc}", where.get((section, key))) from exc

    def as_list(conv):
        def inner(raw):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if not items:
                raise ValueError("empty list")
            return tuple(conv(s) for s in items)
        return inner

    kw = {}
    kw["mode"] = get("run", "mode", str, "run")
    kw["L"] = get("domain", "l", float, 1.0)
    kw["U"] = get("domain", "u", float, 1.0)
    re_value = get("domain", "re", float, None)
    nu_value = get("domain", "nu", float, None)
    if re_value is not None and nu_value is not None:
        raise ConfigError("give either re or nu, not both", where.get(("domain", "nu")))
    if nu_value is not None:
        if not nu_value > 0:
            raise ConfigError("nu must be positive", where.get(("domain", "nu")))
        re_value = kw["U"] * kw["L"] / nu_value
    kw["re"] = 100.0 if re_value is None else re_value
    kw["delta"] = get("domain", "delta", _optional_float, None)
    kw["c_s"] = get("domain", "c_s", float, 0.1)
    kw["kappa"] = get("domain", "kappa", float, 1.0)
    for key in ("nx", "ny", "nz"):
        kw[key] = get("grid", key, int, 16)
    kw["profile"] = get("profile", "kind", str, "constant")
    kw["alpha"] = get("profile", "alpha", int, 2)
    kw["value"] = get("profile", "value", float, 1.0)
    kw["table"] = get("profile", "table", str, None)
    kw["sweep_re"] = get("sweep", "re", as_list(float), ())
    kw["sweep_delta"] = get("sweep", "delta", as_list(_optional_float), ())
    kw["sweep_alpha"] = get("sweep", "alpha", as_list(int), ())
    kw["sweep_profile"] = get("sweep", "profile", as_list(str), ())
    kw["sweep_nz"] = get("sweep", "nz", as_list(int), ())
    kw["workers"] = get("sweep", "workers", int, 1)
    kw["out"] = Path(get("output", "directory", str, "out"))
    kw["damping_samples"] = get("output", "damping_samples", int, 1001)

    solver_kw = {}
    for f in fields(SolverConfig):
        conv = _SOLVER_CONVERTERS.get(f.name, float)
        value = get("solver", f.name, conv, None)
        if value is not None:
            solver_kw[f.name] = value
    try:
        kw["solver"] = SolverConfig(**solver_kw)
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}", where.get(("solver", None))) from exc
    try:
        cfg = ExperimentConfig(**kw)
    except ConfigError as exc:
        raise ConfigError(str(exc), where.get(("run", "mode"))) from exc
    if cfg.mode == "sweep" and not any((cfg.sweep_re, cfg.sweep_delta, cfg.sweep_alpha,
                                        cfg.sweep_profile, cfg.sweep_nz)):
        raise ConfigError("sweep mode needs at least one [sweep] axis", where.get(("run", "mode")))
    for kind in cfg.sweep_profile + (cfg.profile,):
        try:
            DampingProfile(kind, alpha=0 if kind == "tabulated" else cfg.alpha,
                           table=([0.0, cfg.L], [1.0, 1.0]) if kind == "tabulated" else None)
        except ValueError as exc:
            key = ("sweep", "profile") if kind in cfg.sweep_profile else ("profile", "kind")
            raise ConfigError(str(exc), where.get(key)) from exc
    return cfg


def _optional_float(raw: str):
    return None if raw.lower() in ("", "auto", "none") else float(raw)


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _optional_int(raw: str):
    return None if raw.lower() in ("", "none") else int(raw)


_SOLVER_CONVERTERS = {
    "deterministic_reduction": _bool,
    "initial_condition": str,
    "seed": int,
    "checkpoint": str,
    "max_steps": _optional_int,
    "steady_tolerance": _optional_float,
}


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def build_profile(kind: str, alpha: int, value: float = 1.0, table=None, domain=None) -> DampingProfile:
    if kind == "tabulated":
        if table is None:
            raise ConfigError("tabulated profile needs [profile] table = <path>")
        return load_table(table, domain)
    try:
        if kind in ("constant", "constant-one", "one"):
            return DampingProfile("constant", value=value)
        return DampingProfile(kind, alpha=alpha if kind not in ("van-driest-exact", "van-driest") else 0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_problem(cfg: ExperimentConfig, re=None, delta=None, nz=None):
    """Domain and grid for one point; delta defaults to the largest cell width."""
    re = cfg.re if re is None else re
    nz = cfg.nz if nz is None else nz
    delta = cfg.delta if delta is None else delta
    nu = cfg.U * cfg.L / re
    if delta is None:
        delta = cfg.L / min(cfg.nx, cfg.ny, nz)
    try:
        domain = make_domain(cfg.L, cfg.U, nu, delta, cfg.c_s, cfg.kappa)
        return domain, make_grid(domain, cfg.nx, cfg.ny, nz)
    except ValueError as exc:
        raise ConfigError(f"Re={re:g}, delta={delta:g}, nz={nz}: {exc}") from exc


def _corollary(domain, profile):
    kind = _bounds.corollary_for(profile)
    if kind is None:
        return None
    try:
        return _bounds.corollary_bound(domain, kind, profile.alpha)
    except SmagdampError:
        return None


def _point_key(re, delta, alpha, kind, nz):
    d = "auto" if delta is None else f"{delta:g}"
    return f"re{re:g}_delta{d}_alpha{alpha}_{kind}_nz{nz}"


def run_point(cfg: ExperimentConfig, re, delta, alpha, kind, nz, out_dir: Path | None = None,
              checkpoint: bool = False) -> dict:
    """Run one configuration and join the measurement with the bounds.

    Solver failures are caught and reported in the row (status ``failed``)
    so that a sweep keeps its completed points.
    """
    row = dict.fromkeys(POINT_COLUMNS, "")
    row.update(re=re, delta=delta, alpha=alpha, profile=kind, nz=nz, nx=cfg.nx, ny=cfg.ny)
    try:
        domain, grid = build_problem(cfg, re, delta, nz)
        profile = build_profile(kind, alpha, cfg.value, cfg.table, domain)
    except SmagdampError as exc:
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return row
    row.update(delta=domain.delta, profile=profile.label, alpha=profile.alpha,
               strip_resolved=grid.strip_resolved, cells_in_strip=grid.cells_in_strip)
    try:
        th = _bounds.theorem_bound(domain, profile)
        row.update(theorem_bound=th.bound_value, theorem_model_term=th.model_term)
    except SmagdampError as exc:
        row.update(error=f"bound: {exc}")
    co = _corollary(domain, profile)
    if co is not None:
        row.update(corollary=co.kind, corollary_bound=co.bound_value, corollary_model_term=co.model_term)
    rates = _bounds.reference_rates(domain)
    row.update(reference_boundary_layer=rates.boundary_layer, reference_no_boundary_layer=rates.no_boundary_layer)

    solver = DampedSmagorinskySolver(domain, grid, profile, cfg.solver)
    try:
        field0 = initial_field(domain, grid, cfg.solver)
        final, series = solver.run(field0)
    except SmagdampError as exc:
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}", steps=solver.stats.steps)
        log.warning("point %s failed: %s", _point_key(re, delta, alpha, kind, nz), exc)
        return row
    if out_dir is not None:
        write_series_csv(series, Path(out_dir) / f"{_point_key(re, delta, alpha, kind, nz)}.csv"
                         if not checkpoint else Path(out_dir) / "dissipation.csv")
        if checkpoint:
            write_checkpoint(Path(out_dir) / "checkpoint.smdl", final, domain, grid)
    row.update(status="ok", steps=solver.stats.steps, end_time=final.time,
               final_ke=series.last.kinetic_energy, measured_avg=series.running_average,
               limsup_proxy=series.limsup_proxy(), cauchy_spread=series.cauchy_spread())
    if row["theorem_bound"] != "" and grid.strip_resolved:
        row["within_bound"] = row["limsup_proxy"] <= row["theorem_bound"]
    return row


def slope_rows(rows, quantities=("theorem_model_term", "corollary_model_term")):
    """Log-log slopes against Re, grouped by everything except Re."""
    groups = {}
    for r in rows:
        key = (r["profile"], r["alpha"], r["delta"], r["nz"])
        groups.setdefault(key, []).append(r)
    out = []
    for key, members in groups.items():
        for q in quantities:
            pts = sorted({(m["re"], m[q]) for m in members if m[q] not in ("", None) and m[q] > 0})
            if len({p[0] for p in pts}) < 2:
                continue
            slope = _bounds.loglog_slope([p[0] for p in pts], [p[1] for p in pts])
            group = f"profile={key[0]};alpha={key[1]};delta={_cell(key[2])};nz={key[3]}"
            out.append({"group": group, "quantity": q, "n_points": len(pts), "slope": slope})
    return out


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------


@dataclass
class Artifacts:
    mode: str
    files: list[Path] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    summary: str = ""
    ok: bool = True


def _cell(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def write_rows(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            values = [r.get(c) for c in columns] if isinstance(r, dict) else r
            writer.writerow([_cell(v) for v in values])
    return path


def _prepare_out(out: Path) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _summary_text(row: dict) -> str:
    lines = [f"profile {row['profile']} at Re = {row['re']:g}, delta = {_cell(row['delta'])}, "
             f"grid {row['nx']}x{row['ny']}x{row['nz']}", f"status: {row['status']} {row['error']}".rstrip()]
    if row["status"] == "ok":
        lines += [
            f"measured running average    {row['measured_avg']!r}",
            f"limsup proxy (last 25%)     {row['limsup_proxy']!r}",
        ]
    for key in ("theorem_bound", "corollary_bound", "reference_boundary_layer", "reference_no_boundary_layer"):
        if row[key] != "":
            lines.append(f"{key:<28}{row[key]!r}")
    lines.append(f"strip resolved              {row['strip_resolved']} ({_cell(row['cells_in_strip'])} cells)")
    if row["within_bound"] != "":
        lines.append(f"within theorem bound        {row['within_bound']}")
    return "\n".join(lines) + "\n"


def mode_run(cfg: ExperimentConfig) -> Artifacts:
    out = _prepare_out(cfg.out)
    row = run_point(cfg, cfg.re, cfg.delta, cfg.alpha, cfg.profile, cfg.nz, out, checkpoint=True)
    art = Artifacts("run", rows=[row])
    art.files.append(write_rows(out / "summary.csv", POINT_COLUMNS, [row]))
    art.summary = _summary_text(row)
    (out / "summary.txt").write_text(art.summary)
    art.files.append(out / "summary.txt")
    if row["status"] == "ok":
        art.files += [out / "dissipation.csv", out / "checkpoint.smdl"]
    art.ok = row["status"] == "ok" and row["within_bound"] is not False
    return art


def _run_point_star(args):
    return run_point(*args)


def mode_sweep(cfg: ExperimentConfig) -> Artifacts:
    out = _prepare_out(cfg.out)
    points_dir = out / "points"
    points_dir.mkdir(exist_ok=True)
    jobs = [(cfg, *p, points_dir) for p in cfg.points()]
    if cfg.workers > 1 and not cfg.solver.deterministic_reduction:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_point_star, jobs))
    else:
        rows = [_run_point_star(j) for j in jobs]
    art = Artifacts("sweep", rows=rows)
    art.files.append(write_rows(out / "sweep.csv", POINT_COLUMNS, rows))
    slopes = slope_rows(rows)
    art.files.append(write_rows(out / "slopes.csv", SLOPE_COLUMNS, slopes))
    failed = [r for r in rows if r["status"] != "ok"]
    violated = [r for r in rows if r["within_bound"] is False]
    art.summary = (f"{len(rows)} points, {len(failed)} failed, {len(violated)} resolved points above the bound\n"
                   + "".join(f"failed: re={r['re']:g} profile={r['profile']} nz={r['nz']}: {r['error']}\n"
                             for r in failed))
    (out / "summary.txt").write_text(art.summary)
    art.ok = not failed and not violated
    return art


def mode_bounds(cfg: ExperimentConfig) -> Artifacts:
    out = _prepare_out(cfg.out)
    reports, corollaries = [], []
    for re, delta, alpha, kind, nz in cfg.points():
        domain, _ = build_problem(cfg, re, delta, nz)
        profile = build_profile(kind, alpha, cfg.value, cfg.table, domain)
        reports.append(_bounds.theorem_bound(domain, profile))
        co = _corollary(domain, profile)
        if co is not None:
            corollaries.append(co)
    _bounds.reports_to_csv(reports, out / "bounds.csv")
    art = Artifacts("bounds", files=[out / "bounds.csv"])
    if corollaries:
        _bounds.reports_to_csv(corollaries, out / "corollaries.csv")
        art.files.append(out / "corollaries.csv")
    rows = [dict(r.row(), nz="", delta=r.delta) for r in reports]
    rows = [dict(r, theorem_model_term=r["model_term"], corollary_model_term="") for r in rows]
    rows += [dict(r.row(), nz="", theorem_model_term="", corollary_model_term=r.model_term) for r in corollaries]
    art.files.append(write_rows(out / "slopes.csv", SLOPE_COLUMNS, slope_rows(rows)))
    art.summary = "\n\n".join(r.derivation() for r in reports + corollaries) + "\n"
    (out / "derivations.txt").write_text(art.summary)
    art.files.append(out / "derivations.txt")
    art.rows = [r.row() for r in reports]
    return art


def mode_damping_table(cfg: ExperimentConfig) -> Artifacts:
    out = _prepare_out(cfg.out)
    domain, _ = build_problem(cfg)
    kinds = cfg.sweep_profile or (cfg.profile,)
    alphas = cfg.sweep_alpha or (cfg.alpha,)
    columns, data = ["z"], []
    z = None
    for kind in kinds:
        for alpha in (alphas if kind in ("algebraic", "hermite", "beta_w", "beta_d") else (alphas[0],)):
            profile = build_profile(kind, alpha, cfg.value, cfg.table, domain)
            z, beta = damping_table(profile, domain, cfg.damping_samples)
            columns.append(profile.label)
            data.append(beta)
    rows = [[float(z[i])] + [float(b[i]) for b in data] for i in range(len(z))]
    art = Artifacts("damping-table", files=[write_rows(out / "damping_table.csv", columns, rows)])
    art.rows = [dict(zip(columns, r)) for r in rows]
    return art


def mode_verify(cfg: ExperimentConfig) -> Artifacts:
    from .verify import VERIFY_COLUMNS, run_checks

    out = _prepare_out(cfg.out)
    results = run_checks(out)
    art = Artifacts("verify", files=[write_rows(out / "verify.csv", VERIFY_COLUMNS, [r.row() for r in results])])
    art.summary = "".join(f"{'PASS' if r.passed else 'FAIL'}  {r.module}: {r.check} ({r.detail})\n" for r in results)
    art.ok = all(r.passed for r in results)
    return art


_MODES = {
    "run": mode_run,
    "sweep": mode_sweep,
    "bounds": mode_bounds,
    "damping-table": mode_damping_table,
    "verify": mode_verify,
}


def run_experiment(cfg: ExperimentConfig) -> Artifacts:
    return _MODES[cfg.mode](cfg)


def with_overrides(cfg: ExperimentConfig, mode=None, out=None, seed=None, deterministic=False):
    solver = cfg.solver
    if seed is not None:
        solver = replace(solver, seed=int(seed))
    if deterministic:
        solver = replace(solver, deterministic_reduction=True)
    return replace(cfg, mode=mode or cfg.mode, out=Path(out) if out is not None else cfg.out, solver=solver)


def default_config(mode: str = "run") -> ExperimentConfig:
    return ExperimentConfig(mode=mode)

"""Upper bounds on the time-averaged dissipation of the damped model.

The generic estimate reads

    <eps> <= [c1 + c2 (C_s delta / L)^2 Re^3 (1/L) int_{L-gL}^{L} beta dz] U^3 / L

with explicit constants obtained by following the energy argument with
gamma = kappa / (5.1 Re):

* prefactor  m  = min(1/2 - (5/2) gamma Re, 1/3)
* c1 = (19/6 + 1 / (2 gamma Re)) / m       (nonlinear term + nu/(2 gamma) U^2/L^2)
* c2 = (1/3) (gamma Re)^-3 / m              (from int beta |grad Phi|^3 = U^3/(gamma^3 L) int beta)

At kappa = 1: m = 1/102, c1 = 583.1, c2 = 5.1^3 / 3 * 102 = 4510.134.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict

from .core import STRIP_DIVISOR, DomainParams
from .damping import DampingProfile, algebraic, c_alpha, hermite, leading_re_exponent, strip_integral
from .exceptions import PreconditionError

COROLLARY_KINDS = ("algebraic_3_2", "hermite_3_4", "hermite_alpha1_3_5")
REPORT_COLUMNS = ("kind", "profile", "alpha", "re", "gamma", "delta", "c_s", "c1", "c2",
                  "strip_integral_value", "model_term", "bound_value", "scaling_exponent")


@dataclass(frozen=True)
class TracedConstants:
    m: float
    c1: float
    c2: float
    trace: tuple[str, ...]


def traced_constants(kappa: float = 1.0) -> TracedConstants:
    gre = kappa / STRIP_DIVISOR
    if not gre < 0.2:
        raise PreconditionError("gamma Re must stay below 1/5 for the prefactor to be positive")
    m = min(0.5 - 2.5 * gre, 1.0 / 3.0)
    if not m > 0:
        raise PreconditionError(f"kappa={kappa:g} gives a nonpositive prefactor {m:g}")
    viscous_part = 1.0 / (2.0 * gre)
    c1 = (19.0 / 6.0 + viscous_part) / m
    c2 = (1.0 / 3.0) / gre ** 3 / m
    trace = (
        f"gamma*Re = kappa/{STRIP_DIVISOR} = {gre:.12g}",
        f"m = min(1/2 - 5/2*gamma*Re, 1/3) = {m:.12g}",
        f"c1 = (19/6 + 1/(2 gamma Re)) / m = (19/6 + {viscous_part:.12g}) / m = {c1:.12g}",
        f"c2 = (1/3) (gamma Re)^-3 / m = {c2:.12g}",
    )
    return TracedConstants(m, c1, c2, trace)


@dataclass(frozen=True)
class BoundReport:
    kind: str
    profile: str
    alpha: int
    re: float
    gamma: float
    delta: float
    c_s: float
    c1: float
    c2: float
    strip_integral_value: float
    model_term: float
    bound_value: float
    scaling_exponent: int | None
    U: float = 1.0
    L: float = 1.0
    trace: tuple[str, ...] = field(default=(), compare=False)

    @property
    def base_term(self) -> float:
        """c1 U^3 / L."""
        return self.c1 * self.U ** 3 / self.L

    def row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in REPORT_COLUMNS}

    def derivation(self) -> str:
        lines = [f"{self.kind} bound for {self.profile} at Re = {self.re:.12g}"]
        lines += [f"  {t}" for t in self.trace]
        lines.append(f"  strip integral (1/L) int beta = {self.strip_integral_value / self.L:.12g}")
        lines.append(f"  model term = {self.model_term:.12g} U^3/L")
        lines.append(f"  bound = (c1 + model term) U^3/L = {self.bound_value:.12g}")
        if self.scaling_exponent is not None:
            lines.append(f"  model term ~ Re^{self.scaling_exponent}")
        return "\n".join(lines)


def _model_prefactor(domain: DomainParams, c2: float) -> float:
    """c2 (C_s delta / L)^2 Re^3 / L, to be multiplied by the strip integral."""
    return c2 * (domain.model_length / domain.L) ** 2 * domain.re ** 3 / domain.L


def theorem_bound(domain: DomainParams, profile: DampingProfile) -> BoundReport:
    """Evaluate the generic bound with the traced constants."""
    if not domain.gamma * domain.re < 0.2:
        raise PreconditionError("gamma Re >= 1/5: the viscous prefactor is not positive")
    tc = traced_constants(domain.kappa)
    si = float(strip_integral(profile, domain))
    model = _model_prefactor(domain, tc.c2) * si
    scale = domain.U ** 3 / domain.L
    return BoundReport(
        kind="theorem", profile=profile.label, alpha=profile.alpha, re=domain.re,
        gamma=domain.gamma, delta=domain.delta, c_s=domain.c_s, c1=tc.c1, c2=tc.c2,
        strip_integral_value=si, model_term=model, bound_value=(tc.c1 + model) * scale,
        scaling_exponent=leading_re_exponent(profile), U=domain.U, L=domain.L,
        trace=tc.trace + (f"model term = c2 (C_s delta/L)^2 Re^3 (1/L) int beta = {model:.12g}",),
    )


def corollary_bound(domain: DomainParams, kind: str, alpha: int = 2) -> BoundReport:
    """Closed-form corollary bounds.

    ``algebraic_3_2``      beta_w: exact strip integral L gamma (Re gamma)^a / (a+1), model ~ Re^2
    ``hermite_3_4``        beta_d, a >= 2: strip integral <= C_a L gamma^(a+1) and
                           gamma^(a-2) <= 1, model term Re independent
    ``hermite_alpha1_3_5`` beta_d, a = 1: strip integral <= L gamma^2 / 2, model ~ Re
    """
    if kind not in COROLLARY_KINDS:
        raise PreconditionError(f"unknown corollary {kind!r}; expected one of {COROLLARY_KINDS}")
    tc = traced_constants(domain.kappa)
    gre = domain.gamma * domain.re
    cs_l = (domain.model_length / domain.L) ** 2
    L, g = domain.L, domain.gamma
    if kind == "algebraic_3_2":
        if alpha < 0:
            raise PreconditionError("alpha must be nonnegative")
        si = L * g * gre ** alpha / (alpha + 1)
        model = tc.c2 * cs_l * gre ** (alpha + 1) / (alpha + 1) * domain.re ** 2
        label, exponent = algebraic(alpha).label, 2
        extra = f"Re^3 int beta_w / L = (gamma Re)^(a+1) Re^2 / (a+1)"
    elif kind == "hermite_3_4":
        if alpha < 2:
            raise PreconditionError("the Re-independent hermite bound needs alpha >= 2")
        if not g < 1:
            raise PreconditionError("gamma^(alpha-2) <= 1 needs gamma < 1 (Re >= 1/5.1)")
        ca = c_alpha(alpha)
        si = ca * L * g ** (alpha + 1)
        model = tc.c2 * cs_l * gre ** 3 * ca
        label, exponent = hermite(alpha).label, 0
        extra = f"C_alpha = {ca:.12g}; Re^3 gamma^(a+1) = (gamma Re)^3 gamma^(a-2) <= (gamma Re)^3"
    else:
        if alpha != 1:
            raise PreconditionError("this corollary fixes alpha = 1")
        ca = c_alpha(1)
        si = ca * L * g ** 2
        model = tc.c2 * cs_l * gre ** 2 * ca * domain.re
        label, exponent = hermite(1).label, 1
        extra = f"C_1 = {ca:.12g}; Re^3 gamma^2 = (gamma Re)^2 Re"
    scale = domain.U ** 3 / domain.L
    return BoundReport(
        kind=kind, profile=label, alpha=alpha, re=domain.re, gamma=g, delta=domain.delta,
        c_s=domain.c_s, c1=tc.c1, c2=tc.c2, strip_integral_value=si, model_term=model,
        bound_value=(tc.c1 + model) * scale, scaling_exponent=exponent, U=domain.U, L=domain.L,
        trace=tc.trace + (extra, f"model term = {model:.12g}"),
    )


def corollary_for(profile: DampingProfile) -> str | None:
    if profile.kind == "algebraic":
        return "algebraic_3_2"
    if profile.kind == "hermite":
        if profile.alpha >= 2:
            return "hermite_3_4"
        if profile.alpha == 1:
            return "hermite_alpha1_3_5"
    return None


@dataclass(frozen=True)
class ReferenceRates:
    boundary_layer: float
    no_boundary_layer: float


def reference_rates(domain: DomainParams) -> ReferenceRates:
    """Undamped Smagorinsky rates: [1 + C_s^2 (delta/L)^2 (1 + Re)^2] U^3/L
    with boundary layers and U^3/L without."""
    scale = domain.U ** 3 / domain.L
    bl = (1.0 + domain.c_s ** 2 * (domain.delta / domain.L) ** 2 * (1.0 + domain.re) ** 2) * scale
    return ReferenceRates(bl, scale)


def reports_to_csv(reports, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        row = r.row()
        writer.writerow([_cell(row[c]) for c in REPORT_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _cell(x):
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)


def loglog_slope(res, values) -> float:
    """Least-squares slope of log(values) against log(res)."""
    xs = [math.log(r) for r in res]
    ys = [math.log(v) for v in values]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise PreconditionError("slope fit needs at least two distinct Re values")
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx

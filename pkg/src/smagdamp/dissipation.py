"""Instantaneous and time-averaged energy dissipation of the damped model."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DomainParams, Grid, VelocityField
from .damping import DampingProfile, eval_beta
from .exceptions import SequencingError
from .operators import center_velocity, gradient_magnitude

CSV_COLUMNS = ("time", "ke", "eps_viscous", "eps_model", "eps_total", "running_avg")


def _sum(a, deterministic: bool) -> float:
    if deterministic:
        return math.fsum(np.ravel(a))
    return float(np.sum(a))


def eps_instant(field: VelocityField, profile: DampingProfile, domain: DomainParams, grid: Grid,
                deterministic: bool = False, beta_c=None, lid: float | None = None) -> tuple[float, float]:
    """Volume-averaged viscous and model dissipation,
    nu |grad u|^2 and (C_s delta)^2 beta |grad u|^3, by the midpoint rule
    over cell centres. ``lid`` overrides the lid speed U in the wall ghosts."""
    lid = domain.U if lid is None else lid
    gmag = gradient_magnitude(field.u, field.v, field.w, grid, lid)
    if beta_c is None:
        beta_c = np.asarray(eval_beta(profile, grid.z_centers(), domain))
    g2 = gmag * gmag
    vol = grid.cell_volume
    visc = domain.nu * _sum(g2, deterministic) * vol / domain.volume
    model = domain.model_length ** 2 * _sum(beta_c * g2 * gmag, deterministic) * vol / domain.volume
    return visc, model


def kinetic_energy(field: VelocityField, grid: Grid, deterministic: bool = False) -> float:
    """1/2 sum over cells of |u|^2 times the cell volume, with the face
    components averaged to the centres."""
    uc, vc, wc = center_velocity(field.u, field.v, field.w)
    return 0.5 * grid.cell_volume * _sum(uc * uc + vc * vc + wc * wc, deterministic)


@dataclass(frozen=True)
class DissipationRecord:
    time: float
    kinetic_energy: float
    eps_viscous: float
    eps_model: float
    running_average: float

    @property
    def eps_total(self) -> float:
        return self.eps_viscous + self.eps_model

    def as_row(self) -> tuple:
        return (self.time, self.kinetic_energy, self.eps_viscous, self.eps_model,
                self.eps_total, self.running_average)


@dataclass
class DissipationSeries:
    """Time series of records with a trapezoidal running time average.

    The average at time T is (1 / (T - t0)) * integral of eps_total from the
    first sample time t0 to T; with a single sample it is that sample.
    """

    records: list[DissipationRecord] = field(default_factory=list)
    _integral: float = 0.0

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def last(self) -> DissipationRecord | None:
        return self.records[-1] if self.records else None

    def accumulate(self, time: float, kinetic_energy: float, eps_viscous: float,
                   eps_model: float) -> DissipationRecord:
        total = eps_viscous + eps_model
        prev = self.last
        if prev is None:
            avg = total
        else:
            if not time > prev.time:
                raise SequencingError(f"sample time {time!r} does not follow {prev.time!r}")
            self._integral += 0.5 * (prev.eps_total + total) * (time - prev.time)
            avg = self._integral / (time - self.records[0].time)
        rec = DissipationRecord(time, kinetic_energy, eps_viscous, eps_model, avg)
        self.records.append(rec)
        return rec

    @property
    def running_average(self) -> float:
        return self.last.running_average if self.records else math.nan

    def limsup_proxy(self, fraction: float = 0.25) -> float:
        """Largest running average over the trailing ``fraction`` of the
        horizon."""
        if not self.records:
            return math.nan
        t0, t1 = self.records[0].time, self.records[-1].time
        cut = t1 - fraction * (t1 - t0)
        return max(r.running_average for r in self.records if r.time >= cut)

    def cauchy_spread(self, fraction: float = 0.25) -> float:
        """max - min of the running average over the trailing window."""
        t0, t1 = self.records[0].time, self.records[-1].time
        cut = t1 - fraction * (t1 - t0)
        tail = [r.running_average for r in self.records if r.time >= cut]
        return max(tail) - min(tail)

    def to_csv(self, path) -> None:
        write_series_csv(self, path)


def accumulate(series: DissipationSeries, sample) -> DissipationRecord:
    """Append ``sample`` = (time, ke, eps_viscous, eps_model) to ``series``."""
    return series.accumulate(*sample)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(series: DissipationSeries, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in series:
            writer.writerow([_fmt(x) for x in rec.as_row()])


def read_series_csv(path) -> DissipationSeries:
    series = DissipationSeries()
    with Path(path).open() as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            series.accumulate(float(row["time"]), float(row["ke"]), float(row["eps_viscous"]),
                              float(row["eps_model"]))
    return series

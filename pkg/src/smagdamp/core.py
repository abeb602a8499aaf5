"""Domain parameters, the staggered grid and the velocity container."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import GridError, ParameterError

#: denominator of the default strip fraction, gamma = kappa / (STRIP_DIVISOR * Re)
STRIP_DIVISOR = 5.1


@dataclass(frozen=True)
class DomainParams:
    """Cubic box (0, L)^3 with a lid moving at speed U in x at z = L.

    ``re`` and ``gamma`` are derived; build instances with :func:`make_domain`.
    """

    L: float
    U: float
    nu: float
    delta: float
    c_s: float
    kappa: float = 1.0
    re: float = field(init=False)
    gamma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "re", self.U * self.L / self.nu)
        object.__setattr__(self, "gamma", self.kappa / (STRIP_DIVISOR * self.re))

    @property
    def model_length(self) -> float:
        """C_s * delta."""
        return self.c_s * self.delta

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def strip_width(self) -> float:
        return self.gamma * self.L

    def with_re(self, re: float) -> "DomainParams":
        """Same box and lid speed, viscosity rescaled to the requested Re."""
        return make_domain(self.L, self.U, self.U * self.L / re, self.delta, self.c_s, self.kappa)

    def with_delta(self, delta: float) -> "DomainParams":
        return make_domain(self.L, self.U, self.nu, delta, self.c_s, self.kappa)


def make_domain(L, U, nu, delta, c_s=0.1, kappa=1.0) -> DomainParams:
    """Validate inputs and return a :class:`DomainParams`.

    ``kappa`` scales the near-lid strip, gamma = kappa / (5.1 Re); the
    energy estimates need gamma * Re < 1/5.
    """
    values = {"L": L, "U": U, "nu": nu, "delta": delta, "c_s": c_s, "kappa": kappa}
    for name, value in values.items():
        if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
            raise ParameterError(f"{name} must be a finite number, got {value!r}")
        if value <= 0:
            raise ParameterError(f"{name} must be positive, got {value!r}")
    if kappa > 1:
        raise ParameterError(f"kappa must lie in (0, 1], got {kappa!r}")
    if delta >= L:
        raise ParameterError(f"model length delta={delta!r} must be smaller than L={L!r}")
    dom = DomainParams(float(L), float(U), float(nu), float(delta), float(c_s), float(kappa))
    if dom.gamma * dom.re >= 0.2:
        raise ParameterError("gamma * Re must stay below 1/5")
    return dom


@dataclass(frozen=True)
class Grid:
    """Uniform MAC grid on the box.

    Pressure lives at cell centres ``(nx, ny, nz)``. ``u`` sits on x-faces and
    ``v`` on y-faces, both ``(nx, ny, nz)``; ``w`` sits on z-faces and carries
    the two wall faces, ``(nx, ny, nz + 1)``. x and y are periodic.
    """

    nx: int
    ny: int
    nz: int
    L: float
    gamma: float = 0.0

    @property
    def hx(self) -> float:
        return self.L / self.nx

    @property
    def hy(self) -> float:
        return self.L / self.ny

    @property
    def hz(self) -> float:
        return self.L / self.nz

    @property
    def spacing(self) -> tuple[float, float, float]:
        return self.hx, self.hy, self.hz

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.nx, self.ny, self.nz

    @property
    def cell_volume(self) -> float:
        return self.hx * self.hy * self.hz

    @property
    def cells_in_strip(self) -> float:
        return self.nz * self.gamma

    @property
    def strip_resolved(self) -> bool:
        """At least two cells across the gamma*L strip."""
        return self.cells_in_strip >= 2.0

    def z_centers(self) -> np.ndarray:
        return self.L * (np.arange(self.nz) + 0.5) / self.nz

    def z_faces(self) -> np.ndarray:
        return self.L * np.arange(self.nz + 1) / self.nz

    def x_faces(self) -> np.ndarray:
        return self.L * np.arange(self.nx) / self.nx

    def x_centers(self) -> np.ndarray:
        return self.L * (np.arange(self.nx) + 0.5) / self.nx

    def y_faces(self) -> np.ndarray:
        return self.L * np.arange(self.ny) / self.ny

    def y_centers(self) -> np.ndarray:
        return self.L * (np.arange(self.ny) + 0.5) / self.ny


def make_grid(domain: DomainParams, nx: int, ny: int, nz: int) -> Grid:
    for name, n in (("nx", nx), ("ny", ny), ("nz", nz)):
        if int(n) != n or n < 4:
            raise GridError(f"{name} must be an integer >= 4, got {n!r}")
    return Grid(int(nx), int(ny), int(nz), domain.L, domain.gamma)


@dataclass
class VelocityField:
    """Staggered velocity and cell-centred pressure at a given time."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray
    time: float = 0.0

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "VelocityField":
        nx, ny, nz = grid.shape
        return cls(
            np.zeros((nx, ny, nz)),
            np.zeros((nx, ny, nz)),
            np.zeros((nx, ny, nz + 1)),
            np.zeros((nx, ny, nz)),
            time,
        )

    @classmethod
    def couette(cls, grid: Grid, U: float, time: float = 0.0) -> "VelocityField":
        """Linear shear u = U z / L sampled at the u-points."""
        f = cls.zeros(grid, time)
        f.u[...] = U * grid.z_centers() / grid.L
        return f

    def copy(self) -> "VelocityField":
        return replace(self, u=self.u.copy(), v=self.v.copy(), w=self.w.copy(), p=self.p.copy())

    def check_shapes(self, grid: Grid) -> None:
        nx, ny, nz = grid.shape
        expected = {"u": (nx, ny, nz), "v": (nx, ny, nz), "w": (nx, ny, nz + 1), "p": (nx, ny, nz)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise GridError(f"{name} has shape {getattr(self, name).shape}, grid expects {shape}")

"""Binary checkpoints.

Layout, all little-endian::

    b"SMDL"                      magic
    uint32                       format version (1)
    uint32 x 3                   nx, ny, nz
    float64 x 6                  L, U, nu, delta, c_s, kappa
    float64                      simulation time
    float64[nz][ny][nx]          u  (x-faces)
    float64[nz][ny][nx]          v  (y-faces)
    float64[nz+1][ny][nx]        w  (z-faces, walls included)
    float64[nz][ny][nx]          p  (cell centres)

Arrays are z-major: z is the slowest index, x the fastest.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import VelocityField, make_domain, make_grid
from .exceptions import CheckpointError

MAGIC = b"SMDL"
VERSION = 1
_HEADER = struct.Struct("<4sI3I7d")


def write_checkpoint(path, field: VelocityField, domain, grid) -> None:
    header = _HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny, grid.nz, domain.L, domain.U, domain.nu,
                          domain.delta, domain.c_s, domain.kappa, float(field.time))
    parts = [header]
    for arr in (field.u, field.v, field.w, field.p):
        parts.append(np.ascontiguousarray(np.transpose(arr, (2, 1, 0)), dtype="<f8").tobytes())
    try:
        Path(path).write_bytes(b"".join(parts))
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc


def read_checkpoint(path):
    """Return ``(field, domain, grid)``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, nx, ny, nz, L, U, nu, delta, c_s, kappa, time = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    domain = make_domain(L, U, nu, delta, c_s, kappa)
    grid = make_grid(domain, nx, ny, nz)
    shapes = [(nz, ny, nx), (nz, ny, nx), (nz + 1, ny, nx), (nz, ny, nx)]
    expected = _HEADER.size + 8 * sum(int(np.prod(s)) for s in shapes)
    if len(data) != expected:
        raise CheckpointError(f"{path}: expected {expected} bytes, found {len(data)}")
    offset = _HEADER.size
    arrays = []
    for shape in shapes:
        n = int(np.prod(shape))
        a = np.frombuffer(data, dtype="<f8", count=n, offset=offset).reshape(shape)
        arrays.append(np.ascontiguousarray(np.transpose(a, (2, 1, 0)), dtype=float))
        offset += 8 * n
    return VelocityField(*arrays, time=time), domain, grid

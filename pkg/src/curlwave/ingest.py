"""Sampled periodic fields <-> Fourier mode lists, plus the on-disk formats.

Sample ``(j, k, l)`` of an ``nx x ny x nz`` grid sits at
``(j bx/nx, k by/ny, l bz/nz)``. Mode amplitudes follow the series
convention ``F(x) = sum_m a_m exp(i w_m . x)``, so the forward transform is
divided by the number of samples. Signed indices run over
``-(n//2) ... ceil(n/2) - 1``; on even grids the Nyquist bin is taken as the
negative frequency, so exact round trips need ``|j| < n/2``.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyGrid, FormatError, NonFiniteSample, OffLatticeMode
from .propagator import (Medium, ModalSolution, Mode, evolve_modes,
                         pack_fields, unpack_fields)
from .spectral_core import WaveVector

DEFAULT_TRUNC_TOL = 1e-12
GRID_MAGIC = b"CWF1"
_HEADER = struct.Struct("<4s3I3d2d")


@dataclass(frozen=True)
class FieldGrid:
    """Real H and E sampled on a uniform periodic grid, arrays shaped (nx, ny, nz, 3)."""

    periods: tuple[float, float, float]
    H: np.ndarray
    E: np.ndarray
    medium: Medium = field(default_factory=Medium)

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        E = np.array(self.E, dtype=float)
        if H.ndim != 4 or H.shape[-1] != 3 or H.shape != E.shape:
            raise ValueError(f"H and E must share shape (nx, ny, nz, 3); got {H.shape}, {E.shape}")
        if H.size == 0:
            raise EmptyGrid("grid has no samples")
        if not (np.isfinite(H).all() and np.isfinite(E).all()):
            raise NonFiniteSample("grid contains NaN or infinite samples")
        periods = tuple(float(b) for b in self.periods)
        if len(periods) != 3 or not all(math.isfinite(b) and b > 0 for b in periods):
            raise ValueError(f"periods must be three positive reals, got {self.periods!r}")
        H.flags.writeable = False
        E.flags.writeable = False
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "periods", periods)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.H.shape[:3]

    def points(self) -> np.ndarray:
        """Sample coordinates flattened in z-fastest order, shape (n, 3)."""
        return grid_points(self.shape, self.periods)


def grid_points(shape, periods, offset=(0.0, 0.0, 0.0)) -> np.ndarray:
    axes = [(np.arange(n) + o) * (b / n) for n, b, o in zip(shape, periods, offset)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def signed_indices(n: int) -> np.ndarray:
    return np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(int)


def lattice_index(w: WaveVector, periods, atol: float = 1e-9) -> tuple[int, int, int]:
    """Integer ``(j, k, l)`` with ``w = 2 pi (j/bx, k/by, l/bz)``."""
    idx = []
    for comp, b in zip((w.wx, w.wy, w.wz), periods):
        x = comp * b / (2 * math.pi)
        j = round(x)
        if abs(x - j) > atol * max(1.0, abs(x)):
            raise OffLatticeMode(f"wavevector {w} is not on the lattice of periods {tuple(periods)}")
        idx.append(int(j))
    return tuple(idx)


def grid_to_modes(grid: FieldGrid, medium: Medium | None = None,
                  trunc_tol: float = DEFAULT_TRUNC_TOL) -> list[Mode]:
    """Fourier modes of the packed field, dropping ``|a| < trunc_tol * max|a|``."""
    medium = grid.medium if medium is None else medium
    nx, ny, nz = grid.shape
    F = pack_fields(grid.H, grid.E, medium)
    A = np.fft.fftn(F, axes=(0, 1, 2)) / (nx * ny * nz)
    mag = np.linalg.norm(A, axis=-1)
    peak = mag.max()
    if peak == 0.0:
        return []
    keep = np.argwhere(mag >= trunc_tol * peak)
    sx, sy, sz = signed_indices(nx), signed_indices(ny), signed_indices(nz)
    modes = []
    for i, j, k in keep:
        w = WaveVector.from_lattice(sx[i], sy[j], sz[k], grid.periods)
        modes.append(Mode(w, A[i, j, k]))
    return modes


def synthesize(modes: Iterable[Mode], shape: Sequence[int], periods,
               medium: Medium) -> FieldGrid:
    """Inverse of :func:`grid_to_modes` for band-limited mode lists."""
    nx, ny, nz = (int(n) for n in shape)
    coeffs = np.zeros((nx, ny, nz, 3), dtype=complex)
    for m in modes:
        j, k, l = lattice_index(m.w, periods)
        for idx, n in zip((j, k, l), (nx, ny, nz)):
            if not -(n // 2) <= idx <= (n + 1) // 2 - 1:
                raise OffLatticeMode(f"index {(j, k, l)} not representable on a {(nx, ny, nz)} grid")
        coeffs[j % nx, k % ny, l % nz] += m.a
    F = np.fft.ifftn(coeffs, axes=(0, 1, 2)) * (nx * ny * nz)
    H, E = unpack_fields(F, medium)
    return FieldGrid(tuple(periods), H, E, medium)


def modes_to_grid(sol: ModalSolution, t: float, shape: Sequence[int]) -> FieldGrid:
    """Real-space H, E of the solution at time ``t`` on a grid of ``shape``."""
    return synthesize(evolve_modes(sol, t), shape, sol.periods, sol.medium)


# ---------------------------------------------------------------- file formats

def write_grid(path, grid: FieldGrid) -> None:
    nx, ny, nz = grid.shape
    header = _HEADER.pack(GRID_MAGIC, nx, ny, nz, *grid.periods,
                          grid.medium.mu, grid.medium.eps)
    body = np.concatenate([grid.H, grid.E], axis=-1).astype("<f8", copy=False)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(body).tobytes(order="C"))


def read_grid(path) -> FieldGrid:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"file too short for header ({len(data)} bytes)",
                          offset=len(data), path=path)
    magic, nx, ny, nz, bx, by, bz, mu, eps = _HEADER.unpack_from(data, 0)
    if magic != GRID_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GRID_MAGIC!r}", offset=0, path=path)
    if min(nx, ny, nz) == 0:
        raise EmptyGrid(f"{path}: grid dimensions {(nx, ny, nz)} contain a zero")
    expected = _HEADER.size + nx * ny * nz * 6 * 8
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes for a {nx}x{ny}x{nz} grid, found {len(data)}",
                          offset=min(len(data), expected), path=path)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(nx, ny, nz, 6)
    try:
        medium = Medium(mu, eps)
    except ValueError as exc:
        raise FormatError(str(exc), offset=_HEADER.size - 16, path=path) from None
    try:
        return FieldGrid((bx, by, bz), body[..., :3], body[..., 3:], medium)
    except NonFiniteSample:
        raise
    except ValueError as exc:
        raise FormatError(str(exc), offset=16, path=path) from None


@dataclass
class ModeList:
    """Contents of a text mode-list file."""

    indices: list[tuple[int, int, int]]
    amplitudes: np.ndarray
    periods: tuple[float, float, float] = (1.0, 1.0, 1.0)
    medium: Medium = field(default_factory=Medium)

    def modes(self) -> list[Mode]:
        return [Mode(WaveVector.from_lattice(*idx, self.periods), a)
                for idx, a in zip(self.indices, self.amplitudes)]

    @classmethod
    def from_modes(cls, modes: Iterable[Mode], periods, medium: Medium) -> "ModeList":
        modes = list(modes)
        idx = [lattice_index(m.w, periods) for m in modes]
        amps = np.array([m.a for m in modes], dtype=complex).reshape(-1, 3)
        return cls(idx, amps, tuple(float(b) for b in periods), medium)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_mode_list(path, modes: ModeList, alphas=None) -> None:
    """Write a mode list; optional per-mode ``alphas`` go in a trailing comment."""
    lines = [
        "# j k l Re(ax) Im(ax) Re(ay) Im(ay) Re(az) Im(az)",
        "periods " + " ".join(_fmt(b) for b in modes.periods),
        f"medium {_fmt(modes.medium.mu)} {_fmt(modes.medium.eps)}",
    ]
    for n, ((j, k, l), a) in enumerate(zip(modes.indices, modes.amplitudes)):
        cols = [str(j), str(k), str(l)]
        for c in a:
            cols += [_fmt(c.real), _fmt(c.imag)]
        line = " ".join(cols)
        if alphas is not None:
            al = alphas[n]
            line += " # alpha " + " ".join(f"{_fmt(c.real)} {_fmt(c.imag)}" for c in al)
        lines.append(line)
    Path(path).write_text("\n".join(lines) + "\n")


def read_mode_list(path) -> ModeList:
    periods = (1.0, 1.0, 1.0)
    medium = Medium()
    indices, amps = [], []
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].lower()
        try:
            if head == "periods":
                if len(parts) != 4:
                    raise ValueError("'periods' needs three values")
                periods = tuple(float(p) for p in parts[1:])
                if not all(math.isfinite(b) and b > 0 for b in periods):
                    raise ValueError("periods must be positive and finite")
            elif head == "medium":
                if len(parts) != 3:
                    raise ValueError("'medium' needs two values (mu eps)")
                medium = Medium(float(parts[1]), float(parts[2]))
            else:
                if len(parts) != 9:
                    raise ValueError(f"mode line needs 9 columns, got {len(parts)}")
                idx = tuple(int(p) for p in parts[:3])
                vals = [float(p) for p in parts[3:]]
                if not all(math.isfinite(v) for v in vals):
                    raise ValueError("non-finite amplitude")
                indices.append(idx)
                amps.append([complex(vals[0], vals[1]), complex(vals[2], vals[3]),
                             complex(vals[4], vals[5])])
        except ValueError as exc:
            raise FormatError(str(exc), line=lineno, path=path) from None
    if len(set(indices)) != len(indices):
        raise FormatError("duplicate (j, k, l) entries", path=path)
    return ModeList(indices, np.array(amps, dtype=complex).reshape(-1, 3), periods, medium)

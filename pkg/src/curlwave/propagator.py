"""Exact time evolution of periodic Maxwell fields by modal summation.

The real pair (H, E) is packed into ``F = sqrt(mu) H + i sqrt(eps) E``, which
obeys ``dF/dt = i curl(F) / sqrt(mu eps)``. Each Fourier mode of ``F`` is
split along the curl eigenvectors; eigen-direction ``d`` then just picks up
the phase ``exp(-t lam_d / sqrt(mu eps))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateWaveVector
from .spectral_core import WaveVector, decompose_mode

DEFAULT_DROP_TOL = 1e-14


@dataclass(frozen=True)
class Medium:
    mu: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        for name in ("mu", "eps"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be finite and > 0, got {val!r}")

    @property
    def c(self) -> float:
        return 1.0 / math.sqrt(self.mu * self.eps)


@dataclass(frozen=True)
class Mode:
    """One Fourier term ``a * exp(i w.x)`` of the packed field."""

    w: WaveVector
    a: np.ndarray

    def __post_init__(self):
        if not isinstance(self.w, WaveVector):
            object.__setattr__(self, "w", WaveVector.from_array(self.w))
        a = np.array(self.a, dtype=complex).reshape(3)
        a.flags.writeable = False
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class Term:
    """Surviving eigen-directions of one mode."""

    w: WaveVector
    lam: np.ndarray    # (k,) complex
    alpha: np.ndarray  # (k,) complex
    v: np.ndarray      # (k, 3) complex


@dataclass(frozen=True)
class ModalSolution:
    medium: Medium
    terms: tuple[Term, ...]
    periods: tuple[float, float, float] = (1.0, 1.0, 1.0)
    # flattened copies of ``terms`` for vectorized evaluation
    _w: np.ndarray = field(init=False, repr=False, compare=False)
    _omega: np.ndarray = field(init=False, repr=False, compare=False)
    _coef: np.ndarray = field(init=False, repr=False, compare=False)
    _owner: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ws, omegas, coefs, owner = [], [], [], []
        scale = 1.0 / math.sqrt(self.medium.mu * self.medium.eps)
        for m, term in enumerate(self.terms):
            for lam, alpha, v in zip(term.lam, term.alpha, term.v):
                ws.append(term.w.array)
                # exp(-t lam / sqrt(mu eps)) with lam purely imaginary
                omegas.append(lam.imag * scale)
                coefs.append(alpha * v)
                owner.append(m)
        set_ = object.__setattr__
        set_(self, "_w", np.array(ws, dtype=float).reshape(-1, 3))
        set_(self, "_omega", np.array(omegas, dtype=float))
        set_(self, "_coef", np.array(coefs, dtype=complex).reshape(-1, 3))
        set_(self, "_owner", np.array(owner, dtype=int))

    @property
    def wavevectors(self) -> list[WaveVector]:
        return [t.w for t in self.terms]


def pack_fields(H, E, medium: Medium) -> np.ndarray:
    """``sqrt(mu) H + i sqrt(eps) E``; works on any trailing-3 array."""
    H = np.asarray(H, dtype=float)
    E = np.asarray(E, dtype=float)
    return math.sqrt(medium.mu) * H + 1j * math.sqrt(medium.eps) * E


def unpack_fields(F, medium: Medium) -> tuple[np.ndarray, np.ndarray]:
    F = np.asarray(F, dtype=complex)
    return F.real / math.sqrt(medium.mu), F.imag / math.sqrt(medium.eps)


def build_solution(
    modes: Iterable[Mode],
    medium: Medium,
    periods: Sequence[float] = (1.0, 1.0, 1.0),
    drop_tol: float = DEFAULT_DROP_TOL,
) -> ModalSolution:
    """Decompose every mode and keep eigen-terms above ``drop_tol``.

    ``drop_tol`` is relative to the largest ``|alpha_d| |v_d|`` in the whole
    solution.
    """
    modes = list(modes)
    seen = set()
    for m in modes:
        key = (m.w.wx, m.w.wy, m.w.wz)
        if key in seen:
            raise DuplicateWaveVector(f"wavevector {key} appears more than once")
        seen.add(key)

    decomposed = []
    largest = 0.0
    for m in modes:
        eig, proj = decompose_mode(m.w, m.a)
        mags = np.abs(proj.alpha) * np.linalg.norm(eig.v, axis=1)
        largest = max(largest, float(mags.max(initial=0.0)))
        decomposed.append((m.w, eig, proj, mags))

    cutoff = drop_tol * largest
    terms = []
    for w, eig, proj, mags in decomposed:
        keep = mags > cutoff
        if not keep.any():
            continue
        terms.append(Term(w, eig.lam[keep].copy(), proj.alpha[keep].copy(),
                          eig.v[keep].copy()))
    return ModalSolution(medium, tuple(terms), tuple(float(b) for b in periods))


def _phases(sol: ModalSolution, t: float, points: np.ndarray) -> np.ndarray:
    theta = points @ sol._w.T - sol._omega * t
    return np.cos(theta) + 1j * np.sin(theta)


def evaluate(sol: ModalSolution, t: float, points) -> np.ndarray:
    """Packed field ``F(t, x)`` at each row of ``points``; returns (n, 3)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if sol._coef.shape[0] == 0:
        return np.zeros((points.shape[0], 3), dtype=complex)
    return _phases(sol, t, points) @ sol._coef


def evaluate_delta(sol: ModalSolution, t: float, points) -> np.ndarray:
    """``F(t, x) - F(0, x)`` using only the oscillating eigen-directions."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    moving = sol._omega != 0.0
    if not moving.any():
        return np.zeros((points.shape[0], 3), dtype=complex)
    w = sol._w[moving]
    space = points @ w.T
    theta = sol._omega[moving] * t
    # exp(i(s - th)) - exp(i s) = exp(i s) * (exp(-i th) - 1), factor kept
    # in the cos/sin form; cos(th) - 1 = -2 sin^2(th/2) avoids cancellation
    factor = -2.0 * np.sin(theta / 2) ** 2 - 1j * np.sin(theta)
    phase = np.cos(space) + 1j * np.sin(space)
    return (phase * factor) @ sol._coef[moving]


def evolve_modes(sol: ModalSolution, t: float) -> list[Mode]:
    """Amplitude of every wavevector at time ``t``."""
    theta = -sol._omega * t
    contrib = (np.cos(theta) + 1j * np.sin(theta))[:, None] * sol._coef
    amps = np.zeros((len(sol.terms), 3), dtype=complex)
    np.add.at(amps, sol._owner, contrib)
    return [Mode(term.w, a) for term, a in zip(sol.terms, amps)]


def modal_energy(modes: Iterable[Mode]) -> float:
    """``sum |a|^2``; equals the mean of ``mu|H|^2 + eps|E|^2`` over a period cell."""
    return float(sum(np.vdot(m.a, m.a).real for m in modes))

"""Independent checks on the modal solution.

Three kinds of evidence are collected here: conservation laws evaluated on
the modal representation (energy, divergence), exact reproduction of two
closed-form reference problems, and a second-order Yee leapfrog scheme whose
error against the analytic field must shrink at the expected rate.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import CflViolation
from .ingest import grid_points, lattice_index
from .propagator import (Medium, ModalSolution, Mode, build_solution, evaluate,
                         evolve_modes, modal_energy, unpack_fields)
from .spectral_core import WaveVector, project

SQ3 = math.sqrt(3.0)
SQ14 = math.sqrt(14.0)
PI = math.pi


# ------------------------------------------------------------ golden problems

@dataclass(frozen=True)
class GoldenProblem:
    name: str
    modes: tuple[Mode, ...]
    periods: tuple[float, float, float]
    medium: Medium
    exact: Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]]

    def solution(self) -> ModalSolution:
        return build_solution(self.modes, self.medium, self.periods)


def _isotropic_exact(t, pts):
    theta = 2 * PI * pts.sum(axis=1) - 2 * SQ3 * PI * t
    c = np.cos(theta)[:, None]
    return c * np.array([SQ3, 0.0, -SQ3]), c * np.array([1.0, -2.0, 1.0])


def isotropic_problem() -> GoldenProblem:
    """H0 = cos(2pi(x+y+z)) (sqrt3, 0, -sqrt3), E0 = cos(2pi(x+y+z)) (1, -2, 1)."""
    w = 2 * PI
    a = np.array([(SQ3 + 1j) / 2, -1j, (-SQ3 + 1j) / 2])
    modes = (Mode(WaveVector(w, w, w), a), Mode(WaveVector(-w, -w, -w), a))
    return GoldenProblem("isotropic", modes, (1.0, 1.0, 1.0), Medium(), _isotropic_exact)


_GENERAL_W = np.array([PI, 2 * PI, -3 * PI])
_GENERAL_R = np.array([5.0, -4.0, -1.0])


def _general_exact(t, pts):
    phase = pts @ _GENERAL_W
    ct, st = math.cos(SQ14 * PI * t), math.sin(SQ14 * PI * t)
    ones = np.ones(3)
    # transverse r-direction part is in phase with the (1,1,1) part
    H = (np.cos(phase) * ct)[:, None] * ones - (np.cos(phase) * st / SQ14)[:, None] * _GENERAL_R
    E = (np.sin(phase) * ct)[:, None] * ones - (np.sin(phase) * st / SQ14)[:, None] * _GENERAL_R
    return H, E


def general_problem() -> GoldenProblem:
    """F0 = (1, 1, 1) exp(i w.x) with w = (pi, 2pi, -3pi)."""
    modes = (Mode(WaveVector(*_GENERAL_W), np.ones(3)),)
    return GoldenProblem("general", modes, (2.0, 1.0, 2.0 / 3.0), Medium(), _general_exact)


def golden_problems() -> list[GoldenProblem]:
    return [isotropic_problem(), general_problem()]


def spacetime_lattice(n: int = 5):
    """``n`` values per axis in [0, 1] for x, y, z and t."""
    s = np.linspace(0.0, 1.0, n)
    X, Y, Z = np.meshgrid(s, s, s, indexing="ij")
    return s.copy(), np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def max_field_deviation(problem: GoldenProblem, sol: ModalSolution | None = None,
                        n: int = 5) -> float:
    sol = problem.solution() if sol is None else sol
    times, pts = spacetime_lattice(n)
    worst = 0.0
    for t in times:
        H, E = unpack_fields(evaluate(sol, t, pts), sol.medium)
        Hx, Ex = problem.exact(t, pts)
        worst = max(worst, float(np.abs(H - Hx).max()), float(np.abs(E - Ex).max()))
    return worst


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tol)


def golden_examples() -> list[Check]:
    """Reproduce both closed-form examples; one :class:`Check` per quantity."""
    checks = []

    iso = isotropic_problem()
    alpha = project(iso.modes[0].w, iso.modes[0].a).alpha
    want = np.array([0.0, (SQ3 - 1j) / 2, 0.0])
    checks.append(Check("isotropic.alpha", float(np.abs(alpha - want).max()), 1e-14))
    checks.append(Check("isotropic.fields", max_field_deviation(iso), 1e-12))

    gen = general_problem()
    w = gen.modes[0].w
    a = gen.modes[0].a
    scalars = [
        ("general.norm", w.norm, PI * SQ14),
        ("general.gamma", w.gamma, PI * math.sqrt(42.0)),
        ("general.s_w", w.s, 0.0),
        ("general.a_dot_r", abs(np.dot(a, w.r)), 0.0),
        ("general.a_dot_w", abs(np.dot(a, w.array)), 0.0),
    ]
    for name, got, ref in scalars:
        checks.append(Check(name, abs(got - ref), 1e-12 * max(1.0, abs(ref))))
    r_dev = float(np.abs(w.r - PI * _GENERAL_R).max())
    checks.append(Check("general.r_w", r_dev, 1e-12 * PI * 5))
    alpha = project(w, a).alpha
    c = 1.0 / (28 * PI**2)
    want = np.array([0.0, -c, -c])
    checks.append(Check("general.alpha", float(np.abs(alpha - want).max() / c), 1e-12))
    checks.append(Check("general.fields", max_field_deviation(gen), 1e-12))
    sol = gen.solution()
    H, E = unpack_fields(evaluate(sol, 0.0, np.zeros((1, 3))), sol.medium)
    dev = max(float(np.abs(H - 1.0).max()), float(np.abs(E).max()))
    checks.append(Check("general.origin_t0", dev, 1e-12))
    return checks


# ------------------------------------------------------------- conservation

def divergence_scale(sol: ModalSolution) -> float:
    """Upper bound on ``|div F|``: ``sum |w| |a|`` over the initial modes."""
    return float(sum(m.w.norm * np.linalg.norm(m.a) for m in evolve_modes(sol, 0.0)))


def check_divergence(sol: ModalSolution, t: float,
                     grid_shape: Sequence[int] = (8, 8, 8)) -> tuple[float, float]:
    """Max-norm of ``div(H(t) - H0)`` and ``div(E(t) - E0)`` sampled on a grid."""
    if not sol.terms:
        return 0.0, 0.0
    a0 = np.array([m.a for m in evolve_modes(sol, 0.0)])
    at = np.array([m.a for m in evolve_modes(sol, t)])
    W = np.array([term.w.array for term in sol.terms])
    d = 1j * np.einsum("mi,mi->m", W, at - a0)
    pts = grid_points(grid_shape, sol.periods)
    theta = pts @ W.T
    div = (np.cos(theta) + 1j * np.sin(theta)) @ d
    return (float(np.abs(div.real).max()) / math.sqrt(sol.medium.mu),
            float(np.abs(div.imag).max()) / math.sqrt(sol.medium.eps))


@dataclass(frozen=True)
class ConservationReport:
    times: np.ndarray
    modal_energy: np.ndarray   # V * sum |a(t)|^2
    quad_energy: np.ndarray    # rectangle rule for int(mu|H|^2 + eps|E|^2)
    div_H_max: float
    div_E_max: float
    stationary_residual: float  # max change of the along-w component of any mode
    longitudinal_modes: int     # modes carrying a nonzero along-w component

    @property
    def energy_t0(self) -> float:
        return float(self.modal_energy[0]) if len(self.modal_energy) else 0.0

    @property
    def energy_t(self) -> float:
        return float(self.modal_energy[-1]) if len(self.modal_energy) else 0.0

    @staticmethod
    def _drift(e) -> float:
        e = np.asarray(e)
        if e.size == 0 or e[0] == 0.0:
            return float(np.abs(e).max(initial=0.0))
        return float(np.abs(e - e[0]).max() / abs(e[0]))

    @property
    def modal_drift(self) -> float:
        return self._drift(self.modal_energy)

    @property
    def quad_drift(self) -> float:
        return self._drift(self.quad_energy)


def _quadrature_shape(sol: ModalSolution) -> tuple[int, int, int]:
    if not sol.terms:
        return (1, 1, 1)
    idx = np.array([lattice_index(t.w, sol.periods) for t in sol.terms])
    return tuple(int(2 * np.abs(idx[:, ax]).max() + 2) for ax in range(3))


def check_energy(sol: ModalSolution, times: Sequence[float],
                 grid_shape: Sequence[int] | None = None,
                 div_shape: Sequence[int] = (8, 8, 8)) -> ConservationReport:
    """Energy and divergence bookkeeping across ``times``.

    The quadrature grid is shifted off the sampling lattice and is fine enough
    to integrate ``|F|^2`` exactly for band-limited solutions.
    """
    times = np.asarray(list(times), dtype=float)
    volume = float(np.prod(sol.periods))
    shape = _quadrature_shape(sol) if grid_shape is None else tuple(grid_shape)
    pts = grid_points(shape, sol.periods, offset=(0.371, 0.193, 0.417))
    a0 = evolve_modes(sol, 0.0)
    modal, quad = [], []
    div_h = div_e = stationary = 0.0
    for t in times:
        at = evolve_modes(sol, t)
        modal.append(volume * modal_energy(at))
        F = evaluate(sol, t, pts)
        quad.append(volume * float(np.mean(np.sum(np.abs(F) ** 2, axis=1))))
        dh, de = check_divergence(sol, t, div_shape)
        div_h, div_e = max(div_h, dh), max(div_e, de)
        for m0, mt in zip(a0, at):
            n = m0.w.norm
            if n > 0:
                stationary = max(stationary, abs(np.dot(m0.w.array, mt.a - m0.a)) / n)
    longitudinal = 0
    for m in a0:
        n = m.w.norm
        if n > 0 and abs(np.dot(m.w.array, m.a)) / n > 1e-12 * max(np.linalg.norm(m.a), 1e-300):
            longitudinal += 1
    return ConservationReport(times, np.array(modal), np.array(quad), div_h, div_e,
                              stationary, longitudinal)


# --------------------------------------------------------------------- FDTD

@dataclass(frozen=True)
class FdtdState:
    """Yee leapfrog state on a periodic box.

    ``E[c]`` holds component ``c`` at time ``t`` on edge midpoints, ``H[c]``
    holds it at ``t + dt/2`` on face centres. Array index ``(i, j, k)`` maps to
    ``(i dx, j dy, k dz)`` plus half a cell along the staggered axes:
    Ex (+x), Ey (+y), Ez (+z); Hx (+y+z), Hy (+x+z), Hz (+x+y).
    """

    E: np.ndarray
    H: np.ndarray
    dt: float
    cell: tuple[float, float, float]
    medium: Medium = field(default_factory=Medium)
    t: float = 0.0
    steps: int = 0

    @property
    def courant(self) -> float:
        return self.medium.c * self.dt * math.sqrt(sum(1.0 / h**2 for h in self.cell))


E_STAGGER = np.array([[0.5, 0, 0], [0, 0.5, 0], [0, 0, 0.5]])
H_STAGGER = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])


def _back(f, ax, h):
    return (f - np.roll(f, 1, axis=ax)) / h


def _fwd(f, ax, h):
    return (np.roll(f, -1, axis=ax) - f) / h


def curl_e(H, cell):
    """Discrete curl of H evaluated at E locations."""
    dx, dy, dz = cell
    Hx, Hy, Hz = H
    return np.stack([
        _back(Hz, 1, dy) - _back(Hy, 2, dz),
        _back(Hx, 2, dz) - _back(Hz, 0, dx),
        _back(Hy, 0, dx) - _back(Hx, 1, dy),
    ])


def curl_h(E, cell):
    """Discrete curl of E evaluated at H locations."""
    dx, dy, dz = cell
    Ex, Ey, Ez = E
    return np.stack([
        _fwd(Ez, 1, dy) - _fwd(Ey, 2, dz),
        _fwd(Ex, 2, dz) - _fwd(Ez, 0, dx),
        _fwd(Ey, 0, dx) - _fwd(Ex, 1, dy),
    ])


def fdtd_step(state: FdtdState) -> FdtdState:
    if state.courant > 1.0 + 1e-12:
        raise CflViolation(f"Courant number {state.courant:.6g} exceeds 1")
    E = state.E + (state.dt / state.medium.eps) * curl_e(state.H, state.cell)
    H = state.H - (state.dt / state.medium.mu) * curl_h(E, state.cell)
    return replace(state, E=E, H=H, t=state.t + state.dt, steps=state.steps + 1)


def _staggered_points(shape, periods, stagger) -> np.ndarray:
    return grid_points(shape, periods, offset=stagger)


def sample_staggered(sol: ModalSolution, shape, t_e: float, t_h: float):
    """Analytic E at ``t_e`` and H at ``t_h`` on the Yee staggering."""
    E = np.empty((3, *shape))
    H = np.empty((3, *shape))
    for c in range(3):
        Fe = evaluate(sol, t_e, _staggered_points(shape, sol.periods, E_STAGGER[c]))
        Fh = evaluate(sol, t_h, _staggered_points(shape, sol.periods, H_STAGGER[c]))
        E[c] = unpack_fields(Fe[:, c], sol.medium)[1].reshape(shape)
        H[c] = unpack_fields(Fh[:, c], sol.medium)[0].reshape(shape)
    return E, H


def stable_dt(cell, medium: Medium, courant: float = 0.5) -> float:
    return courant / (medium.c * math.sqrt(sum(1.0 / h**2 for h in cell)))


def fdtd_init(sol: ModalSolution, n: int, courant: float = 0.5,
              t_final: float | None = None) -> tuple[FdtdState, int]:
    """Initial Yee state with ``n`` cells per axis, and the step count to ``t_final``.

    ``dt`` is shrunk from the Courant limit so that ``t_final`` is hit exactly.
    """
    shape = (n, n, n)
    cell = tuple(b / n for b in sol.periods)
    dt = stable_dt(cell, sol.medium, courant)
    nsteps = 0
    if t_final:
        nsteps = math.ceil(t_final / dt - 1e-12)
        dt = t_final / nsteps
    E, H = sample_staggered(sol, shape, 0.0, dt / 2)
    return FdtdState(E, H, dt, cell, sol.medium), nsteps


def fdtd_error(sol: ModalSolution, state: FdtdState) -> float:
    """Discrete L2 norm of ``(sqrt(mu) dH, sqrt(eps) dE)`` against the analytic field."""
    shape = state.E.shape[1:]
    E, H = sample_staggered(sol, shape, state.t, state.t + state.dt / 2)
    m = state.medium
    sq = m.eps * np.sum((state.E - E) ** 2) + m.mu * np.sum((state.H - H) ** 2)
    cell_volume = float(np.prod(state.cell))
    return math.sqrt(cell_volume * sq)


def run_fdtd(sol: ModalSolution, n: int, t_final: float, courant: float = 0.5) -> float:
    state, nsteps = fdtd_init(sol, n, courant, t_final)
    for _ in range(nsteps):
        state = fdtd_step(state)
    return fdtd_error(sol, state)


def fdtd_convergence(sol: ModalSolution, t_final: float, resolutions: Sequence[int],
                     courant: float = 0.5, threads: int = 1) -> list[tuple[float, float]]:
    """``(h, L2 error)`` per resolution; ``h`` is the x cell size."""
    resolutions = [int(n) for n in resolutions]
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be strictly increasing")
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        errors = list(pool.map(lambda n: run_fdtd(sol, n, t_final, courant), resolutions))
    return [(sol.periods[0] / n, e) for n, e in zip(resolutions, errors)]


def observed_orders(results: Sequence[tuple[float, float]]) -> list[float]:
    out = []
    for (h0, e0), (h1, e1) in zip(results, results[1:]):
        if e0 <= 0.0 or e1 <= 0.0:
            out.append(math.nan)
        else:
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
    return out


def fdtd_residual(sol: ModalSolution, n: int, courant: float = 0.5) -> float:
    """Max change one Yee step makes to exact data, relative to the exact next state.

    Exact data fed through one step lands O(dt (dt^2 + h^2)) away from the
    exact solution a step later.
    """
    state, _ = fdtd_init(sol, n, courant)
    stepped = fdtd_step(state)
    E, H = sample_staggered(sol, state.E.shape[1:], stepped.t, stepped.t + state.dt / 2)
    return max(float(np.abs(stepped.E - E).max()), float(np.abs(stepped.H - H).max()))


# ------------------------------------------------------------------ reports

def format_report(items) -> str:
    """``key = value`` lines from a mapping or an iterable of pairs."""
    pairs = items.items() if hasattr(items, "items") else items
    lines = []
    for key, val in pairs:
        if isinstance(val, float):
            val = f"{val:.6e}"
        elif isinstance(val, bool):
            val = "pass" if val else "fail"
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def convergence_csv(results: Sequence[tuple[float, float]], resolutions: Sequence[int]) -> str:
    orders = [""] + [f"{p:.6f}" for p in observed_orders(results)]
    rows = ["resolution,h,error,observed_order"]
    for n, (h, e), p in zip(resolutions, results, orders):
        rows.append(f"{n},{h:.10g},{e:.10e},{p}")
    return "\n".join(rows) + "\n"

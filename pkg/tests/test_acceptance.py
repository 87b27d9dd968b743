"""Exit criteria. Each test prints one PASS/FAIL line and records it for the summary."""
import math
import time

import numpy as np

from curlwave.ingest import FieldGrid, grid_to_modes, synthesize
from curlwave.propagator import (Medium, Mode, build_solution, evaluate, evolve_modes,
                                 pack_fields, unpack_fields)
from curlwave.spectral_core import WaveVector, curl_planewave, decompose_mode, eigenvectors, project
from curlwave.validation import (check_energy, divergence_scale,
                                 fdtd_convergence, general_problem, isotropic_problem,
                                 observed_orders, spacetime_lattice)

from conftest import ACCEPTANCE, SQ3, random_complex, random_modes

PI = math.pi


def record(label, passed, detail):
    ACCEPTANCE.append((label, bool(passed), detail))
    print(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
    assert passed, f"{label}: {detail}"


def lattice_error(sol, exact):
    times, pts = spacetime_lattice(5)
    worst = 0.0
    for t in times:
        H, E = unpack_fields(evaluate(sol, t, pts), sol.medium)
        Hx, Ex = exact(t, pts)
        worst = max(worst, np.abs(H - Hx).max(), np.abs(E - Ex).max())
    return float(worst)


def random_wavevector(rng, isotropic):
    mag = 10 ** rng.uniform(-3, 3)
    if isotropic:
        return WaveVector(*(np.ones(3) * rng.choice([-1, 1]) * mag / SQ3))
    u = rng.normal(size=3)
    return WaveVector(*(mag * u / np.linalg.norm(u)))


def test_c1_golden_isotropic():
    start = time.perf_counter()
    problem = isotropic_problem()
    n = 8
    s = np.arange(n) / n
    X, Y, Z = np.meshgrid(s, s, s, indexing="ij")
    c = np.cos(2 * PI * (X + Y + Z))[..., None]
    grid = FieldGrid((1, 1, 1), c * np.array([SQ3, 0, -SQ3]), c * np.array([1.0, -2, 1]))
    modes = grid_to_modes(grid)
    sol = build_solution(modes, Medium(1.0, 1.0), grid.periods)
    field_err = lattice_error(sol, problem.exact)
    plus = next(m for m in modes if m.w.s > 0)
    alpha_err = float(np.abs(project(plus.w, plus.a).alpha - [0, (SQ3 - 1j) / 2, 0]).max())
    elapsed = time.perf_counter() - start
    record("C1 golden isotropic", field_err <= 1e-12 and alpha_err <= 1e-14 and elapsed < 1.0,
           f"field_err={field_err:.2e} alpha_err={alpha_err:.2e} time={elapsed:.3f}s")


def test_c2_golden_general():
    start = time.perf_counter()
    problem = general_problem()
    w = WaveVector(PI, 2 * PI, -3 * PI)
    a = np.ones(3)
    c = 1 / (28 * PI**2)
    alpha_err = float(np.abs(project(w, a).alpha - [0, -c, -c]).max() / c)
    scalar_err = max(abs(w.norm - PI * math.sqrt(14)) / w.norm,
                     abs(w.gamma - PI * math.sqrt(42)) / w.gamma, abs(w.s))
    sol = build_solution([Mode(w, a)], Medium(1.0, 1.0), problem.periods)
    field_err = lattice_error(sol, problem.exact)
    elapsed = time.perf_counter() - start
    ok = alpha_err <= 1e-12 and scalar_err <= 1e-14 and field_err <= 1e-12 and elapsed < 1.0
    record("C2 golden general", ok, f"alpha_rel={alpha_err:.2e} scalars={scalar_err:.2e} "
           f"field_err={field_err:.2e} time={elapsed:.3f}s")


def test_c3_eigen_properties():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = dict(eig=0.0, ortho=0.0, div=0.0, recon=0.0)
    for i in range(1000):
        w = random_wavevector(rng, isotropic=(i % 2 == 1))
        eig = eigenvectors(w)
        for d in range(3):
            lhs = curl_planewave(w, eig.v[d])
            scale = w.norm * np.linalg.norm(eig.v[d])
            worst["eig"] = max(worst["eig"], np.linalg.norm(lhs - 1j * eig.lam[d] * eig.v[d]) / scale)
        worst["ortho"] = max(worst["ortho"], np.abs(eig.frame.T @ eig.frame - np.eye(3)).max())
        for d in (1, 2):
            worst["div"] = max(worst["div"], abs(w.array @ eig.v[d]) / (w.norm * np.linalg.norm(eig.v[d])))
        a = random_complex(rng, 3)
        _, proj = decompose_mode(w, a)
        worst["recon"] = max(worst["recon"], np.linalg.norm(proj.reconstruct(eig) - a) / np.linalg.norm(a))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-10 and elapsed < 5.0
    record("C3 eigen property suite", ok,
           " ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f" time={elapsed:.2f}s")


def test_c4_dense_eigensolver_oracle():
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(200):
        w = random_wavevector(rng, isotropic=(i % 8 == 0))
        cross = np.array([[0, -w.wz, w.wy], [w.wz, 0, -w.wx], [-w.wy, w.wx, 0]])
        vals, vecs = np.linalg.eig(cross)
        eig = eigenvectors(w)
        match = [int(np.argmin(np.abs(vals - lam))) for lam in eig.lam]
        assert sorted(match) == [0, 1, 2]
        worst = max(worst, np.abs(vals[match] - eig.lam).max() / w.norm)
        for d, k in enumerate(match):
            u = vecs[:, k] / np.linalg.norm(vecs[:, k])
            vd = eig.v[d] / np.linalg.norm(eig.v[d])
            worst = max(worst, np.linalg.norm(vd - np.vdot(u, vd) * u))
    record("C4 dense eigensolver oracle", worst <= 1e-8, f"max_residual={worst:.2e}")


def test_c5_ingestion_round_trip():
    rng = np.random.default_rng(5)
    periods = (1.0, 0.7, 1.3)
    medium = Medium(1.7, 0.6)
    worst_rt = worst_parseval = 0.0
    for n in (5, 8, 12, 16):
        shape = (n, n, n)
        limit = (n - 1) // 2
        picked = {tuple(int(x) for x in rng.integers(-limit, limit + 1, 3)) for _ in range(15)}
        modes = [Mode(WaveVector.from_lattice(*idx, periods), random_complex(rng, 3))
                 for idx in picked]
        grid = synthesize(modes, shape, periods, medium)
        back = synthesize(grid_to_modes(grid), shape, periods, medium)
        F0 = pack_fields(grid.H, grid.E, medium)
        F1 = pack_fields(back.H, back.E, medium)
        worst_rt = max(worst_rt, np.abs(F1 - F0).max() / np.abs(F0).max())
        energy_grid = np.sum(np.abs(F0) ** 2) / n**3
        energy_modes = sum(np.vdot(m.a, m.a).real for m in modes)
        worst_parseval = max(worst_parseval, abs(energy_grid - energy_modes) / energy_modes)
    record("C5 ingestion round trip", worst_rt <= 1e-12 and worst_parseval <= 1e-10,
           f"round_trip={worst_rt:.2e} parseval={worst_parseval:.2e}")


def test_c6_conservation():
    rng = np.random.default_rng(6)
    times = np.linspace(0.0, 1000.0, 100)
    worst_energy = worst_div = 0.0
    for i in range(100):
        periods = (1.0, 1.0, 1.0) if i % 2 else tuple(rng.uniform(0.5, 2.0, 3))
        medium = Medium(float(rng.uniform(0.5, 3)), float(rng.uniform(0.5, 3)))
        sol = build_solution(random_modes(rng, 5, 3, periods), medium, periods)
        rep = check_energy(sol, times, grid_shape=(2, 2, 2), div_shape=(4, 4, 4))
        worst_energy = max(worst_energy, rep.modal_drift)
        scale = divergence_scale(sol)
        worst_div = max(worst_div, rep.div_H_max * math.sqrt(medium.mu) / scale,
                        rep.div_E_max * math.sqrt(medium.eps) / scale)
    record("C6 energy and divergence conservation", worst_energy <= 1e-10 and worst_div <= 1e-10,
           f"energy_drift={worst_energy:.2e} div_delta={worst_div:.2e}")


def test_c7_fdtd_cross_validation():
    start = time.perf_counter()
    details, ok = [], True
    for problem in (isotropic_problem(), general_problem()):
        res = fdtd_convergence(problem.solution(), 0.5, [16, 32, 64], courant=0.5)
        orders = observed_orders(res)
        errs = [e for _, e in res]
        ok &= all(1.7 <= p <= 2.3 for p in orders) and errs[0] > errs[1] > errs[2]
        details.append(f"{problem.name}: orders=" + ",".join(f"{p:.3f}" for p in orders))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60.0
    record("C7 FDTD cross-validation", ok, "; ".join(details) + f" time={elapsed:.1f}s")


def test_c8_semigroup():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        periods = tuple(rng.uniform(0.5, 2.0, 3))
        medium = Medium(float(rng.uniform(0.5, 3)), float(rng.uniform(0.5, 3)))
        sol = build_solution(random_modes(rng, 6, 3, periods), medium, periods)
        t1, t2 = rng.uniform(-10, 10, 2)
        mid = build_solution(evolve_modes(sol, t1), medium, periods, drop_tol=0.0)
        a = np.array([m.a for m in evolve_modes(mid, t2)])
        b = np.array([m.a for m in evolve_modes(sol, t1 + t2)])
        worst = max(worst, np.abs(a - b).max() / np.abs(b).max())
        pts = rng.uniform(0, 2, (10, 3))
        fa, fb = evaluate(mid, t2, pts), evaluate(sol, t1 + t2, pts)
        worst = max(worst, np.abs(fa - fb).max() / np.abs(fb).max())
    record("C8 semigroup property", worst <= 1e-12, f"max_rel={worst:.2e}")

"""Command-line driver: ``curlwave {decompose,propagate,validate,golden}``.

Settings come from an INI-style file (``--config``) with sections
``[input]``, ``[medium]``, ``[output]`` and ``[fdtd]``; any key can be
overridden on the command line as ``--section.key=value`` (or ``--key=value``
when the key name is unambiguous).

Exit codes: 0 success, 1 validation failure, 2 usage/config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ingest, validation
from .errors import ConfigError, EmptyGrid, FormatError, NonFiniteSample, OffLatticeMode
from .propagator import DEFAULT_DROP_TOL, Medium, build_solution, evaluate, unpack_fields
from .spectral_core import decompose_mode

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# section -> key -> default (strings, parsed by RunConfig)
DEFAULTS = {
    "input": {"path": "", "format": "auto", "periods": "", "trunc_tol": "1e-12",
              "drop_tol": repr(DEFAULT_DROP_TOL)},
    "medium": {"mu": "", "eps": ""},
    "output": {"dir": "out", "times": "0", "shape": "", "format": "grid"},
    "fdtd": {"enabled": "yes", "resolutions": "16,32,64", "courant": "0.5",
             "t_final": "0.5", "min_order": "1.7", "max_order": "2.3"},
}
ALIASES = {"output": "output.dir", "times": "output.times", "format": "output.format",
           "input": "input.path"}


def _floats(key, raw, n=None):
    try:
        vals = [float(p) for p in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: could not parse {raw!r} as a list of numbers") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"{key}: expected {n} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{key}: values must be finite")
    return vals


def _float(key, raw, lo=None, hi=None, open_lo=True):
    (val,) = _floats(key, raw, 1)
    if lo is not None and (val <= lo if open_lo else val < lo):
        raise ConfigError(f"{key}: {val} must be {'>' if open_lo else '>='} {lo}")
    if hi is not None and val >= hi:
        raise ConfigError(f"{key}: {val} must be < {hi}")
    return val


def _ints(key, raw, n=None):
    vals = _floats(key, raw, n)
    if not all(v == int(v) and v > 0 for v in vals):
        raise ConfigError(f"{key}: expected positive integers, got {raw!r}")
    return [int(v) for v in vals]


@dataclass
class RunConfig:
    input_path: Path | None = None
    input_format: str = "auto"
    medium: Medium | None = None
    periods: tuple[float, float, float] | None = None
    times: list[float] = field(default_factory=lambda: [0.0])
    shape: tuple[int, int, int] | None = None
    output_dir: Path = Path("out")
    output_format: str = "grid"
    trunc_tol: float = 1e-12
    drop_tol: float = DEFAULT_DROP_TOL
    fdtd_enabled: bool = True
    resolutions: list[int] = field(default_factory=lambda: [16, 32, 64])
    courant: float = 0.5
    t_final: float = 0.5
    order_range: tuple[float, float] = (1.7, 2.3)
    threads: int = 1

    @classmethod
    def load(cls, config_path=None, overrides=(), threads=None) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.read_dict(DEFAULTS)
        if config_path is not None:
            try:
                with open(config_path) as fh:
                    parser.read_file(fh)
            except configparser.Error as exc:
                raise ConfigError(f"{config_path}: {exc}") from None
        for sec in parser.sections():
            if sec not in DEFAULTS:
                raise ConfigError(f"[{sec}]: unknown section")
            for key in parser[sec]:
                if key not in DEFAULTS[sec]:
                    raise ConfigError(f"{sec}.{key}: unknown key")
        for dotted, value in overrides:
            sec, key = dotted.split(".", 1)
            parser[sec][key] = value
        return cls._from_parser(parser, threads)

    @classmethod
    def _from_parser(cls, p, threads) -> "RunConfig":
        cfg = cls()
        s = p["input"]
        cfg.input_path = Path(s["path"]) if s["path"].strip() else None
        cfg.input_format = s["format"].strip().lower()
        if cfg.input_format not in ("auto", "grid", "modes"):
            raise ConfigError(f"input.format: expected auto, grid or modes, got {s['format']!r}")
        if s["periods"].strip():
            per = _floats("input.periods", s["periods"], 3)
            if not all(b > 0 for b in per):
                raise ConfigError("input.periods: periods must be > 0")
            cfg.periods = tuple(per)
        cfg.trunc_tol = _float("input.trunc_tol", s["trunc_tol"], 0.0, 1.0)
        cfg.drop_tol = _float("input.drop_tol", s["drop_tol"], 0.0, 1.0)

        s = p["medium"]
        if s["mu"].strip() or s["eps"].strip():
            mu = _float("medium.mu", s["mu"] or "1", 0.0)
            eps = _float("medium.eps", s["eps"] or "1", 0.0)
            cfg.medium = Medium(mu, eps)

        s = p["output"]
        if not s["dir"].strip():
            raise ConfigError("output.dir: must not be empty")
        cfg.output_dir = Path(s["dir"])
        cfg.times = _floats("output.times", s["times"])
        if not cfg.times:
            raise ConfigError("output.times: at least one time is required")
        if s["shape"].strip():
            cfg.shape = tuple(_ints("output.shape", s["shape"], 3))
        cfg.output_format = s["format"].strip().lower()
        if cfg.output_format not in ("grid", "csv", "both"):
            raise ConfigError(f"output.format: expected grid, csv or both, got {s['format']!r}")

        s = p["fdtd"]
        try:
            cfg.fdtd_enabled = p.getboolean("fdtd", "enabled")
        except ValueError:
            raise ConfigError(f"fdtd.enabled: expected a boolean, got {s['enabled']!r}") from None
        cfg.resolutions = _ints("fdtd.resolutions", s["resolutions"])
        if any(b <= a for a, b in zip(cfg.resolutions, cfg.resolutions[1:])):
            raise ConfigError("fdtd.resolutions: must be strictly increasing")
        cfg.courant = _float("fdtd.courant", s["courant"], 0.0)
        if cfg.courant > 1.0:
            raise ConfigError(f"fdtd.courant: {cfg.courant} violates the CFL limit of 1")
        cfg.t_final = _float("fdtd.t_final", s["t_final"], 0.0, open_lo=False)
        cfg.order_range = (_float("fdtd.min_order", s["min_order"]),
                           _float("fdtd.max_order", s["max_order"]))

        cfg.threads = _threads(threads)
        return cfg


def _threads(flag) -> int:
    raw = flag if flag is not None else os.environ.get("CURLWAVE_THREADS", "1")
    try:
        n = int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"threads: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"threads: expected a positive integer, got {n}")
    return n


# ------------------------------------------------------------------ loading

@dataclass
class Loaded:
    modes: list
    periods: tuple[float, float, float]
    medium: Medium
    shape: tuple[int, int, int] | None
    total_bins: int | None = None


def _detect_format(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(4)
    return "grid" if head == ingest.GRID_MAGIC else "modes"


def load_input(cfg: RunConfig) -> Loaded:
    if cfg.input_path is None:
        raise ConfigError("input.path: no input file given")
    fmt = cfg.input_format
    if fmt == "auto":
        fmt = _detect_format(cfg.input_path)
    if fmt == "grid":
        grid = ingest.read_grid(cfg.input_path)
        medium = cfg.medium or grid.medium
        if cfg.periods is not None:
            grid = ingest.FieldGrid(cfg.periods, grid.H, grid.E, medium)
        modes = ingest.grid_to_modes(grid, medium, cfg.trunc_tol)
        return Loaded(modes, grid.periods, medium, grid.shape, int(np.prod(grid.shape)))
    ml = ingest.read_mode_list(cfg.input_path)
    if cfg.periods is not None:
        ml.periods = cfg.periods
    if cfg.medium is not None:
        ml.medium = cfg.medium
    return Loaded(ml.modes(), ml.periods, ml.medium, None)


def _default_shape(modes, periods) -> tuple[int, int, int]:
    if not modes:
        return (1, 1, 1)
    idx = np.array([ingest.lattice_index(m.w, periods) for m in modes])
    return tuple(int(2 * np.abs(idx[:, ax]).max() + 2) for ax in range(3))


# ----------------------------------------------------------------- commands

def cmd_decompose(cfg: RunConfig, out=None) -> int:
    data = load_input(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    ml = ingest.ModeList.from_modes(data.modes, data.periods, data.medium)
    alphas = [decompose_mode(m.w, m.a)[1].alpha for m in data.modes]
    target = cfg.output_dir / "modes.txt"
    ingest.write_mode_list(target, ml, alphas)
    if not data.modes:
        print("curlwave: warning: input field is identically zero; wrote an empty mode list",
              file=sys.stderr)
    dropped = (data.total_bins - len(data.modes)) if data.total_bins is not None else 0
    dominant = max(data.modes, key=lambda m: np.linalg.norm(m.a)).w.norm if data.modes else 0.0
    print(validation.format_report({
        "modes": len(data.modes),
        "dropped": dropped,
        "dominant_norm_w": float(dominant),
        "output": str(target),
    }), end="", file=out or sys.stdout)
    return EXIT_OK


def _csv_text(points, H, E) -> str:
    rows = ["x,y,z,Hx,Hy,Hz,Ex,Ey,Ez"]
    for p, h, e in zip(points, H, E):
        rows.append(",".join(repr(float(v)) for v in (*p, *h, *e)))
    return "\n".join(rows) + "\n"


def cmd_propagate(cfg: RunConfig, out=None) -> int:
    data = load_input(cfg)
    sol = build_solution(data.modes, data.medium, data.periods, cfg.drop_tol)
    shape = cfg.shape or data.shape or _default_shape(data.modes, data.periods)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, t in enumerate(cfg.times):
        stem = f"field_{i:04d}_t{t:+.6e}"
        grid = ingest.modes_to_grid(sol, t, shape)
        if cfg.output_format in ("grid", "both"):
            target = cfg.output_dir / f"{stem}.cwf"
            ingest.write_grid(target, grid)
            written.append(target)
        if cfg.output_format in ("csv", "both"):
            pts = grid.points()
            H, E = unpack_fields(evaluate(sol, t, pts), sol.medium)
            target = cfg.output_dir / f"{stem}.csv"
            target.write_text(_csv_text(pts, H, E))
            written.append(target)
    print(validation.format_report({
        "modes": len(sol.terms),
        "shape": "x".join(map(str, shape)),
        "times": ",".join(repr(t) for t in cfg.times),
        "files": len(written),
    }), end="", file=out or sys.stdout)
    return EXIT_OK


def _golden_items():
    items = []
    ok = True
    for chk in validation.golden_examples():
        items.append((f"golden.{chk.name}", chk.deviation))
        items.append((f"golden.{chk.name}.status", chk.passed))
        ok &= chk.passed
    return items, ok


def cmd_golden(cfg: RunConfig, out=None) -> int:
    items, ok = _golden_items()
    items.append(("status", ok))
    print(validation.format_report(items), end="", file=out or sys.stdout)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_validate(cfg: RunConfig, out=None) -> int:
    items, ok = _golden_items()
    csv_parts = []

    if cfg.input_path is not None:
        data = load_input(cfg)
        sol = build_solution(data.modes, data.medium, data.periods, cfg.drop_tol)
        times = [0.0, *cfg.times] if cfg.times[0] != 0.0 else cfg.times
        rep = validation.check_energy(sol, times)
        scale = validation.divergence_scale(sol) or 1.0
        div_rel = max(rep.div_H_max * math.sqrt(sol.medium.mu),
                      rep.div_E_max * math.sqrt(sol.medium.eps)) / scale
        passed = rep.modal_drift <= 1e-10 and rep.quad_drift <= 1e-8 and div_rel <= 1e-10
        items += [
            ("input.energy_t0", rep.energy_t0),
            ("input.energy_t", rep.energy_t),
            ("input.modal_drift", rep.modal_drift),
            ("input.quadrature_drift", rep.quad_drift),
            ("input.div_H_max", rep.div_H_max),
            ("input.div_E_max", rep.div_E_max),
            ("input.stationary_residual", rep.stationary_residual),
            ("input.status", passed),
        ]
        if rep.longitudinal_modes:
            items.append(("input.note", f"{rep.longitudinal_modes} mode(s) carry a "
                          "divergent component; it is stationary and excluded from the "
                          "divergence delta"))
        ok &= passed

    if cfg.fdtd_enabled:
        lo, hi = cfg.order_range
        for problem in validation.golden_problems():
            res = validation.fdtd_convergence(problem.solution(), cfg.t_final, cfg.resolutions,
                                              cfg.courant, cfg.threads)
            orders = validation.observed_orders(res)
            errs = [e for _, e in res]
            passed = (all(lo <= p <= hi for p in orders)
                      and all(b < a for a, b in zip(errs, errs[1:])))
            for n, (_, e) in zip(cfg.resolutions, res):
                items.append((f"fdtd.{problem.name}.error_{n}", e))
            for n, p in zip(cfg.resolutions[1:], orders):
                items.append((f"fdtd.{problem.name}.order_{n}", p))
            items.append((f"fdtd.{problem.name}.status", passed))
            csv_parts.append((problem.name, validation.convergence_csv(res, cfg.resolutions)))
            ok &= passed

    items.append(("status", ok))
    text = validation.format_report(items)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    (cfg.output_dir / "report.txt").write_text(text)
    for name, body in csv_parts:
        (cfg.output_dir / f"convergence_{name}.csv").write_text(body)
    print(text, end="", file=out or sys.stdout)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"decompose": cmd_decompose, "propagate": cmd_propagate,
            "validate": cmd_validate, "golden": cmd_golden}


def _split_overrides(extra):
    pairs = []
    for arg in extra:
        if not arg.startswith("--") or "=" not in arg:
            raise ConfigError(f"unrecognized argument {arg!r}; overrides look like --section.key=value")
        key, value = arg[2:].split("=", 1)
        key = key.replace("-", "_")
        if key in ALIASES:
            key = ALIASES[key]
        if "." not in key:
            owners = [sec for sec, keys in DEFAULTS.items() if key in keys]
            if len(owners) != 1:
                raise ConfigError(f"{key}: unknown or ambiguous key; use --section.{key}=...")
            key = f"{owners[0]}.{key}"
        sec, name = key.split(".", 1)
        if sec not in DEFAULTS or name not in DEFAULTS[sec]:
            raise ConfigError(f"{key}: unknown key")
        pairs.append((key, value))
    return pairs


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curlwave",
                                description="Exact spectral propagation of periodic Maxwell fields.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("input", nargs="?", help="input grid (.cwf) or mode list")
    p.add_argument("--config", help="INI-style run configuration")
    p.add_argument("--threads", help="worker cap (default: $CURLWAVE_THREADS or 1)")
    p.add_argument("--output", help="output directory")
    p.add_argument("--times", help="comma separated evaluation times")
    p.add_argument("--format", choices=("grid", "csv", "both"))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _split_overrides(extra)
        for flag, key in (("input", "input.path"), ("output", "output.dir"),
                          ("times", "output.times"), ("format", "output.format")):
            val = getattr(args, flag)
            if val is not None:
                overrides.append((key, val))
        cfg = RunConfig.load(args.config, overrides, args.threads)
        return COMMANDS[args.command](cfg)
    except (ConfigError, OffLatticeMode) as exc:
        print(f"curlwave: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, EmptyGrid, NonFiniteSample) as exc:
        print(f"curlwave: input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"curlwave: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

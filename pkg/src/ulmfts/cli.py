"""Command-line front end: config ingestion, subcommands, plot-ready CSV output.

Subcommands: ``simulate``, ``alpha-sweep``, ``pole-map``, ``cd-map``,
``boundary``.  All numeric CSV output uses 17-significant-digit scientific
notation and LF line endings, so identical inputs reproduce byte-identical
files; every command echoes its fully resolved configuration as a manifest
next to its outputs.  Exit codes: 0 success (simulate: converged or bounded),
1 configuration error, 2 simulate detected divergence.
"""

import argparse
import copy
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .gains import GainParams
from .plants import LinearPlant, RigidBodyParams, RigidBodyPlant
from .sim import (
    ReferenceSpec,
    SimConfig,
    convergence_metrics,
    run_closed_loop,
    verify_error_identity,
)
from .stability import AxisSpec, GainPair, StabilityGrid, boundary_alpha, cd_map, pole_map

DEFAULT_CONFIG = {
    "plant": {"type": "rigid_body", "mass": 2.0, "inertia": 3.0, "dt": 0.05, "g": None},
    "controller": {"alpha": 1.2, "g_design": None},
    "gains": {
        "observer": {"r": 1.5, "gamma": 1.0},
        "controller": {"s": 1.5, "mu": 1.0},
    },
    "sim": {
        "horizon": 400,
        "u_max": 3.0,
        "y0": [0.5, -0.5, 0.3],
        "y1": [0.5, -0.5, 0.3],
        "f_hat0": None,
        "settle_window": 50,
        "tol": 1e-3,
        "oracle": False,
    },
    "reference": {"steps": [[[0.0, 1.5]], [[0.0, 1.0]], []]},
}


class ConfigError(Exception):
    """Invalid or malformed run configuration."""


def _fmt(x: float) -> str:
    """Fixed 17-significant-digit scientific float format; nan/inf spelled out."""
    return f"{float(x):.16e}"


def _deep_merge(base: dict, overlay: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _deep_merge(base[key], value, here)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    """Resolved config dict: file overlaid on defaults (file may be omitted)."""
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return _deep_merge(DEFAULT_CONFIG, user)


def config_digest(resolved: dict) -> str:
    """SHA-256 of the canonical JSON form; stable under input key reordering."""
    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def build_sim_config(resolved: dict) -> SimConfig:
    """Construct a SimConfig from a resolved config dict."""
    p = resolved["plant"]
    try:
        if p["type"] == "rigid_body":
            plant = RigidBodyPlant(RigidBodyParams(p["mass"], p["inertia"], p["dt"]))
        elif p["type"] == "linear":
            if p["g"] is None:
                raise ConfigError("plant.g is required for the linear plant")
            plant = LinearPlant(np.array(p["g"], dtype=float), dt=p["dt"])
        else:
            raise ConfigError(f"unknown plant.type: {p['type']!r}")

        ctrl = resolved["controller"]
        alpha, g_design = ctrl["alpha"], ctrl["g_design"]
        if (alpha is None) == (g_design is None):
            raise ConfigError("exactly one of controller.alpha and controller.g_design must be set")
        gains = resolved["gains"]
        sim = resolved["sim"]
        return SimConfig(
            plant=plant,
            reference=ReferenceSpec(tuple(tuple(tuple(s) for s in ch)
                                          for ch in resolved["reference"]["steps"])),
            y0=np.array(sim["y0"], dtype=float),
            y1=np.array(sim["y1"], dtype=float),
            alpha=alpha,
            g_design=None if g_design is None else np.array(g_design, dtype=float),
            observer_params=GainParams(gains["observer"]["r"], gains["observer"]["gamma"]),
            controller_params=GainParams(gains["controller"]["s"], gains["controller"]["mu"]),
            u_max=sim["u_max"],
            horizon=sim["horizon"],
            f_hat0=None if sim["f_hat0"] is None else np.array(sim["f_hat0"], dtype=float),
            log_oracle=bool(sim["oracle"]),
            settle_window=sim["settle_window"],
            tol=sim["tol"],
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid config: {e}")


def write_manifest(out_dir: Path, subcommand: str, config: dict, outputs: list,
                   filename: str = "manifest.json") -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": config,
        "config_digest": config_digest(config),
        "outputs": sorted(str(o) for o in outputs),
    }
    path = out_dir / filename
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_trace_csv(trace, path):
    """One row per step: outputs, references, inputs, estimates, errors, forcing term."""
    n = trace.config.plant.n
    groups = [
        ("y", trace.y), ("yd", trace.y_desired), ("ucmd", trace.u_commanded),
        ("uapp", trace.u_applied), ("fhat", trace.f_hat), ("fmeas", trace.f_measured),
        ("ey", trace.e_y), ("ef", trace.e_f), ("r", trace.r_term),
    ]
    cols = ["k", "t"]
    for name, _ in groups[:4]:
        cols += [f"{name}_{i}" for i in range(n)]
    cols.append("saturated")
    for name, _ in groups[4:]:
        cols += [f"{name}_{i}" for i in range(n)]
    lines = [",".join(cols)]
    for k in range(trace.horizon):
        row = [str(k), _fmt(k * trace.dt)]
        for _, arr in groups[:4]:
            row += [_fmt(v) for v in arr[k]]
        row.append(str(int(trace.saturated[k])))
        for _, arr in groups[4:]:
            row += [_fmt(v) for v in arr[k]]
        lines.append(",".join(row))
    _write_lines(path, lines)


def write_grid_csv(grid: StabilityGrid, path):
    """Header carries axis names and resolution; rows are row-major grid nodes."""
    a1, a2 = grid.axis1, grid.axis2
    header = f"{a1.name}[{a1.count}],{a2.name}[{a2.count}],max_root_norm"
    v1, v2 = a1.values(), a2.values()
    lines = [header]
    for i in range(a1.count):
        for j in range(a2.count):
            lines.append(f"{_fmt(v1[i])},{_fmt(v2[j])},{_fmt(grid.values[i, j])}")
    _write_lines(path, lines)


def write_boundary_csv(thetas, alphas, path):
    lines = ["theta,alpha_re,alpha_im"]
    for th, al in zip(thetas, alphas):
        lines.append(f"{_fmt(th)},{_fmt(al.real)},{_fmt(al.imag)}")
    _write_lines(path, lines)


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _summary_dict(trace, metrics) -> dict:
    try:
        identity_residual = verify_error_identity(trace)
    except ValueError:
        identity_residual = None
    return {
        "classification": metrics.classification,
        "max_tracking_error": metrics.max_tracking_error,
        "max_estimation_error": metrics.max_estimation_error,
        "settle_window": metrics.settle_window,
        "tol": metrics.tol,
        "diverged_at": trace.diverged_at,
        "identity_residual": identity_residual,
    }


def cmd_simulate(args) -> int:
    resolved = load_config(args.config)
    if args.oracle:
        resolved["sim"]["oracle"] = True
    cfg = build_sim_config(resolved)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    trace = run_closed_loop(cfg)
    metrics = convergence_metrics(trace)
    trace_path = out / "trace.csv"
    write_trace_csv(trace, trace_path)
    summary = {
        "config": resolved,
        "config_digest": config_digest(resolved),
        "metrics": _summary_dict(trace, metrics),
    }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    write_manifest(out, "simulate", resolved, [trace_path, summary_path])
    print(f"{metrics.classification}: max |e_y| over final window = "
          f"{metrics.max_tracking_error:.6e}")
    return 2 if metrics.classification == "diverged" else 0


def _parse_alpha_list(text: str) -> list:
    alphas = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            a = float(tok)
        except ValueError:
            raise ConfigError(f"invalid alpha value: {tok!r}")
        if a == 0.0:
            raise ConfigError("alpha must be nonzero (designed matrix would be singular)")
        if a in alphas:
            print(f"warning: duplicate alpha {a:g} ignored", file=sys.stderr)
            continue
        alphas.append(a)
    if not alphas:
        raise ConfigError("alpha list is empty")
    return alphas


def cmd_alpha_sweep(args) -> int:
    resolved = load_config(args.config)
    if args.oracle:
        resolved["sim"]["oracle"] = True
    alphas = _parse_alpha_list(args.alpha)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    outputs = []
    rows = ["alpha,classification,max_tracking_error,max_estimation_error,diverged_at"]
    for a in alphas:
        run_cfg = copy.deepcopy(resolved)
        run_cfg["controller"]["alpha"] = a
        run_cfg["controller"]["g_design"] = None
        trace = run_closed_loop(build_sim_config(run_cfg))
        metrics = convergence_metrics(trace)
        trace_path = out / f"trace_alpha_{a:g}.csv"
        write_trace_csv(trace, trace_path)
        outputs.append(trace_path)
        div = "" if trace.diverged_at is None else str(trace.diverged_at)
        rows.append(f"{_fmt(a)},{metrics.classification},"
                    f"{_fmt(metrics.max_tracking_error)},"
                    f"{_fmt(metrics.max_estimation_error)},{div}")
        print(f"alpha={a:g}: {metrics.classification} "
              f"(max |e_y| = {metrics.max_tracking_error:.6e})")
    summary_path = out / "sweep_summary.csv"
    _write_lines(summary_path, rows)
    outputs.append(summary_path)
    sweep_config = {"base": resolved, "alphas": alphas}
    write_manifest(out, "alpha-sweep", sweep_config, outputs)
    return 0


def _parse_grid(text: str, names: tuple) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"grid must have two axes 'min:max:n,min:max:n', got {text!r}")
    axes = []
    for name, part in zip(names, parts):
        fields = part.split(":")
        if len(fields) != 3:
            raise ConfigError(f"axis spec must be 'min:max:n', got {part!r}")
        try:
            lo, hi, count = float(fields[0]), float(fields[1]), int(fields[2])
        except ValueError:
            raise ConfigError(f"invalid axis spec: {part!r}")
        if lo >= hi:
            raise ConfigError(f"axis {name}: min {lo:g} must be < max {hi:g}")
        if count < 2:
            raise ConfigError(f"axis {name}: need at least 2 points, got {count}")
        axes.append(AxisSpec(name, lo, hi, count))
    return tuple(axes)


def cmd_pole_map(args) -> int:
    re_axis, im_axis = _parse_grid(args.grid, ("alpha_re", "alpha_im"))
    gains = GainPair(args.c, args.d)
    grid = pole_map(re_axis, im_axis, gains)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_grid_csv(grid, out)
    write_manifest(out.parent, "pole-map", {"grid": args.grid, "c": args.c, "d": args.d},
                   [out], filename=f"{out.stem}.manifest.json")
    print(f"wrote {re_axis.count}x{im_axis.count} pole map to {out}")
    return 0


def cmd_cd_map(args) -> int:
    try:
        alpha = complex(args.alpha)
    except ValueError:
        raise ConfigError(f"invalid alpha: {args.alpha!r}")
    c_axis, d_axis = _parse_grid(args.grid, ("c", "d"))
    grid = cd_map(alpha, c_axis, d_axis)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_grid_csv(grid, out)
    write_manifest(out.parent, "cd-map", {"alpha": args.alpha, "grid": args.grid},
                   [out], filename=f"{out.stem}.manifest.json")
    print(f"wrote {c_axis.count}x{d_axis.count} gain map to {out}")
    return 0


def cmd_boundary(args) -> int:
    if args.points < 1:
        raise ConfigError(f"need at least 1 boundary point, got {args.points}")
    gains = GainPair(args.c, args.d)
    # interior nodes of a uniform angular grid; the map has a pole at 0 and 2*pi
    thetas = [2.0 * np.pi * i / (args.points + 1) for i in range(1, args.points + 1)]
    alphas = [boundary_alpha(th, gains) for th in thetas]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_boundary_csv(thetas, alphas, out)
    write_manifest(out.parent, "boundary",
                   {"c": args.c, "d": args.d, "points": args.points},
                   [out], filename=f"{out.stem}.manifest.json")
    print(f"wrote {args.points}-point stability boundary to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulmfts",
        description="Model-free ULM control: closed-loop simulation and "
                    "stability maps for the designed input influence matrix.",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; all computation is deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one closed-loop simulation")
    sim.add_argument("--config", default=None, help="JSON config path (defaults built in)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--oracle", action="store_true",
                     help="log true plant dynamics for identity diagnostics")
    sim.set_defaults(func=cmd_simulate)

    sweep = sub.add_parser("alpha-sweep", help="simulate over a list of alpha values")
    sweep.add_argument("--config", default=None)
    sweep.add_argument("--alpha", required=True, help="comma-separated nonzero values")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--oracle", action="store_true")
    sweep.set_defaults(func=cmd_alpha_sweep)

    pm = sub.add_parser("pole-map", help="spectral radius over complex mismatch eigenvalues")
    pm.add_argument("--grid", default="-5:5:201,-5:5:201",
                    help="'reMin:reMax:n,imMin:imMax:n'")
    pm.add_argument("--c", type=float, default=-1.0)
    pm.add_argument("--d", type=float, default=-1.0)
    pm.add_argument("--out", required=True, help="output CSV path")
    pm.set_defaults(func=cmd_pole_map)

    cm = sub.add_parser("cd-map", help="spectral radius over gain values at fixed alpha")
    cm.add_argument("--alpha", default="10", help="complex accepted, e.g. '2+1j'")
    cm.add_argument("--grid", default="-1:1:101,-1:1:101", help="'cMin:cMax:n,dMin:dMax:n'")
    cm.add_argument("--out", required=True)
    cm.set_defaults(func=cmd_cd_map)

    bd = sub.add_parser("boundary", help="unit-modulus boundary contour in the alpha plane")
    bd.add_argument("--c", type=float, default=-1.0)
    bd.add_argument("--d", type=float, default=-1.0)
    bd.add_argument("--points", type=int, default=360)
    bd.add_argument("--out", required=True)
    bd.set_defaults(func=cmd_boundary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

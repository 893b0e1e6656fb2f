"""Command-line entry point: ``ceramopt {mesh,solve,objective,gradcheck,flow}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io, plotting
from .adjoint import shape_gradient, validate_fd
from .config import ConfigError, RunConfig, load_config
from .fem import SolverError, element_stresses, solve_state
from .flow import FlowError, run_flow
from .mesh import MeshError
from .objective import evaluate_objective, failure_curve, survival_curve

log = logging.getLogger("ceramopt")


def _prepare(cfg: RunConfig):
    mesh = cfg.geometry.build(cfg.base_dir)
    return mesh, cfg.load.load_case(mesh)


def _load_grid(cfg: RunConfig, eta: float) -> np.ndarray:
    return np.linspace(cfg.load.curve_min * eta, cfg.load.curve_max * eta, cfg.load.curve_points)


def cmd_mesh(cfg: RunConfig, out: Path) -> list[Path]:
    mesh, _ = _prepare(cfg)
    files = [out / "mesh.txt", out / "mesh.png"]
    io.write_mesh(files[0], mesh)
    plotting.plot_mesh(mesh, files[1], title=f"{cfg.geometry.kind} {mesh.nx}x{mesh.ny}")
    return files


def cmd_solve(cfg: RunConfig, out: Path) -> list[Path]:
    mesh, load = _prepare(cfg)
    state = solve_state(mesh, cfg.material, load)
    sigma = element_stresses(mesh, state.U, cfg.material)
    files = [out / "field.txt", out / "stress.txt", out / "displacement.png"]
    io.write_field(files[0], state.U)
    io.write_stress(files[1], sigma)
    plotting.plot_displacement(mesh, state.U, files[2])
    return files


def cmd_objective(cfg: RunConfig, out: Path) -> list[Path]:
    mesh, load = _prepare(cfg)
    state = solve_state(mesh, cfg.material, load)
    report = evaluate_objective(mesh, state.U, cfg.material, cfg.weibull)
    sigma = element_stresses(mesh, state.U, cfg.material)
    loads = _load_grid(cfg, report.eta)
    files = [out / "stress.txt", out / "survival.csv", out / "objective.txt", out / "intensity.png", out / "survival.png"]
    io.write_stress(files[0], sigma, report.per_element_intensity)
    io.write_survival(files[1], loads, survival_curve(report, loads))
    k = int(np.argmax(report.per_element_intensity))
    files[2].write_text(
        f"J {io.FMT % report.J}\neta {io.FMT % report.eta}\nm {io.FMT % cfg.weibull.m}\n"
        f"max_intensity_element {k}\n"
    )
    plotting.plot_intensity(mesh, report.per_element_intensity, files[3])
    plotting.plot_failure_curves(loads, {0: failure_curve(report, loads)}, files[4])
    return files


def cmd_gradcheck(cfg: RunConfig, out: Path) -> list[Path]:
    mesh, load = _prepare(cfg)
    grad = shape_gradient(mesh, cfg.material, load, cfg.weibull, with_theta=False)
    tables = validate_fd(
        mesh, cfg.material, load, cfg.weibull, cfg.gradcheck.directions, cfg.gradcheck.epsilons, seed=cfg.seed
    )
    files = [out / "gradcheck.csv", out / "field.txt", out / "gradcheck.png", out / "gradient.png"]
    rows = [
        (r.epsilon, r.ratio, d, r.fd_quotient, r.directional, r.lost_digits, int(r.cancellation))
        for d, table in enumerate(tables)
        for r in table
    ]
    io.write_csv(files[0], ["epsilon", "ratio", "direction", "fd_quotient", "gradient_directional", "lost_digits", "cancellation"], rows)
    io.write_field(files[1], grad.U, grad.dj_dx)
    plotting.plot_ratio([r.epsilon for r in tables[0]], [r.ratio for r in tables[0]], files[2])
    plotting.plot_gradient(mesh, grad.dj_dx, files[3])
    return files


def cmd_flow(cfg: RunConfig, out: Path) -> list[Path]:
    mesh, load = _prepare(cfg)
    J0 = evaluate_objective(mesh, solve_state(mesh, cfg.material, load).U, cfg.material, cfg.weibull)
    loads = _load_grid(cfg, J0.eta)
    trace = run_flow(mesh, replace(cfg.flow, survival_loads=tuple(loads)), cfg.material, load, cfg.weibull)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    files = [out / "trace.csv"]
    io.write_csv(
        files[0],
        ["iter", "J", "volume", "grad_norm", "alpha"],
        [(r.iter, r.J, r.volume, r.grad_norm, r.alpha) for r in trace.records],
    )
    by_iter = {r.iter: r for r in trace.records}
    curves = {}
    for it, snap in sorted(trace.snapshots.items()):
        m = snap_dir / f"mesh_{it:05d}.txt"
        s = snap_dir / f"survival_{it:05d}.csv"
        io.write_mesh(m, snap)
        curves[it] = by_iter[it].failure
        io.write_survival(s, loads, 1.0 - curves[it])
        files += [m, s]
    figs = [out / "shapes.png", out / "failure.png", out / "trace.png"]
    plotting.plot_shapes(trace.snapshots, figs[0])
    plotting.plot_failure_curves(loads, curves, figs[1])
    plotting.plot_trace([r.iter for r in trace.records], trace.J, figs[2])
    return files + figs


COMMANDS = {
    "mesh": cmd_mesh,
    "solve": cmd_solve,
    "objective": cmd_objective,
    "gradcheck": cmd_gradcheck,
    "flow": cmd_flow,
}


def _error(kind: str, message: str, key: str | None = None) -> int:
    msg = " ".join(str(message).split()).replace('"', "'")
    parts = [f"error={kind}"] + ([f"key={key}"] if key else []) + [f'message="{msg}"']
    print(" ".join(parts), file=sys.stderr)
    return 2 if kind == "config" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ceramopt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="run configuration file (defaults apply if omitted)")
        p.add_argument("--out", type=Path, help="output directory (overrides [run] out)")
        p.add_argument("--seed", type=int, help="random seed (overrides [run] seed)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        out = args.out if args.out is not None else Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](cfg, out)
        io.write_manifest(out, files)
    except ConfigError as exc:
        return _error("config", exc.message, exc.key)
    except (MeshError, SolverError, FlowError) as exc:
        return _error("numerical", f"{type(exc).__name__}: {exc}")
    except OSError as exc:
        return _error("io", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Run configuration: an INI-style file of ``[section]`` headers and ``key = value`` lines.

Grammar (``#`` and ``;`` start comments, blank lines are ignored)::

    [geometry]
    kind = rod | joint          # default rod
    length = 0.6                # m
    height = 0.1                # m
    nx = 61
    ny = 9                      # joint default 17
    bend_amplitude = 0.05       # m, rod only; 0 gives the straight rod
    bend_start = 0.2            # m, default length / 3
    bend_width = 0.2            # m, default length / 3
    offset = 0.2                # m, joint only
    mesh_file =                 # optional mesh2d file, overrides the generator

    [material]
    young_modulus = 3.7e11      # Pa
    poisson_ratio = 0.22

    [load]
    force = 1.0                 # N, resultant of the x traction on the right edge
    body_force_x = 0.0          # N/m^2
    body_force_y = 0.0
    curve_min = 0.2             # load grid for survival curves,
    curve_max = 2.0             #   in units of the initial Weibull scale eta
    curve_points = 20

    [weibull]
    m = 10
    sigma0 = 1000.0             # Pa
    n_angles = 128

    [flow]
    step_alpha = auto           # or a positive float
    max_iters = 200
    volume_mode = project       # project | literal | off
    scaling = log               # log | raw
    stop_tol = 0.0
    snapshot_every = 10
    max_move = 0.01             # first-step move as a fraction of the part height
    renormalize_volume = false

    [gradcheck]
    directions = 1
    epsilons = 1e-3 1e-4 1e-5 1e-6 1e-7 1e-8

    [run]
    seed = 0
    out = out

Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .fem import LoadCase, Material
from .flow import FlowConfig
from .mesh import Mesh, cosine_bump, generate_joint, generate_rod
from .objective import WeibullParams


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


@dataclass(frozen=True)
class Geometry:
    kind: str = "rod"
    length: float = 0.6
    height: float = 0.1
    nx: int = 61
    ny: int | None = None
    bend_amplitude: float = 0.05
    bend_start: float | None = None
    bend_width: float | None = None
    offset: float = 0.2
    mesh_file: str | None = None

    def build(self, base: Path | None = None) -> Mesh:
        if self.mesh_file:
            from .io import read_mesh

            p = Path(self.mesh_file)
            if base is not None and not p.is_absolute():
                p = base / p
            return read_mesh(p)
        if self.kind == "joint":
            return generate_joint(self.length, self.height, self.nx, self.ny or 17, self.offset)
        deform = None
        if self.bend_amplitude != 0.0:
            start = self.length / 3.0 if self.bend_start is None else self.bend_start
            width = self.length / 3.0 if self.bend_width is None else self.bend_width
            deform = cosine_bump(self.bend_amplitude, start, width)
        return generate_rod(self.length, self.height, self.nx, self.ny or 9, deform)


@dataclass(frozen=True)
class LoadBlock:
    force: float = 1.0
    body_force_x: float = 0.0
    body_force_y: float = 0.0
    curve_min: float = 0.2
    curve_max: float = 2.0
    curve_points: int = 20

    def load_case(self, mesh: Mesh) -> LoadCase:
        return LoadCase.unit_force(mesh, self.force, body_force=(self.body_force_x, self.body_force_y))


@dataclass(frozen=True)
class GradcheckBlock:
    directions: int = 1
    epsilons: tuple[float, ...] = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


@dataclass(frozen=True)
class RunConfig:
    geometry: Geometry = field(default_factory=Geometry)
    material: Material = field(default_factory=Material)
    load: LoadBlock = field(default_factory=LoadBlock)
    weibull: WeibullParams = field(default_factory=WeibullParams)
    flow: FlowConfig = field(default_factory=FlowConfig)
    gradcheck: GradcheckBlock = field(default_factory=GradcheckBlock)
    seed: int = 0
    out: str = "out"
    base_dir: Path | None = None


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


def _floats(text: str):
    return tuple(float(v) for v in text.replace(",", " ").split())


_SCHEMA = {
    "geometry": {
        "kind": str,
        "length": float,
        "height": float,
        "nx": int,
        "ny": int,
        "bend_amplitude": float,
        "bend_start": float,
        "bend_width": float,
        "offset": float,
        "mesh_file": str,
    },
    "material": {"young_modulus": float, "poisson_ratio": float},
    "load": {
        "force": float,
        "body_force_x": float,
        "body_force_y": float,
        "curve_min": float,
        "curve_max": float,
        "curve_points": int,
    },
    "weibull": {"m": float, "sigma0": float, "n_angles": int},
    "flow": {
        "step_alpha": _optional_float,
        "max_iters": int,
        "volume_mode": str,
        "scaling": str,
        "stop_tol": float,
        "snapshot_every": int,
        "max_move": float,
        "renormalize_volume": _bool,
    },
    "gradcheck": {"directions": int, "epsilons": _floats},
    "run": {"seed": int, "out": str},
}


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).replace("\n", " ")) from exc
    values: dict[str, dict] = {s: {} for s in _SCHEMA}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section")
        for key, raw in cp.items(section):
            conv = _SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(f"{section}.{key}", "unknown key")
            try:
                values[section][key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}", f"bad value {raw!r} ({exc})") from exc

    def build(section, cls, default):
        try:
            return replace(default, **values[section]) if values[section] else default
        except (ValueError, TypeError) as exc:
            raise ConfigError(section, str(exc)) from exc

    geometry = build("geometry", Geometry, Geometry())
    if geometry.kind not in ("rod", "joint"):
        raise ConfigError("geometry.kind", f"expected rod or joint, got {geometry.kind!r}")
    run = values["run"]
    return RunConfig(
        geometry=geometry,
        material=build("material", Material, Material()),
        load=build("load", LoadBlock, LoadBlock()),
        weibull=build("weibull", WeibullParams, WeibullParams()),
        flow=build("flow", FlowConfig, FlowConfig()),
        gradcheck=build("gradcheck", GradcheckBlock, GradcheckBlock()),
        seed=run.get("seed", 0),
        out=run.get("out", "out"),
        base_dir=base_dir,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, base_dir=path.parent)

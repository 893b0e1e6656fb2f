"""Volume-constrained gradient flow of the free surface.

Each step maps the shape gradient to the design vector through the morphing
map, removes its component along the volume gradient and moves the surface
by ``-alpha`` times the result. With x-coordinates frozen the volume is
linear in ``theta``, so the projected update conserves it up to round-off.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .adjoint import objective_at, shape_gradient
from .fem import LoadCase, Material
from .mesh import Mesh, MeshError, extract_theta, morph, morph_jacobian, volume, volume_gradient
from .objective import WeibullParams, failure_curve, ObjectiveReport

log = logging.getLogger(__name__)

VOLUME_MODES = ("project", "literal", "off")
SCALINGS = ("raw", "log")


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class FlowConfig:
    """Flow settings.

    ``step_alpha=None`` picks alpha at the first step so that no surface node
    moves by more than ``max_move`` times the mean part height. With
    ``scaling="log"`` the flow follows the gradient of ``log J`` (same
    direction as ``dJ/dtheta``, divided by ``J``), which keeps a fixed alpha
    meaningful while ``J`` falls by orders of magnitude.
    """

    step_alpha: float | None = None
    max_iters: int = 200
    volume_mode: str = "project"
    scaling: str = "log"
    stop_tol: float = 0.0
    snapshot_every: int = 10
    max_move: float = 0.01
    max_backoff: int = 10
    renormalize_volume: bool = False
    survival_loads: tuple[float, ...] = ()

    def __post_init__(self):
        if self.step_alpha is not None and not self.step_alpha > 0:
            raise ValueError("step_alpha must be positive")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be non-negative")
        if self.volume_mode not in VOLUME_MODES:
            raise ValueError(f"volume_mode must be one of {VOLUME_MODES}")
        if self.scaling not in SCALINGS:
            raise ValueError(f"scaling must be one of {SCALINGS}")
        if self.max_iters < 0 or self.snapshot_every < 1:
            raise ValueError("max_iters must be >= 0 and snapshot_every >= 1")


def project_volume(grad_j: np.ndarray, grad_v: np.ndarray) -> np.ndarray:
    """Remove the component of ``grad_j`` along ``grad_v``."""
    grad_j = np.asarray(grad_j, dtype=float)
    grad_v = np.asarray(grad_v, dtype=float)
    vv = float(grad_v @ grad_v)
    if vv == 0.0:
        raise ValueError("volume gradient vanishes; projection undefined")
    return grad_j - (float(grad_j @ grad_v) / vv) * grad_v


@dataclass
class FlowRecord:
    iter: int
    J: float
    volume: float
    grad_norm: float
    alpha: float
    theta: np.ndarray
    failure: np.ndarray | None = None


@dataclass
class FlowTrace:
    records: list[FlowRecord] = field(default_factory=list)
    snapshots: dict[int, Mesh] = field(default_factory=dict)
    survival_loads: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mesh: Mesh | None = None  # final shape

    @property
    def J(self) -> np.ndarray:
        return np.array([r.J for r in self.records])

    @property
    def volumes(self) -> np.ndarray:
        return np.array([r.volume for r in self.records])


def _direction(mesh: Mesh, grad_theta: np.ndarray, J: float, config: FlowConfig) -> np.ndarray:
    if config.scaling == "log":
        # a load-free body has J == 0 and nothing to improve
        g = grad_theta / J if J > 0 else np.zeros_like(grad_theta)
    else:
        g = grad_theta
    if config.volume_mode == "off":
        return g
    gv = morph_jacobian(mesh).T @ volume_gradient(mesh).ravel()
    if config.volume_mode == "literal":
        return g - gv
    return project_volume(g, gv)


def _restore_volume(mesh: Mesh, theta: np.ndarray, target: float) -> np.ndarray:
    # volume is affine in the column heights, so one secant step is exact
    k = mesh.nx - 2
    mid = 0.5 * (theta[:k] + theta[k:])
    half = 0.5 * (theta[k:] - theta[:k])

    def vol(s):
        return volume(morph(mesh, np.concatenate([mid - s * half, mid + s * half])))

    # s = 0 would collapse every column, so take the secant through 1/2 and 1
    v_half, v1 = vol(0.5), vol(1.0)
    s = 1.0 + 0.5 * (target - v1) / (v1 - v_half)
    return np.concatenate([mid - s * half, mid + s * half])


def flow_step(
    mesh: Mesh,
    theta: np.ndarray,
    config: FlowConfig,
    material: Material,
    load: LoadCase,
    params: WeibullParams,
    alpha: float | None = None,
    target_volume: float | None = None,
):
    """One update of the design vector.

    Returns ``(theta_new, mesh_new, record)``. ``record`` describes the
    state *before* the update (its ``J`` and gradient) together with the
    step size that was actually taken.
    """
    mesh = morph(mesh, theta)
    grad = shape_gradient(mesh, material, load, params)
    d = _direction(mesh, grad.dj_dtheta, grad.J, config)
    if alpha is None:
        alpha = config.step_alpha
    if alpha is None:
        dmax = float(np.max(np.abs(d)))
        height = float(np.mean(theta[len(theta) // 2 :] - theta[: len(theta) // 2]))
        alpha = config.max_move * height / dmax if dmax > 0 else 1.0
    record = FlowRecord(0, grad.J, volume(mesh), float(np.linalg.norm(d)), alpha, np.array(theta))
    if not np.any(d):
        return np.array(theta), mesh, record
    a = alpha
    for _ in range(config.max_backoff + 1):
        new = theta - a * d
        if config.renormalize_volume and target_volume is not None:
            try:
                new = _restore_volume(mesh, new, target_volume)
            except MeshError:
                pass
        try:
            new_mesh = morph(mesh, new)
        except MeshError as exc:
            log.info("step %.3e inverts the mesh (%s); halving", a, exc)
            a *= 0.5
            continue
        record.alpha = a
        return new, new_mesh, record
    raise FlowError(
        f"update still inverts the mesh after {config.max_backoff} halvings "
        f"(alpha={a:.3e}, |d|_inf={np.max(np.abs(d)):.3e})"
    )


def run_flow(
    mesh: Mesh,
    config: FlowConfig,
    material: Material,
    load: LoadCase,
    params: WeibullParams,
) -> FlowTrace:
    loads = np.asarray(config.survival_loads, dtype=float)
    trace = FlowTrace(survival_loads=loads)
    theta = extract_theta(mesh)
    vol0 = volume(mesh)
    alpha = config.step_alpha
    prev_J = None
    for it in range(config.max_iters + 1):
        if it == config.max_iters:
            # final state: objective only
            final = morph(mesh, theta)
            rec = FlowRecord(it, objective_at(final, material, load, params), volume(final), np.nan, np.nan, np.array(theta))
            new_theta = theta
        else:
            new_theta, _, rec = flow_step(
                mesh, theta, config, material, load, params, alpha=alpha, target_volume=vol0
            )
            rec.iter = it
            alpha = rec.alpha if alpha is None else alpha
        if loads.size:
            rec.failure = failure_curve(ObjectiveReport(rec.J, np.zeros(0), params.m), loads)
        trace.records.append(rec)
        if it % config.snapshot_every == 0 or it == config.max_iters:
            trace.snapshots[it] = morph(mesh, theta)
        if it == config.max_iters:
            break
        if prev_J is not None and config.stop_tol > 0 and (prev_J - rec.J) < config.stop_tol * prev_J:
            trace.snapshots[it] = morph(mesh, theta)
            break
        prev_J = rec.J
        theta = new_theta
    trace.mesh = morph(mesh, theta)
    return trace

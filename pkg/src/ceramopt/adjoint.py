"""Discrete adjoint shape gradient of the failure intensity.

For the discrete Lagrangian ``J(X, U) - Lambda^T (B(X) U - F(X))`` the total
derivative is

    dJ/dX = dJ/dX|_U + Lambda^T (dF/dX - dB/dX U),   B Lambda = dJ/dU.

All partial derivatives are closed form per element. With ``A`` the
reference-map gradient of an element, a scalar of the form
``area * w(grad u)`` with ``grad u = P A^{-1}`` has
``d/dA = area * (w I - grad u^T dw/dgrad u) A^{-T}``, which is contracted
with the reference hat gradients to obtain node derivatives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fem import (
    ElasticState,
    LoadCase,
    Material,
    assemble_full_stiffness,
    assemble_load,
    displacement_gradients,
    element_geometry,
    solve_state,
)
from .mesh import DIRICHLET, NEUMANN_FIXED, Mesh, area_gradients, morph_jacobian, scatter_nodal
from .objective import WeibullParams, angular_integral_and_grad, evaluate_objective
from .quadrature import REFERENCE_GRADIENTS, edge_gauss3, triangle_7point, triangle_shape_values

log = logging.getLogger(__name__)


def _to_nodes(dA: np.ndarray) -> np.ndarray:
    # dA is (T, 2, 2) = d/dA; A[r, k] = sum_a X[a, r] Ghat[a, k]
    return np.einsum("trk,ak->tar", dA, REFERENCE_GRADIENTS)


def _zero_dirichlet(mesh: Mesh, v: np.ndarray) -> np.ndarray:
    v = v.reshape(-1, 2).copy()
    v[mesh.tags == DIRICHLET] = 0.0
    return v.ravel()


def _element_terms(mesh: Mesh, U: np.ndarray, material: Material, params: WeibullParams, geom):
    H = displacement_gradients(mesh, U, geom)
    sigma = material.stress(H)
    T, D = angular_integral_and_grad(sigma, params.m, params.n_angles)
    S = material.stress(D)  # C : D, the derivative of T w.r.t. grad u
    return H, T, S


def _dj_du(mesh, geom, S, params) -> np.ndarray:
    local = params.scale * geom.area[:, None, None] * np.einsum("tak,trk->tar", geom.grads, S)
    return _zero_dirichlet(mesh, scatter_nodal(mesh.n_nodes, mesh.triangles, local).ravel())


def _dj_dx(mesh, geom, H, T, S, params) -> np.ndarray:
    M = T[:, None, None] * np.eye(2) - np.einsum("tkr,tks->trs", H, S)
    dA = params.scale * geom.area[:, None, None] * np.einsum("trs,tks->trk", M, geom.jac_inv)
    return scatter_nodal(mesh.n_nodes, mesh.triangles, _to_nodes(dA))


def dj_du(mesh: Mesh, U: np.ndarray, material: Material, params: WeibullParams) -> np.ndarray:
    """``dJ/dU`` as a full-length vector, zero on Dirichlet DOFs."""
    geom = element_geometry(mesh)
    _, _, S = _element_terms(mesh, U, material, params, geom)
    return _dj_du(mesh, geom, S, params)


def dj_dx_partial(mesh: Mesh, U: np.ndarray, material: Material, params: WeibullParams) -> np.ndarray:
    """``dJ/dX`` at frozen ``U``, shape ``(N, 2)``."""
    geom = element_geometry(mesh)
    H, T, S = _element_terms(mesh, U, material, params, geom)
    return _dj_dx(mesh, geom, H, T, S, params)


def _load_contraction(mesh: Mesh, Lam: np.ndarray, load: LoadCase) -> np.ndarray:
    """``Lambda^T dF/dX`` at constant body force and traction."""
    out = np.zeros((mesh.n_nodes, 2))
    L = Lam.reshape(-1, 2)
    f = load.f
    if np.any(f != 0.0):
        rule = triangle_7point()
        w = rule.weights @ triangle_shape_values(rule.points)
        # F_a = det * w_a * f and det = 2 * area
        coef = np.einsum("tar,a,r->t", L[mesh.triangles], w, f)
        local = 2.0 * coef[:, None, None] * area_gradients(mesh.nodes, mesh.triangles)
        out += scatter_nodal(mesh.n_nodes, mesh.triangles, local)
    g = load.g
    if np.any(g != 0.0):
        edges = mesh.neumann_edges()
        rule = edge_gauss3()
        s = rule.points[:, 0]
        w = np.array([rule.weights @ (1.0 - s), rule.weights @ s])
        p = mesh.nodes[edges]
        d = p[:, 1] - p[:, 0]
        length = np.linalg.norm(d, axis=1)
        coef = L[edges[:, 0]] @ g * w[0] + L[edges[:, 1]] @ g * w[1]
        dl = d / length[:, None]
        np.add.at(out, edges[:, 1], coef[:, None] * dl)
        np.add.at(out, edges[:, 0], -coef[:, None] * dl)
    return out


def _stiffness_contraction(mesh: Mesh, U: np.ndarray, Lam: np.ndarray, material: Material) -> np.ndarray:
    """``Lambda^T (dB/dX) U`` element by element, without forming ``dB/dX``."""
    geom = element_geometry(mesh)
    Hu = displacement_gradients(mesh, U, geom)
    Hl = displacement_gradients(mesh, Lam, geom)
    su = material.stress(Hu)
    sl = material.stress(Hl)
    w = np.einsum("trk,trk->t", su, Hl)
    M = (
        w[:, None, None] * np.eye(2)
        - np.einsum("tkr,tks->trs", Hu, sl)
        - np.einsum("tkr,tks->trs", Hl, su)
    )
    dA = geom.area[:, None, None] * np.einsum("trs,tks->trk", M, geom.jac_inv)
    return scatter_nodal(mesh.n_nodes, mesh.triangles, _to_nodes(dA))


def adjoint_contraction(
    mesh: Mesh, U: np.ndarray, Lam: np.ndarray, material: Material, load: LoadCase
) -> np.ndarray:
    """``Lambda^T (dF/dX - dB/dX U)``, shape ``(N, 2)``."""
    return _load_contraction(mesh, Lam, load) - _stiffness_contraction(mesh, U, Lam, material)


@dataclass(frozen=True, eq=False)
class ShapeGradient:
    J: float
    U: np.ndarray
    Lambda: np.ndarray
    dj_dx_partial: np.ndarray
    adjoint_term: np.ndarray
    dj_dtheta: np.ndarray | None

    @property
    def dj_dx(self) -> np.ndarray:
        return self.dj_dx_partial + self.adjoint_term

    def masked(self, mesh: Mesh) -> np.ndarray:
        """``dJ/dX`` with the boundary-condition nodes zeroed."""
        g = self.dj_dx.copy()
        g[np.isin(mesh.tags, (DIRICHLET, NEUMANN_FIXED))] = 0.0
        return g


def solve_adjoint(state: ElasticState, rhs: np.ndarray) -> np.ndarray:
    # B is symmetric after elimination, so B^T Lambda = rhs reuses the state factors
    return state.solve(rhs)


def shape_gradient(
    mesh: Mesh,
    material: Material,
    load: LoadCase,
    params: WeibullParams,
    with_theta: bool = True,
) -> ShapeGradient:
    state = solve_state(mesh, material, load)
    U = state.U
    geom = element_geometry(mesh)
    H, T, S = _element_terms(mesh, U, material, params, geom)
    J = float(np.sum(geom.area * (params.scale * T)))
    Lam = solve_adjoint(state, _dj_du(mesh, geom, S, params))
    partial = _dj_dx(mesh, geom, H, T, S, params)
    adj = adjoint_contraction(mesh, U, Lam, material, load)
    theta = None
    if with_theta:
        theta = morph_jacobian(mesh).T @ (partial + adj).ravel()
    return ShapeGradient(J, U, Lam, partial, adj, theta)


def objective_at(mesh: Mesh, material: Material, load: LoadCase, params: WeibullParams) -> float:
    state = solve_state(mesh, material, load)
    return evaluate_objective(mesh, state.U, material, params).J


# --- finite-difference validation ------------------------------------------


def movable_mask(mesh: Mesh) -> np.ndarray:
    """``(N, 2)`` mask of coordinates off the boundary-condition columns."""
    keep = ~np.isin(mesh.tags, (DIRICHLET, NEUMANN_FIXED))
    return np.repeat(keep[:, None], 2, axis=1)


def random_direction(mesh: Mesh, rng: np.random.Generator) -> np.ndarray:
    """Standard normal entries on every movable coordinate, zero elsewhere."""
    return rng.standard_normal((mesh.n_nodes, 2)) * movable_mask(mesh)


@dataclass(frozen=True)
class FDRow:
    epsilon: float
    ratio: float
    fd_quotient: float
    directional: float
    lost_digits: float

    @property
    def cancellation(self) -> bool:
        return self.lost_digits >= 8.0


def validate_fd(
    mesh: Mesh,
    material: Material,
    load: LoadCase,
    params: WeibullParams,
    directions: int = 1,
    epsilons=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8),
    seed: int = 0,
    V: np.ndarray | None = None,
) -> list[list[FDRow]]:
    """Compare ``<dJ/dX, V>`` with one-sided quotients ``(J(X + eps V) - J(X)) / eps``.

    Returns one table per direction; ``ratio`` is the gradient prediction over
    the quotient. Random directions are flipped to ascent directions
    (``<dJ/dX, V> >= 0``). The prediction uses the perturbation that is
    actually representable, ``fl(X + eps V) - X``. Rows where ``J`` changes
    by less than eight significant digits are flagged through ``lost_digits``.
    """
    if directions < 1:
        raise ValueError("need at least one direction")
    grad = shape_gradient(mesh, material, load, params, with_theta=False)
    rng = np.random.default_rng(seed)
    if V is not None:
        dirs = [np.asarray(V, dtype=float).reshape(-1, 2)]
    else:
        dirs = []
        for _ in range(directions):
            Vk = random_direction(mesh, rng)
            dirs.append(-Vk if np.sum(grad.dj_dx * Vk) < 0 else Vk)
    tables = []
    for Vk in dirs:
        if not np.any(Vk):
            raise ValueError("zero finite-difference direction")
        rows = []
        for eps in epsilons:
            Xp = mesh.nodes + eps * Vk
            pred = float(np.sum(grad.dj_dx * (Xp - mesh.nodes))) / eps
            Jp = objective_at(mesh.with_nodes(Xp), material, load, params)
            dJ = Jp - grad.J
            q = dJ / eps
            lost = np.inf if dJ == 0 else float(np.log10(abs(grad.J) / abs(dJ)))
            rows.append(FDRow(float(eps), pred / q if q != 0 else np.inf, q, pred, lost))
            if rows[-1].cancellation:
                log.warning("eps=%g: difference quotient lost %.1f digits", eps, lost)
        tables.append(rows)
    return tables

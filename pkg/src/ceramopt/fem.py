"""Linear elasticity with linear Lagrange triangles.

Global DOF ``2 * node + r`` is displacement component ``r`` of ``node``.
Dirichlet DOFs are removed from the system; full-length vectors carry zeros
there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import DIRICHLET, NEUMANN_FIXED, Mesh, MeshError
from .quadrature import (
    REFERENCE_GRADIENTS,
    edge_gauss3,
    triangle_7point,
    triangle_shape_values,
)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Material:
    young_modulus: float = 3.7e11
    poisson_ratio: float = 0.22

    def __post_init__(self):
        if not self.young_modulus > 0:
            raise ValueError("Young's modulus must be positive")
        if not 0.0 < self.poisson_ratio < 0.5:
            raise ValueError("Poisson's ratio must lie in (0, 0.5)")

    @property
    def lame_lambda(self) -> float:
        E, nu = self.young_modulus, self.poisson_ratio
        return nu * E / ((1.0 + nu) * (1.0 - 2.0 * nu))

    @property
    def lame_mu(self) -> float:
        return self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))

    def stress(self, grad: np.ndarray) -> np.ndarray:
        """Constitutive law applied to displacement gradients ``(..., 2, 2)``."""
        eps = 0.5 * (grad + np.swapaxes(grad, -1, -2))
        tr = eps[..., 0, 0] + eps[..., 1, 1]
        return self.lame_lambda * tr[..., None, None] * np.eye(2) + 2.0 * self.lame_mu * eps


@dataclass(frozen=True)
class LoadCase:
    """Constant body force (N/m^2) and constant traction (N/m) on the Neumann edges."""

    body_force: tuple[float, float] = (0.0, 0.0)
    traction: tuple[float, float] = (0.0, 0.0)
    load_scale: float = 1.0

    @classmethod
    def unit_force(cls, mesh: Mesh, force: float = 1.0, direction=(1.0, 0.0), body_force=(0.0, 0.0)):
        """Traction normalised so that the resultant on the Neumann boundary is ``force`` newtons."""
        edges = mesh.neumann_edges()
        p = mesh.nodes[edges]
        total = np.linalg.norm(p[:, 1] - p[:, 0], axis=1).sum()
        if total <= 0:
            raise MeshError("mesh has no Neumann edges to carry the traction")
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        g = force / total * d
        return cls(tuple(body_force), (float(g[0]), float(g[1])))

    def scaled(self, factor: float) -> "LoadCase":
        return LoadCase(self.body_force, self.traction, self.load_scale * factor)

    @property
    def g(self) -> np.ndarray:
        return self.load_scale * np.asarray(self.traction, dtype=float)

    @property
    def f(self) -> np.ndarray:
        return np.asarray(self.body_force, dtype=float)


# --- element geometry --------------------------------------------------------


@dataclass(frozen=True)
class ElementGeometry:
    jac: np.ndarray  # (T, 2, 2) reference-map gradient
    jac_inv: np.ndarray
    det: np.ndarray  # (T,)
    grads: np.ndarray  # (T, 3, 2) physical hat gradients

    @property
    def area(self) -> np.ndarray:
        return 0.5 * self.det


def element_geometry(mesh: Mesh) -> ElementGeometry:
    p = mesh.nodes[mesh.triangles]
    jac = np.einsum("tar,ak->trk", p, REFERENCE_GRADIENTS)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    bad = np.flatnonzero(~(det > 0))
    if bad.size:
        raise MeshError(f"singular or inverted element map at element {bad[0]}")
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1]
    inv[:, 1, 1] = jac[:, 0, 0]
    inv[:, 0, 1] = -jac[:, 0, 1]
    inv[:, 1, 0] = -jac[:, 1, 0]
    inv /= det[:, None, None]
    grads = np.einsum("ak,tkr->tar", REFERENCE_GRADIENTS, inv)
    return ElementGeometry(jac, inv, det, grads)


def element_dofs(mesh: Mesh) -> np.ndarray:
    t = mesh.triangles
    return np.stack([2 * t, 2 * t + 1], axis=-1).reshape(-1, 6)


def displacement_gradients(mesh: Mesh, U: np.ndarray, geom: ElementGeometry | None = None) -> np.ndarray:
    """``grad u`` per element, ``(T, 2, 2)`` with entry ``[r, k] = d u_r / d x_k``."""
    geom = geom or element_geometry(mesh)
    Ue = np.asarray(U).reshape(-1, 2)[mesh.triangles]
    return np.einsum("tar,tak->trk", Ue, geom.grads)


def element_stiffness(mesh: Mesh, material: Material, geom: ElementGeometry | None = None) -> np.ndarray:
    """Element matrices ``(T, 6, 6)`` from the one-point rule (exact for linear strain)."""
    geom = geom or element_geometry(mesh)
    G = geom.grads
    lam, mu = material.lame_lambda, material.lame_mu
    gg = np.einsum("tak,tbk->tab", G, G)
    K = lam * np.einsum("tar,tbs->tarbs", G, G)
    K += mu * np.einsum("tas,tbr->tarbs", G, G)
    K += mu * gg[:, :, None, :, None] * np.eye(2)[None, None, :, None, :]
    K *= geom.area[:, None, None, None, None]
    return K.reshape(-1, 6, 6)


def free_dofs(mesh: Mesh) -> np.ndarray:
    fixed = np.zeros(2 * mesh.n_nodes, dtype=bool)
    d = mesh.nodes_with_tag(DIRICHLET)
    fixed[2 * d] = True
    fixed[2 * d + 1] = True
    return np.flatnonzero(~fixed)


def assemble_full_stiffness(mesh: Mesh, material: Material) -> sp.csr_matrix:
    """Stiffness on all ``2N`` DOFs, before Dirichlet elimination."""
    Ke = element_stiffness(mesh, material)
    dofs = element_dofs(mesh)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_nodes
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    # duplicate summation order differs between (i, j) and (j, i); a + b == b + a
    # in IEEE arithmetic, so this makes the assembled matrix bitwise symmetric
    return ((K + K.T) * 0.5).tocsr()


def assemble_stiffness(mesh: Mesh, material: Material) -> sp.csc_matrix:
    """Stiffness restricted to the free DOFs (Dirichlet rows and columns removed)."""
    K = assemble_full_stiffness(mesh, material)
    free = free_dofs(mesh)
    return K[free][:, free].tocsc()


def _check_edges(mesh: Mesh, edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    untagged = ~(mesh.tags[edges] == NEUMANN_FIXED).all(axis=1)
    if untagged.any():
        e = edges[np.flatnonzero(untagged)[0]]
        raise MeshError(f"traction on edge ({e[0]}, {e[1]}) outside the Neumann boundary")
    return edges


def assemble_load(mesh: Mesh, load: LoadCase, edges: np.ndarray | None = None) -> np.ndarray:
    """Full-length nodal force vector (``2N``): 7-point volume rule, 3-point edge rule."""
    F = np.zeros((mesh.n_nodes, 2))
    f = load.f
    if np.any(f != 0.0):
        rule = triangle_7point()
        phi = triangle_shape_values(rule.points)  # (q, 3)
        w = np.einsum("q,qa->a", rule.weights, phi)
        det = element_geometry(mesh).det
        local = det[:, None, None] * w[None, :, None] * f[None, None, :]
        np.add.at(F, mesh.triangles, local)
    g = load.g
    if np.any(g != 0.0):
        edges = mesh.neumann_edges() if edges is None else _check_edges(mesh, edges)
        rule = edge_gauss3()
        s = rule.points[:, 0]
        w = np.stack([rule.weights @ (1.0 - s), rule.weights @ s])
        p = mesh.nodes[edges]
        length = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        local = length[:, None, None] * w[None, :, None] * g[None, None, :]
        np.add.at(F, edges, local)
    return F.ravel()


# --- solve ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ElasticState:
    U: np.ndarray  # (2N,) with zeros on Dirichlet DOFs
    stiffness: sp.csc_matrix  # free-DOF block
    load: np.ndarray  # (2N,) nodal forces
    free: np.ndarray
    _lu: object = field(repr=False, default=None)

    def solve(self, rhs_full: np.ndarray) -> np.ndarray:
        """Solve with the stored factorisation; full-length in, full-length out."""
        out = np.zeros_like(rhs_full, dtype=float)
        out[self.free] = self._lu.solve(np.asarray(rhs_full, dtype=float)[self.free])
        return out

    @property
    def residual(self) -> float:
        return float(np.linalg.norm(self.stiffness @ self.U[self.free] - self.load[self.free]))

    @property
    def displacements(self) -> np.ndarray:
        return self.U.reshape(-1, 2)


def factorize(K: sp.csc_matrix):
    try:
        lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise SolverError(
            f"stiffness factorisation failed ({exc}); the system is not SPD: "
            "check for inverted elements or missing Dirichlet constraints"
        ) from exc
    return lu


def solve_state(mesh: Mesh, material: Material, load: LoadCase) -> ElasticState:
    if mesh.nodes_with_tag(DIRICHLET).size == 0:
        raise SolverError("no Dirichlet nodes: rigid body modes make the stiffness singular")
    K = assemble_stiffness(mesh, material)
    F = assemble_load(mesh, load)
    free = free_dofs(mesh)
    lu = factorize(K)
    U = np.zeros(2 * mesh.n_nodes)
    U[free] = lu.solve(F[free])
    if not np.all(np.isfinite(U)):
        raise SolverError("non-finite displacement; stiffness is singular or indefinite")
    return ElasticState(U, K, F, free, lu)


def element_stresses(mesh: Mesh, U: np.ndarray, material: Material) -> np.ndarray:
    return material.stress(displacement_gradients(mesh, U))


def element_stress(mesh: Mesh, U: np.ndarray, material: Material, element: int) -> np.ndarray:
    geom = element_geometry(mesh)
    Ue = np.asarray(U).reshape(-1, 2)[mesh.triangles[element]]
    grad = Ue.T @ geom.grads[element]
    return material.stress(grad)

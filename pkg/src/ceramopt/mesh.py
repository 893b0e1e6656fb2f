"""Structured triangular meshes of rectangular parts, morphing and volume.

Node ``(i, j)`` (column ``i`` along x, row ``j`` along y) has index
``j * nx + i``. Every grid cell is split along its lower-left to
upper-right diagonal into two counterclockwise triangles.

Design parameters ``theta`` hold the y-coordinates of the free surface:
``theta[:nx-2]`` are the bottom nodes of columns ``1 .. nx-2`` and
``theta[nx-2:]`` the top nodes of the same columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

DIRICHLET = "D"
NEUMANN_FIXED = "N"
FREE = "F"
INTERIOR = "I"
TAGS = (DIRICHLET, NEUMANN_FIXED, FREE, INTERIOR)


class MeshError(ValueError):
    """Raised for degenerate or inverted meshes and invalid design vectors."""


def signed_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray
    nx: int
    ny: int

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        tris = np.array(self.triangles, dtype=np.int64)
        tags = np.array(self.tags, dtype="<U1")
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise MeshError("nodes must have shape (N, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise MeshError("triangles must have shape (T, 3)")
        if tags.shape != (len(nodes),):
            raise MeshError("one tag per node required")
        if not np.isin(tags, TAGS).all():
            raise MeshError(f"unknown tag, expected one of {TAGS}")
        if tris.size and (tris.min() < 0 or tris.max() >= len(nodes)):
            raise MeshError("triangle references a missing node")
        areas = signed_areas(nodes, tris)
        bad = np.flatnonzero(~(areas > 0.0))
        if bad.size:
            raise MeshError(
                f"element {bad[0]} has non-positive area {areas[bad[0]]:.3e} "
                f"({bad.size} inverted elements)"
            )
        for arr in (nodes, tris, tags):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "tags", tags)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def structured_dims(self) -> tuple[int, int]:
        return self.nx, self.ny

    @property
    def areas(self) -> np.ndarray:
        return signed_areas(self.nodes, self.triangles)

    @property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def node_index(self, i, j):
        return np.asarray(j) * self.nx + np.asarray(i)

    def with_nodes(self, nodes: np.ndarray) -> "Mesh":
        new = Mesh(nodes, self.triangles, self.tags, self.nx, self.ny)
        # topology is shared, so cached edge sets carry over
        for key in ("_boundary_edges", "_neumann_edges"):
            if key in self.__dict__:
                object.__setattr__(new, key, self.__dict__[key])
        return new

    def nodes_with_tag(self, tag: str) -> np.ndarray:
        return np.flatnonzero(self.tags == tag)

    def boundary_edges(self) -> np.ndarray:
        """Edges that belong to exactly one triangle, oriented as in their triangle."""
        if "_boundary_edges" not in self.__dict__:
            object.__setattr__(self, "_boundary_edges", self._find_boundary_edges())
        return self.__dict__["_boundary_edges"]

    def _find_boundary_edges(self) -> np.ndarray:
        t = self.triangles
        edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = np.sort(edges, axis=1)
        _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        return edges[counts[inverse.ravel()] == 1]

    def neumann_edges(self) -> np.ndarray:
        if "_neumann_edges" not in self.__dict__:
            edges = self.boundary_edges()
            on = (self.tags[edges] == NEUMANN_FIXED).all(axis=1)
            object.__setattr__(self, "_neumann_edges", edges[on])
        return self.__dict__["_neumann_edges"]


def _grid_triangles(nx: int, ny: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="xy")
    ll = (j * nx + i).ravel()
    lr, ur, ul = ll + 1, ll + nx + 1, ll + nx
    lower = np.stack([ll, lr, ur], axis=1)
    upper = np.stack([ll, ur, ul], axis=1)
    # interleave so cell k owns triangles 2k and 2k+1
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def _grid_tags(nx: int, ny: int) -> np.ndarray:
    tags = np.full((ny, nx), INTERIOR, dtype="<U1")
    tags[0, :] = FREE
    tags[-1, :] = FREE
    tags[:, 0] = DIRICHLET
    tags[:, -1] = NEUMANN_FIXED
    return tags.ravel()


def structured_mesh(
    length: float,
    height: float,
    nx: int,
    ny: int,
    offset: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Mesh:
    """Rectangle ``[0, length] x [0, height]`` with columns shifted vertically by ``offset(x)``."""
    if nx < 2 or ny < 2:
        raise MeshError(f"need nx >= 2 and ny >= 2, got nx={nx}, ny={ny}")
    if not (length > 0 and height > 0):
        raise MeshError("length and height must be positive")
    x = np.linspace(0.0, length, nx)
    y = np.linspace(0.0, height, ny)
    X, Y = np.meshgrid(x, y, indexing="xy")
    if offset is not None:
        shift = np.asarray(offset(x), dtype=float)
        if not np.all(np.isfinite(shift)):
            raise MeshError("deformation profile must be finite")
        Y = Y + shift[None, :]
    nodes = np.stack([X.ravel(), Y.ravel()], axis=1)
    return Mesh(nodes, _grid_triangles(nx, ny), _grid_tags(nx, ny), nx, ny)


def cosine_bump(amplitude: float, start: float, width: float) -> Callable[[np.ndarray], np.ndarray]:
    """``A (1 - cos(2 pi (x - start) / width)) / 2`` inside ``[start, start + width]``, zero outside."""
    if width <= 0:
        raise MeshError("bump width must be positive")

    def profile(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= start) & (x <= start + width)
        bump = amplitude * 0.5 * (1.0 - np.cos(2.0 * np.pi * (x - start) / width))
        return np.where(inside, bump, 0.0)

    return profile


def generate_rod(
    length: float = 0.6,
    height: float = 0.1,
    nx: int = 61,
    ny: int = 9,
    deform: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Mesh:
    """Bended rod: straight rod with every column shifted by ``deform(x)``.

    ``deform=None`` gives the straight rod. Use :func:`cosine_bump` for the
    default middle-third bend.
    """
    if nx < 3:
        raise MeshError("a rod needs at least one movable column (nx >= 3)")
    return structured_mesh(length, height, nx, ny, deform)


def default_bend(length: float = 0.6, amplitude: float = 0.05):
    return cosine_bump(amplitude, length / 3.0, length / 3.0)


def s_curve(length: float, offset: float) -> Callable[[np.ndarray], np.ndarray]:
    def profile(x):
        return offset * 0.5 * (1.0 - np.cos(np.pi * np.asarray(x, dtype=float) / length))

    return profile


def generate_joint(
    length: float = 0.6,
    height: float = 0.1,
    nx: int = 61,
    ny: int = 17,
    offset: float = 0.2,
) -> Mesh:
    """S-shaped joint whose midline rises smoothly by ``offset`` from left to right."""
    if nx < 3:
        raise MeshError("a joint needs at least one movable column (nx >= 3)")
    if offset == 0.0:
        return structured_mesh(length, height, nx, ny)
    return structured_mesh(length, height, nx, ny, s_curve(length, offset))


# --- design parametrization -------------------------------------------------


def theta_size(mesh: Mesh) -> int:
    return 2 * (mesh.nx - 2)


def extract_theta(mesh: Mesh) -> np.ndarray:
    nx, ny = mesh.nx, mesh.ny
    cols = np.arange(1, nx - 1)
    bottom = mesh.nodes[cols, 1]
    top = mesh.nodes[(ny - 1) * nx + cols, 1]
    return np.concatenate([bottom, top])


def morph(mesh: Mesh, theta: np.ndarray) -> Mesh:
    """Place the free surface at ``theta``; interior nodes are spaced evenly per column."""
    theta = np.asarray(theta, dtype=float)
    nx, ny = mesh.nx, mesh.ny
    k = nx - 2
    if theta.shape != (2 * k,):
        raise MeshError(f"theta must have {2 * k} entries, got {theta.shape}")
    bottom, top = theta[:k], theta[k:]
    thin = np.flatnonzero(~(top > bottom))
    if thin.size:
        raise MeshError(f"column {thin[0] + 1} has top <= bottom")
    s = np.arange(ny)[:, None] / (ny - 1)
    # (1 - s) b + s t hits both surface values exactly
    ys = (1.0 - s) * bottom[None, :] + s * top[None, :]
    nodes = np.array(mesh.nodes)
    idx = np.arange(ny)[:, None] * nx + np.arange(1, nx - 1)[None, :]
    nodes[idx, 1] = ys
    return mesh.with_nodes(nodes)


def morph_jacobian(mesh: Mesh) -> sp.csr_matrix:
    """Exact ``dX/dtheta`` of shape ``(2N, 2(nx-2))``; X flattened as ``[x0, y0, x1, y1, ...]``."""
    nx, ny = mesh.nx, mesh.ny
    k = nx - 2
    rows, cols, vals = [], [], []
    for j in range(ny):
        s = j / (ny - 1)
        node = j * nx + np.arange(1, nx - 1)
        col = np.arange(k)
        if s < 1.0:
            rows.append(2 * node + 1)
            cols.append(col)
            vals.append(np.full(k, 1.0 - s))
        if s > 0.0:
            rows.append(2 * node + 1)
            cols.append(col + k)
            vals.append(np.full(k, s))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * mesh.n_nodes, 2 * k),
    )


# --- volume ------------------------------------------------------------------


def volume(mesh: Mesh) -> float:
    return float(np.sum(mesh.areas))


def area_gradients(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Per-triangle derivative of the signed area w.r.t. its three vertices, shape ``(T, 3, 2)``."""
    p = nodes[triangles]
    # d area / d p_a = 0.5 * rot(p_c - p_b), with (a, b, c) cyclic
    opp = p[:, [2, 0, 1]] - p[:, [1, 2, 0]]
    return 0.5 * np.stack([-opp[..., 1], opp[..., 0]], axis=-1)


def scatter_nodal(n_nodes: int, triangles: np.ndarray, local: np.ndarray) -> np.ndarray:
    """Sum per-element ``(T, 3, 2)`` contributions into ``(N, 2)`` in element order."""
    out = np.zeros((n_nodes, 2))
    np.add.at(out, triangles, local)
    return out


def volume_gradient(mesh: Mesh) -> np.ndarray:
    """``d(volume)/dX`` as an ``(N, 2)`` array."""
    return scatter_nodal(mesh.n_nodes, mesh.triangles, area_gradients(mesh.nodes, mesh.triangles))

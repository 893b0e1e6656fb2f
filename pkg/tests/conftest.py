import numpy as np
import pytest

from ceramopt.fem import LoadCase, Material
from ceramopt.mesh import Mesh, default_bend, generate_rod, structured_mesh
from ceramopt.objective import WeibullParams


@pytest.fixture
def material():
    return Material()


@pytest.fixture
def params():
    return WeibullParams(m=10.0, sigma0=1.0e3, n_angles=128)


@pytest.fixture(scope="session")
def bent_rod():
    return generate_rod(deform=default_bend())


@pytest.fixture(scope="session")
def straight_rod():
    return generate_rod()


def jittered_mesh(seed=0, nx=6, ny=3, length=1.0, height=0.5, amount=0.15) -> Mesh:
    """Small structured mesh (20 triangles for 6x3) with randomly displaced nodes."""
    rng = np.random.default_rng(seed)
    base = structured_mesh(length, height, nx, ny)
    hx, hy = length / (nx - 1), height / (ny - 1)
    nodes = np.array(base.nodes)
    nodes += amount * rng.uniform(-1, 1, nodes.shape) * [hx, hy]
    return base.with_nodes(nodes)


@pytest.fixture
def random_mesh():
    return jittered_mesh()


@pytest.fixture
def random_load(random_mesh):
    return LoadCase.unit_force(random_mesh, 1.0, direction=(1.0, 0.3), body_force=(0.4, -2.0))


def mirror_y(mesh: Mesh, height: float) -> Mesh:
    """Reflect a structured mesh about ``y = height / 2`` keeping row order and orientation."""
    nx, ny = mesh.nx, mesh.ny
    j, i = np.divmod(np.arange(mesh.n_nodes), nx)
    src = (ny - 1 - j) * nx + i  # new node k comes from old node src[k]
    new_of_old = np.empty_like(src)
    new_of_old[src] = np.arange(mesh.n_nodes)
    nodes = mesh.nodes[src] * [1.0, -1.0] + [0.0, height]
    tris = new_of_old[mesh.triangles][:, [0, 2, 1]]
    return Mesh(nodes, tris, mesh.tags[src], nx, ny)


def mirror_vector(mesh: Mesh, v: np.ndarray, pseudo=False) -> np.ndarray:
    """Reflect a nodal 2-vector field onto the mirrored node numbering."""
    nx, ny = mesh.nx, mesh.ny
    j, i = np.divmod(np.arange(mesh.n_nodes), nx)
    src = (ny - 1 - j) * nx + i
    return np.asarray(v).reshape(-1, 2)[src] * [1.0, -1.0]

"""Figures for the report path of the command-line tool."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402
from matplotlib.tri import Triangulation  # noqa: E402

from .mesh import FREE, Mesh  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
    "figure.dpi": 100,
}


def _figure(width=6.0, height=None):
    plt.rcParams.update(STYLE)
    height = height or width * 0.5
    return plt.subplots(figsize=(width, height))


def save(fig, path) -> None:
    # no version string in the metadata keeps the bytes reproducible
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def _tri(mesh: Mesh) -> Triangulation:
    return Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.triangles)


def _outline(mesh: Mesh):
    nx, ny = mesh.nx, mesh.ny
    grid = mesh.nodes.reshape(ny, nx, 2)
    ring = np.concatenate([grid[0], grid[1:, -1], grid[-1, ::-1][1:], grid[::-1, 0][1:]])
    return ring[:, 0], ring[:, 1]


def plot_mesh(mesh: Mesh, path, title="mesh") -> None:
    fig, ax = _figure()
    ax.triplot(_tri(mesh), color="0.4", lw=0.3)
    colors = {"D": "tab:blue", "N": "tab:red", "F": "tab:green"}
    for tag, c in colors.items():
        pts = mesh.nodes[mesh.tags == tag]
        ax.plot(pts[:, 0], pts[:, 1], ".", ms=2.5, color=c, label=tag)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(title)
    ax.legend(loc="upper right", ncol=3)
    save(fig, path)


def plot_displacement(mesh: Mesh, U: np.ndarray, path) -> None:
    fig, ax = _figure()
    disp = np.asarray(U).reshape(-1, 2)
    mag = np.linalg.norm(disp, axis=1)
    tpc = ax.tripcolor(_tri(mesh), mag, shading="gouraud", cmap="viridis")
    fig.colorbar(tpc, ax=ax, label="|u| [m]")
    ax.set_aspect("equal")
    ax.set_title("displacement magnitude")
    save(fig, path)


def plot_intensity(mesh: Mesh, density: np.ndarray, path, title="local failure intensity") -> None:
    fig, ax = _figure()
    d = np.asarray(density, dtype=float)
    top = d.max() if d.max() > 0 else 1.0
    floor = top * 1e-8
    tpc = ax.tripcolor(
        _tri(mesh), facecolors=np.maximum(d, floor), norm=LogNorm(vmin=floor, vmax=top),
        cmap="inferno", edgecolors="none",
    )
    fig.colorbar(tpc, ax=ax, label="intensity density [1/m$^2$]")
    ax.set_aspect("equal")
    ax.set_title(title)
    save(fig, path)


def plot_gradient(mesh: Mesh, grad: np.ndarray, path) -> None:
    """Negative shape gradient on the free surface."""
    fig, ax = _figure()
    x, y = _outline(mesh)
    ax.plot(x, y, color="0.3", lw=0.8)
    sel = mesh.tags == FREE
    g = -np.asarray(grad).reshape(-1, 2)[sel]
    p = mesh.nodes[sel]
    gmax = np.max(np.linalg.norm(g, axis=1)) if g.size else 0.0
    # longest arrow drawn at 5% of the part length
    span = np.ptp(mesh.nodes[:, 0])
    scale = gmax / (0.05 * span) if gmax > 0 else 1.0
    ax.quiver(p[:, 0], p[:, 1], g[:, 0], g[:, 1], color="tab:red", width=0.002,
              angles="xy", scale_units="xy", scale=scale)
    ax.set_aspect("equal")
    ax.set_title("$-dJ/dX$ on the free surface")
    save(fig, path)


def plot_ratio(epsilons, ratios, path) -> None:
    fig, ax = _figure(4.5, 3.5)
    eps = np.asarray(epsilons)
    err = np.abs(np.asarray(ratios) - 1.0)
    ax.loglog(eps, err, "o-")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel("|ratio - 1|")
    ax.invert_xaxis()
    ax.set_title("adjoint gradient vs finite differences")
    save(fig, path)


def plot_shapes(snapshots: dict, path) -> None:
    fig, ax = _figure()
    keys = sorted(snapshots)
    cmap = plt.get_cmap("viridis")
    for n, k in enumerate(keys):
        x, y = _outline(snapshots[k])
        ax.plot(x, y, color=cmap(n / max(1, len(keys) - 1)), lw=0.8, label=f"iter {k}")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if len(keys) <= 12:
        ax.legend(loc="best", ncol=2)
    ax.set_title("shape flow")
    save(fig, path)


def plot_failure_curves(loads, curves: dict, path) -> None:
    fig, ax = _figure(5.0, 3.5)
    keys = sorted(curves)
    cmap = plt.get_cmap("plasma")
    for n, k in enumerate(keys):
        ax.plot(loads, curves[k], color=cmap(n / max(1, len(keys) - 1)), label=f"iter {k}")
    ax.set_xlabel("load F [N]")
    ax.set_ylabel("failure probability $1 - p_s$")
    ax.legend(loc="lower right", ncol=2)
    save(fig, path)


def plot_trace(iters, J, path) -> None:
    fig, ax = _figure(5.0, 3.5)
    ax.semilogy(iters, J)
    ax.set_xlabel("iteration")
    ax.set_ylabel("J")
    save(fig, path)

"""Plain-text formats for meshes, nodal fields, element stresses and tables.

All floats are written with 17 significant digits so that a read-back is
bit-identical to the array that was written.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from .mesh import Mesh

FMT = "%.17g"


def _fmt(v) -> str:
    return FMT % v


def write_mesh(path, mesh: Mesh) -> None:
    lines = [f"mesh2d v1 {mesh.n_nodes} {mesh.n_triangles} {mesh.nx} {mesh.ny}"]
    for (x, y), tag in zip(mesh.nodes, mesh.tags):
        lines.append(f"{_fmt(x)} {_fmt(y)} {tag}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if head[:2] != ["mesh2d", "v1"] or len(head) != 6:
        raise ValueError(f"{path}: not a mesh2d v1 file")
    n, t, nx, ny = map(int, head[2:])
    node_rows = [ln.split() for ln in lines[1 : 1 + n]]
    nodes = np.array([[float(r[0]), float(r[1])] for r in node_rows])
    tags = np.array([r[2] for r in node_rows])
    tris = np.array([[int(v) for v in ln.split()] for ln in lines[1 + n : 1 + n + t]], dtype=np.int64)
    if len(nodes) != n or len(tris) != t:
        raise ValueError(f"{path}: truncated mesh file")
    return Mesh(nodes, tris.reshape(-1, 3), tags, nx, ny)


def _write_rows(path, header: str, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [header]
    for row in zip(*cols):
        lines.append(" ".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _read_rows(path, magic: str) -> np.ndarray:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if head[:2] != [magic, "v1"]:
        raise ValueError(f"{path}: not a {magic} v1 file")
    n = int(head[2])
    return np.array([[float(v) for v in ln.split()] for ln in lines[1 : 1 + n]])


def write_field(path, U: np.ndarray, gradient: np.ndarray | None = None) -> None:
    """Nodal rows ``ux uy``, or ``ux uy gx gy`` when a gradient is attached."""
    U = np.asarray(U).reshape(-1, 2)
    cols = [U[:, 0], U[:, 1]]
    if gradient is not None:
        g = np.asarray(gradient).reshape(-1, 2)
        cols += [g[:, 0], g[:, 1]]
    _write_rows(path, f"field2d v1 {len(U)}", cols)


def read_field(path) -> np.ndarray:
    return _read_rows(path, "field2d")


def write_stress(path, sigma: np.ndarray, intensity: np.ndarray | None = None) -> None:
    """Element rows ``s11 s22 s12``, with the intensity density as a fourth column if given."""
    cols = [sigma[:, 0, 0], sigma[:, 1, 1], sigma[:, 0, 1]]
    if intensity is not None:
        cols.append(intensity)
    _write_rows(path, f"stress2d v1 {len(sigma)}", cols)


def read_stress(path) -> np.ndarray:
    return _read_rows(path, "stress2d")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}


def write_survival(path, loads, survival) -> None:
    survival = np.asarray(survival, dtype=float)
    write_csv(path, ["F", "p_survival", "p_failure"], zip(map(float, loads), survival, 1.0 - survival))


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_manifest(path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        return {}
    entries = {}
    for line in path.read_text().splitlines():
        if line.strip():
            digest, rel = line.split("  ", 1)
            entries[rel] = digest
    return entries


def write_manifest(out_dir, files) -> Path:
    """``<sha256>  <relative path>`` per artifact, sorted by path.

    Entries from earlier runs in the same directory are kept while their
    files still exist.
    """
    out = Path(out_dir)
    path = out / "manifest.txt"
    entries = {rel: d for rel, d in read_manifest(path).items() if (out / rel).exists()}
    for f in files:
        rel = Path(f).relative_to(out).as_posix()
        entries[rel] = sha256(out / rel)
    path.write_text("".join(f"{entries[r]}  {r}\n" for r in sorted(entries)))
    return path

"""P1 finite elements with vertex quadrature on 2D triangular meshes.

Stiffness entries come from the cotangent formula: for an interior edge ij
with opposite angles theta1, theta2,

    S_ij = -(cot theta1 + cot theta2) / 2,

diagonals fixed so full row sums vanish.  Mass is lumped: a third of the
incident triangle area per vertex.  The discrete maximum principle holds
exactly when every edge satisfies cot theta1 + cot theta2 >= 0 (Delaunay).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class TriMesh2D:
    vertices: np.ndarray       # (V, 2)
    triangles: np.ndarray      # (T, 3) vertex indices
    boundary_mask: np.ndarray  # (V,) bool, True on the boundary

    def __post_init__(self):
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshError("vertices must be a (V, 2) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be a (T, 3) array")
        if self.boundary_mask.shape != (len(self.vertices),):
            raise MeshError("boundary_mask length must match vertex count")

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)


def read_mesh(path) -> TriMesh2D:
    """Plain-text mesh: 'V T' header, V lines 'x y flag', T lines 'i j k'."""
    with open(path) as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise MeshError(f"{path}: missing header")
    nv, nt = int(tokens[0]), int(tokens[1])
    need = 2 + 3 * nv + 3 * nt
    if len(tokens) != need:
        raise MeshError(f"{path}: expected {need} fields, found {len(tokens)}")
    body = tokens[2:]
    verts = np.array(body[:3 * nv], dtype=float).reshape(nv, 3)
    tris = np.array(body[3 * nv:], dtype=int).reshape(nt, 3)
    return TriMesh2D(verts[:, :2], tris, verts[:, 2] != 0)


def write_mesh(path, mesh: TriMesh2D) -> None:
    with open(path, "w") as f:
        f.write(f"{len(mesh.vertices)} {len(mesh.triangles)}\n")
        for (x, y), flag in zip(mesh.vertices, mesh.boundary_mask):
            f.write(f"{float(x)!r} {float(y)!r} {int(flag)}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")


def _triangle_geometry(mesh: TriMesh2D, t: int):
    """Signed area and per-corner cotangents of triangle t."""
    i, j, k = mesh.triangles[t]
    p = mesh.vertices
    e_jk = p[k] - p[j]
    e_ki = p[i] - p[k]
    e_ij = p[j] - p[i]
    area2 = e_ij[0] * (-e_ki[1]) - e_ij[1] * (-e_ki[0])  # 2 * signed area
    if area2 <= 0:
        raise MeshError(f"triangle {t} has non-positive area {area2 / 2.0}")
    # cot at corner i = (opposite edge dot products) / (2 area)
    cots = np.array([
        -np.dot(e_ij, e_ki),
        -np.dot(e_jk, e_ij),
        -np.dot(e_ki, e_jk),
    ]) / area2
    return area2 / 2.0, cots


def edge_cotangent_sums(mesh: TriMesh2D):
    """Sorted edge (i, j) -> (sum of opposite cotangents, incident triangle count)."""
    sums: dict[tuple[int, int], list] = {}
    for t in range(len(mesh.triangles)):
        _, cots = _triangle_geometry(mesh, t)
        i, j, k = mesh.triangles[t]
        for (a, b), c in (((j, k), cots[0]), ((k, i), cots[1]), ((i, j), cots[2])):
            key = (a, b) if a < b else (b, a)
            entry = sums.setdefault(key, [0.0, 0])
            entry[0] += c
            entry[1] += 1
    return {k: (v[0], v[1]) for k, v in sums.items()}


@dataclass
class AssembledOperator:
    """P1 stiffness and lumped mass over the interior vertices of a mesh."""

    stiffness: sp.csr_matrix
    weights: np.ndarray
    nodes: np.ndarray
    ndof: int

    def apply_neg_laplacian(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.ndof,):
            raise ValueError(f"expected vector of length {self.ndof}, got shape {u.shape}")
        return (self.stiffness @ u) / self.weights

    def apply_mass(self, u: np.ndarray) -> np.ndarray:
        return self.weights * np.asarray(u, dtype=float)

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        return self.stiffness @ np.asarray(u, dtype=float)


def p1_assemble(mesh: TriMesh2D) -> AssembledOperator:
    """Cotangent stiffness and one-third-area lumped mass on interior vertices."""
    interior = mesh.interior_indices
    if len(interior) == 0:
        raise MeshError("mesh has no interior vertex")
    nv = len(mesh.vertices)
    renum = -np.ones(nv, dtype=int)
    renum[interior] = np.arange(len(interior))

    full = sp.lil_matrix((nv, nv))
    lumped = np.zeros(nv)
    for t in range(len(mesh.triangles)):
        area, cots = _triangle_geometry(mesh, t)
        i, j, k = mesh.triangles[t]
        for (a, b), c in (((j, k), cots[0]), ((k, i), cots[1]), ((i, j), cots[2])):
            half = c / 2.0
            full[a, b] -= half
            full[b, a] -= half
            full[a, a] += half
            full[b, b] += half
        lumped[[i, j, k]] += area / 3.0

    S = full.tocsr()[interior][:, interior]
    return AssembledOperator(
        stiffness=S.tocsr(),
        weights=lumped[interior],
        nodes=mesh.vertices[interior],
        ndof=len(interior),
    )


@dataclass(frozen=True)
class MonotonicityReport:
    ok: bool
    worst_edge: tuple[int, int]
    worst_value: float


def mesh_monotonicity_check(mesh: TriMesh2D, tol_geom: float = 1e-12) -> MonotonicityReport:
    """Check cot theta1 + cot theta2 >= -tol on every interior edge.

    Equivalent to the Delaunay lens condition theta1 + theta2 <= pi.  Edges
    with a single incident triangle only touch eliminated boundary rows, so
    they are excluded.
    """
    interior = {e: v for e, (v, count) in edge_cotangent_sums(mesh).items()
                if count == 2}
    if not interior:
        return MonotonicityReport(ok=True, worst_edge=(-1, -1), worst_value=np.inf)
    worst_edge, worst = min(interior.items(), key=lambda kv: kv[1])
    return MonotonicityReport(ok=worst >= -tol_geom, worst_edge=worst_edge, worst_value=worst)


def structured_right_triangle_mesh(cells: int, lo: float = 0.0, hi: float = 1.0) -> TriMesh2D:
    """Uniform grid of squares on [lo, hi]^2, each split along one diagonal."""
    n = cells + 1
    xs = np.linspace(lo, hi, n)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    verts = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=1)
    vid = np.arange(n * n).reshape(n, n)
    tris = []
    for i in range(cells):
        for j in range(cells):
            a, b, c, d = vid[i, j], vid[i + 1, j], vid[i + 1, j + 1], vid[i, j + 1]
            tris.append((a, b, c))
            tris.append((a, c, d))
    boundary = np.zeros(n * n, dtype=bool)
    boundary[vid[0, :]] = boundary[vid[-1, :]] = True
    boundary[vid[:, 0]] = boundary[vid[:, -1]] = True
    return TriMesh2D(verts, np.array(tris), boundary)

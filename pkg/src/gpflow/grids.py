"""1D operator construction and tensor-product discretizations on [-L, L]^d.

Three schemes share one interface:

* FD2      -- classical second-order centered differences, trapezoid weights.
* SEM(k)   -- Q^k spectral elements collocated at Gauss-Lobatto nodes with
              Gauss-Lobatto (lumped) mass; SEM(1) coincides with FD2.
* COMPACT4 -- fourth-order Pade compact Laplacian T^{-1} K with the FD2
              energy (trapezoid weights); only the Laplacian changes.

The d-dimensional Laplacian is never materialized: it acts as a Kronecker
sum of 1D operators via per-axis contractions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre


class Scheme(enum.Enum):
    FD2 = "fd2"
    COMPACT4 = "compact4"
    SEM = "sem"


@dataclass(frozen=True)
class GridSpec:
    """Mesh of uniform cells on [-L, L]^d with one of the supported schemes."""

    half_width: float
    dim: int
    cells_per_dim: int
    scheme: Scheme = Scheme.FD2
    degree: int = 1  # polynomial degree, SEM only

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.cells_per_dim < 1:
            raise ValueError(f"cells_per_dim must be >= 1, got {self.cells_per_dim}")
        if self.scheme is Scheme.SEM and self.degree < 1:
            raise ValueError(f"SEM degree must be >= 1, got {self.degree}")
        if self.interior_per_dim < 1:
            raise ValueError("grid has no interior unknowns")

    @property
    def interior_per_dim(self) -> int:
        if self.scheme is Scheme.SEM:
            return self.cells_per_dim * self.degree - 1
        return self.cells_per_dim - 1

    @property
    def cell_size(self) -> float:
        return 2.0 * self.half_width / self.cells_per_dim

    @property
    def ndof(self) -> int:
        return self.interior_per_dim ** self.dim


def gauss_lobatto_rule(k: int) -> tuple[np.ndarray, np.ndarray]:
    """(k+1)-point Gauss-Lobatto rule on [-1, 1], exact for degree <= 2k-1.

    Interior nodes are the roots of P_k'; weights are 2 / (k (k+1) P_k(x)^2).
    """
    if k < 1:
        raise ValueError(f"Gauss-Lobatto rule needs degree k >= 1, got {k}")
    if k == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    pk = legendre.Legendre.basis(k)
    interior = np.sort(pk.deriv().roots().real)
    nodes = np.concatenate(([-1.0], interior, [1.0]))
    weights = 2.0 / (k * (k + 1) * pk(nodes) ** 2)
    return nodes, weights


def lagrange_diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """D[q, i] = l_i'(x_q) for the Lagrange basis on the given nodes."""
    n = len(nodes)
    # barycentric weights
    b = np.ones(n)
    for i in range(n):
        b[i] = 1.0 / np.prod(nodes[i] - np.delete(nodes, i))
    D = np.zeros((n, n))
    for q in range(n):
        for i in range(n):
            if i != q:
                D[q, i] = (b[i] / b[q]) / (nodes[q] - nodes[i])
    # rows of D sum to zero (derivative of the constant)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


@dataclass
class Operator1D:
    """Interior-node 1D operator bundle for one axis.

    S is the stiffness matrix (symmetric PSD), weights the diagonal of the
    lumped mass matrix.  mass_aux is the tridiagonal Pade matrix T for
    COMPACT4 (the Laplacian is T^{-1} M^{-1} S there) and None otherwise.
    """

    nodes: np.ndarray
    weights: np.ndarray
    stiffness: np.ndarray
    scheme: Scheme
    mass_aux: np.ndarray | None = None
    _lap: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def laplacian_matrix(self) -> np.ndarray:
        """Dense -Delta_h = M^{-1} S (or T^{-1} M^{-1} S for COMPACT4)."""
        if self._lap is None:
            lap = self.stiffness / self.weights[:, None]
            if self.mass_aux is not None:
                lap = np.linalg.solve(self.mass_aux, lap)
            self._lap = lap
        return self._lap


def build_1d(spec: GridSpec) -> Operator1D:
    """Assemble the 1D interior operators for the spec's scheme."""
    L = spec.half_width
    h = spec.cell_size
    if spec.scheme is Scheme.FD2 or spec.scheme is Scheme.COMPACT4:
        n = spec.cells_per_dim - 1
        nodes = -L + h * np.arange(1, n + 1)
        weights = np.full(n, h)
        S = (np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1)
             + np.diag(np.full(n - 1, -1.0), -1)) / h
        if spec.scheme is Scheme.COMPACT4:
            T = (np.diag(np.full(n, 10.0 / 12.0))
                 + np.diag(np.full(n - 1, 1.0 / 12.0), 1)
                 + np.diag(np.full(n - 1, 1.0 / 12.0), -1))
            return Operator1D(nodes, weights, S, spec.scheme, mass_aux=T)
        return Operator1D(nodes, weights, S, spec.scheme)

    k = spec.degree
    ref_nodes, ref_w = gauss_lobatto_rule(k)
    D = lagrange_diff_matrix(ref_nodes)
    # local stiffness: exact since grad products have degree 2k-2 <= 2k-1
    Sloc = (2.0 / h) * D.T @ (ref_w[:, None] * D)
    wloc = (h / 2.0) * ref_w

    n_total = spec.cells_per_dim * k + 1
    nodes_g = np.empty(n_total)
    weights_g = np.zeros(n_total)
    S_g = np.zeros((n_total, n_total))
    for c in range(spec.cells_per_dim):
        left = -L + c * h
        idx = slice(c * k, c * k + k + 1)
        nodes_g[idx] = left + (ref_nodes + 1.0) * h / 2.0
        weights_g[idx.start:idx.stop] += wloc
        S_g[idx, idx] += Sloc
    # eliminate Dirichlet boundary nodes
    keep = slice(1, n_total - 1)
    return Operator1D(nodes_g[keep], weights_g[keep],
                      np.ascontiguousarray(S_g[keep, keep]), spec.scheme)


class TensorOperator:
    """Kronecker-sum action of -Delta_h, S and M on [-L, L]^d grid vectors.

    Vectors are flattened C-order over the (n, ..., n) interior grid.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        op = build_1d(spec)
        self.ops = [op] * spec.dim
        self.dim = spec.dim
        self.n = op.n
        self.shape = (op.n,) * spec.dim
        self.ndof = op.n ** spec.dim
        w = op.weights
        tensor_w = w
        for _ in range(spec.dim - 1):
            tensor_w = np.multiply.outer(tensor_w, w)
        self.weights = tensor_w.reshape(-1)
        self._lap1d = op.laplacian_matrix()

    def _check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.ndof,):
            raise ValueError(f"expected vector of length {self.ndof}, got shape {u.shape}")
        return u

    def _axis_sum(self, mat: np.ndarray, u: np.ndarray) -> np.ndarray:
        U = self._check(u).reshape(self.shape)
        out = np.zeros_like(U)
        for axis in range(self.dim):
            out += np.moveaxis(np.tensordot(mat, U, axes=([1], [axis])), 0, axis)
        return out.reshape(-1)

    def apply_neg_laplacian(self, u: np.ndarray) -> np.ndarray:
        return self._axis_sum(self._lap1d, u)

    def apply_mass(self, u: np.ndarray) -> np.ndarray:
        return self.weights * self._check(u)

    def apply_stiffness(self, u: np.ndarray) -> np.ndarray:
        # S_d = M_d (-Delta_h) since the mass is diagonal on every axis
        return self.weights * self.apply_neg_laplacian(u)

    def node_coordinates(self) -> np.ndarray:
        """(ndof, dim) array of interior node coordinates, C-order."""
        axes = [op.nodes for op in self.ops]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

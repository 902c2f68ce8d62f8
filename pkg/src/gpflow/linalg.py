"""Fast shifted-Laplacian solves, PCG, and lowest generalized eigenpairs.

The shifted solve (-Delta_h + alpha I)^{-1} is done by per-axis
diagonalization of the 1D pencil S z = mu M z: forward transform, division
by the Kronecker-sum eigenvalues plus alpha, back transform.  Cost is
O(d n^{d+1}) per solve and no d-dimensional matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grids import Operator1D, TensorOperator


class SolverError(RuntimeError):
    pass


@dataclass
class Eigen1D:
    """M-orthonormal eigendecomposition of the 1D pencil S z = mu M z."""

    values: np.ndarray   # ascending
    vectors: np.ndarray  # columns z_i, Z^T M Z = I


def generalized_sym_eig(op: Operator1D) -> Eigen1D:
    S = op.stiffness
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * np.abs(S).max()):
        raise SolverError("stiffness matrix is not symmetric")
    if np.any(op.weights <= 0):
        raise SolverError("mass weights must be strictly positive")
    if op.mass_aux is not None:
        # COMPACT4: diagonalize T^{-1} M^{-1} S through the pencil (M^{-1}S, T);
        # T and M^{-1}S commute, so eigenvectors are M-orthogonal.
        K = S / op.weights[:, None]
        mu, Z = scipy.linalg.eigh(K, op.mass_aux)
        norms = np.sqrt(np.einsum("ij,i,ij->j", Z, op.weights, Z))
        Z = Z / norms
    else:
        d = np.sqrt(op.weights)
        A = S / d[:, None] / d[None, :]
        A = 0.5 * (A + A.T)
        mu, Y = np.linalg.eigh(A)
        Z = Y / d[:, None]
    mu = np.maximum(mu, 0.0)  # clip -1e-16 round-off on the smallest modes
    return Eigen1D(values=mu, vectors=Z)


class FastSolver:
    """Direct tensor-product solver for (-Delta_h + alpha I) x = b."""

    def __init__(self, op: TensorOperator, alpha: float):
        if alpha < 0:
            raise ValueError(f"shift alpha must be >= 0, got {alpha}")
        self.op = op
        self.alpha = alpha
        self.eigen = [generalized_sym_eig(o) for o in op.ops]
        # forward transform per axis: c = Z^T M u
        self._fwd = [e.vectors.T * o.weights[None, :]
                     for e, o in zip(self.eigen, op.ops)]
        self._bwd = [e.vectors for e in self.eigen]
        lam = self.eigen[0].values
        total = lam
        for e in self.eigen[1:]:
            total = total[..., None] + e.values
        self._denominator = total + alpha
        if np.any(self._denominator <= 0):
            raise SolverError("shifted operator is singular")

    def solve(self, b: np.ndarray) -> np.ndarray:
        X = np.asarray(b, dtype=float)
        if X.shape != (self.op.ndof,):
            raise ValueError(f"expected vector of length {self.op.ndof}, got shape {X.shape}")
        X = X.reshape(self.op.shape)
        for axis, F in enumerate(self._fwd):
            X = np.moveaxis(np.tensordot(F, X, axes=([1], [axis])), 0, axis)
        X = X / self._denominator
        for axis, B in enumerate(self._bwd):
            X = np.moveaxis(np.tensordot(B, X, axes=([1], [axis])), 0, axis)
        return X.reshape(-1)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.op.apply_neg_laplacian(u) + self.alpha * np.asarray(u, dtype=float)


def solve_shifted(solver: FastSolver, b: np.ndarray) -> np.ndarray:
    return solver.solve(b)


class PCGBreakdown(SolverError):
    def __init__(self, iteration: int, curvature: float):
        super().__init__(f"pcg breakdown at iteration {iteration}: curvature {curvature}")
        self.iteration = iteration


def pcg(apply_A, apply_P, b, weights, tol=1e-10, maxiter=500, x0=None):
    """Preconditioned CG in the weighted inner product <u, v> = u^T diag(w) v.

    apply_A must be symmetric positive definite in that inner product and
    apply_P a SPD preconditioner (an approximate inverse of A).  Returns
    (x, iterations, converged).
    """
    b = np.asarray(b, dtype=float)

    def inner(u, v):
        return float(np.dot(u * weights, v))

    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - apply_A(x) if x0 is not None else b.copy()
    bnorm = np.sqrt(inner(b, b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, True
    z = apply_P(r)
    p = z.copy()
    rz = inner(r, z)
    for it in range(1, maxiter + 1):
        Ap = apply_A(p)
        pAp = inner(p, Ap)
        if pAp <= 0:
            raise PCGBreakdown(it, pAp)
        gamma = rz / pAp
        x += gamma * p
        r -= gamma * Ap
        if np.sqrt(inner(r, r)) <= tol * bnorm:
            return x, it, True
        z = apply_P(r)
        rz_new = inner(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, False


@dataclass
class EigenResult:
    """Two lowest eigenpairs of an <.,.>_h-symmetric operator A v = lambda v."""

    lambda0: float
    lambda1: float
    v0: np.ndarray
    v1: np.ndarray

    @property
    def gap(self) -> float:
        return self.lambda1 - self.lambda0


def _h_normalize(v, weights):
    nrm = np.sqrt(float(np.dot(v * weights, v)))
    if nrm == 0:
        raise SolverError("zero vector in eigen iteration")
    return v / nrm


def lowest_two_eigenpairs(apply_A, weights, tol=1e-9, maxiter=500,
                          solve_inner=None, rng=None) -> EigenResult:
    """Deflated inverse iteration for the two smallest eigenvalues.

    apply_A acts on coefficient vectors and is symmetric w.r.t. the weighted
    inner product.  Inner solves A x = v use pcg; solve_inner, when given, is
    used as the preconditioner (typically a FastSolver.solve for a shifted
    Laplacian close to A).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n = len(weights)
    precond = solve_inner if solve_inner is not None else (lambda r: r)

    def inner(u, v):
        return float(np.dot(u * weights, v))

    def solve_A(b, x0):
        x, _, ok = pcg(apply_A, precond, b, weights, tol=1e-12, maxiter=2000, x0=x0)
        if not ok:
            raise SolverError("inner pcg did not converge in eigen iteration")
        return x

    pairs = []
    deflate: list[np.ndarray] = []
    for which in range(2):
        v = _h_normalize(rng.standard_normal(n), weights)
        for d in deflate:
            v -= inner(v, d) * d
        v = _h_normalize(v, weights)
        lam = inner(v, apply_A(v))
        x_prev = None
        for it in range(maxiter):
            x = solve_A(v, x_prev)
            for d in deflate:
                x -= inner(x, d) * d
            v = _h_normalize(x, weights)
            x_prev = x
            Av = apply_A(v)
            lam = inner(v, Av)
            resid = Av - lam * v
            if np.sqrt(inner(resid, resid)) <= tol * abs(lam):
                break
        else:
            raise SolverError(f"eigenpair {which} did not converge in {maxiter} iterations")
        # sign: nonnegative weighted mean
        if float(np.dot(weights, v)) < 0:
            v = -v
        pairs.append((lam, v))
        deflate.append(v)

    (l0, v0), (l1, v1) = sorted(pairs, key=lambda p: p[0])
    return EigenResult(lambda0=l0, lambda1=l1, v0=v0, v1=v1)

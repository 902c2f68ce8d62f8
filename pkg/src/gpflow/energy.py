"""Discrete GP energy, inner products, gradients, retraction and residuals.

Everything here is a pure function of (coefficients, discretization,
problem).  The discretization handle only needs `weights`,
`apply_neg_laplacian` and `apply_mass`, so tensor grids and P1 meshes are
interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import FastSolver

NORMALIZATION_TOL = 1e-10


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    """Potential values at nodes, interaction strength, and metric shift."""

    potential: np.ndarray
    beta: float
    alpha: float = 0.15

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if np.any(self.potential < 0):
            raise ValueError("potential must be nonnegative at every node")


@dataclass
class State:
    """Coefficient vector on interior nodes with its discretization handle."""

    coeffs: np.ndarray
    disc: object
    _h_norm_sq: float = field(default=None, repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("state coefficients must be finite")
        if self._h_norm_sq is None:
            self._h_norm_sq = float(np.dot(self.coeffs * self.disc.weights, self.coeffs))

    @property
    def h_norm_sq(self) -> float:
        return self._h_norm_sq

    @property
    def is_normalized(self) -> bool:
        return abs(self.h_norm_sq - 1.0) <= NORMALIZATION_TOL

    def require_normalized(self):
        if not self.is_normalized:
            raise NormalizationError(
                f"state is not h-normalized: <u,u>_h = {self.h_norm_sq!r}")


def inner_h(disc, u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u * disc.weights, v))


def inner_X(disc, alpha: float, u: np.ndarray, v: np.ndarray) -> float:
    """Modified-H1 inner product u^T (S + alpha M) v."""
    return inner_h(disc, u, disc.apply_neg_laplacian(v)) + alpha * inner_h(disc, u, v)


def norm_h(disc, u: np.ndarray) -> float:
    return np.sqrt(max(inner_h(disc, u, u), 0.0))


def norm_X(disc, alpha: float, u: np.ndarray) -> float:
    return np.sqrt(max(inner_X(disc, alpha, u, u), 0.0))


def energy(state: State, problem: Problem) -> float:
    """E_h(u) = 1/2 u'Su + 1/2 u'MVu + beta/4 (u^2)'M u^2."""
    u = state.coeffs
    disc = state.disc
    kinetic = 0.5 * inner_h(disc, u, disc.apply_neg_laplacian(u))
    potential = 0.5 * float(np.dot(disc.weights * problem.potential, u * u))
    quartic = 0.25 * problem.beta * float(np.dot(disc.weights, u ** 4))
    return kinetic + potential + quartic


def apply_Au(state: State, problem: Problem, w: np.ndarray) -> np.ndarray:
    """Linearized operator (-Delta_h + V + beta diag(u^2)) w."""
    w = np.asarray(w, dtype=float)
    if w.shape != state.coeffs.shape:
        raise ValueError(f"length mismatch: {w.shape} vs {state.coeffs.shape}")
    return (state.disc.apply_neg_laplacian(w)
            + (problem.potential + problem.beta * state.coeffs ** 2) * w)


def euclidean_gradient(state: State, problem: Problem) -> np.ndarray:
    """A_u u, the Frechet gradient of E_h in the <.,.>_h geometry."""
    return apply_Au(state, problem, state.coeffs)


def sobolev_gradient(state: State, problem: Problem, solver: FastSolver) -> np.ndarray:
    """(-Delta_h + alpha I)^{-1} A_u u."""
    return solver.solve(euclidean_gradient(state, problem))


def riemannian_gradient(state: State, problem: Problem, solver: FastSolver,
                        return_rayleigh: bool = False):
    """Sobolev gradient projected onto the tangent space of the h-unit sphere.

    Returns the tangent gradient g with <u, g>_h = 0; optionally also the
    generalized Rayleigh quotient used in the projection (the eigenvalue
    estimate gamma at convergence).
    """
    state.require_normalized()
    u = state.coeffs
    disc = state.disc
    grad = sobolev_gradient(state, problem, solver)
    Gu = solver.solve(u)
    gamma = inner_h(disc, u, grad) / inner_h(disc, u, Gu)
    g = grad - gamma * Gu
    if return_rayleigh:
        return g, gamma
    return g


def retract(disc, u: np.ndarray) -> np.ndarray:
    """R_h(u) = u / sqrt(<u, u>_h)."""
    nrm = norm_h(disc, u)
    if nrm == 0:
        raise NormalizationError("cannot retract the zero vector")
    return u / nrm


def residual(state: State, problem: Problem, weighted: bool = False) -> float:
    """Relative residue || u/|u| - F(u)/|F(u)| || with F = -Delta_h u + Vu + beta u^3.

    F is evaluated at the h-normalized state (the manifold the flow lives
    on; the cubic term is not scale invariant), and the misalignment of the
    two unit directions is measured in the plain Euclidean coefficient norm
    by default; weighted=True swaps in the h-norm.  Exact eigenpairs give 0
    and rescaling u changes nothing.
    """
    u = state.coeffs
    disc = state.disc
    hn = norm_h(disc, u)
    if hn == 0:
        raise NormalizationError("residual of the zero vector is undefined")
    v = u / hn
    F = (disc.apply_neg_laplacian(v) + problem.potential * v
         + problem.beta * v ** 3)
    if weighted:
        nrm = lambda w: norm_h(disc, w)
    else:
        nrm = lambda w: float(np.linalg.norm(w))
    Fn = nrm(F)
    if Fn == 0:
        return 1.0
    return nrm(v / nrm(v) - F / Fn)


def eigenvalue_estimate(state: State, problem: Problem) -> float:
    """Rayleigh value <u, A_u u>_h for an h-normalized state."""
    state.require_normalized()
    return inner_h(state.disc, state.coeffs, euclidean_gradient(state, problem))


def eigenvalue_from_energy(state: State, problem: Problem) -> float:
    """Check value 2 E_h(u) + (beta/2) <u^2, u^2>_h; equals the Rayleigh value
    for any h-normalized u."""
    state.require_normalized()
    u2 = state.coeffs ** 2
    return 2.0 * energy(state, problem) + 0.5 * problem.beta * inner_h(state.disc, u2, u2)

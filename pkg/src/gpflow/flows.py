"""Gradient-flow drivers: step maps, step-size policies, stopping, reporting."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .energy import (Problem, State, apply_Au, energy, euclidean_gradient,
                     eigenvalue_estimate, inner_h, residual, retract,
                     riemannian_gradient)
from .grids import TensorOperator
from .linalg import FastSolver, SolverError, pcg


class FlowKind(enum.Enum):
    MODIFIED_H1 = "modified_h1"
    H1_SEMINORM = "h1_seminorm"   # modified H1 with alpha = 0
    L2 = "l2"
    A0 = "a0"
    AU = "au"
    BFSP = "bfsp"


@dataclass(frozen=True)
class FixedStep:
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"fixed step size must be positive, got {self.tau}")


@dataclass(frozen=True)
class LineSearchStep:
    lo: float = 1e-3
    hi: float = 4.0
    tol: float = 1e-4
    max_evals: int = 100

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class FlowConfig:
    kind: FlowKind = FlowKind.MODIFIED_H1
    alpha: float = 0.15
    step: FixedStep | LineSearchStep = FixedStep(1.0)
    dt: float = 0.1  # BFSP only

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.kind is FlowKind.BFSP and self.dt <= 0:
            raise ValueError(f"BFSP time step must be positive, got {self.dt}")

    @property
    def effective_alpha(self) -> float:
        return 0.0 if self.kind is FlowKind.H1_SEMINORM else self.alpha


@dataclass(frozen=True)
class StopRule:
    residual_tol: float = 1e-12
    stall_window: int = 10
    max_iter: int = 500
    stall_rtol: float = 1e-14

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.stall_window < 2:
            raise ValueError(f"stall_window must be >= 2, got {self.stall_window}")


@dataclass
class IterationRecord:
    index: int
    energy: float
    residual: float
    eigenvalue: float
    step_size: float


@dataclass
class RunReport:
    records: list[IterationRecord]
    final_state: State
    reason: str  # "tol" | "stall" | "max_iter" | "step_failure"
    wall_seconds: float

    @property
    def iterations(self) -> int:
        return self.records[-1].index

    @property
    def converged(self) -> bool:
        return self.reason in ("tol", "stall")

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])


def step_modified_h1(state: State, problem: Problem, tau: float,
                     solver: FastSolver) -> State:
    """u <- R_h(u - tau * Riemannian gradient) under the modified H1 metric."""
    g = riemannian_gradient(state, problem, solver)
    return State(retract(state.disc, state.coeffs - tau * g), state.disc)


def step_bfsp(state: State, problem: Problem, dt: float, alpha: float,
              solver: FastSolver | None = None) -> State:
    """Backward-forward Euler with stabilization shift, then renormalize."""
    state.require_normalized()
    disc = state.disc
    if solver is None:
        solver = FastSolver(disc, alpha + 1.0 / dt)
    u = state.coeffs
    rhs = (alpha + 1.0 / dt - problem.potential - problem.beta * u ** 2) * u
    return State(retract(disc, solver.solve(rhs)), disc)


def _metric_gradient(state: State, problem: Problem, metric: FlowKind,
                     precond: FastSolver) -> np.ndarray:
    """Riemannian gradient for the L2 / A0 / AU metrics (G_X = I, (-Delta+V)^{-1},
    A_u^{-1}); G_X applications by PCG with the Laplacian preconditioner."""
    state.require_normalized()
    u = state.coeffs
    disc = state.disc
    eg = euclidean_gradient(state, problem)

    if metric is FlowKind.L2:
        apply_G = lambda w: w
    elif metric is FlowKind.A0:
        def apply_op(w):
            return disc.apply_neg_laplacian(w) + problem.potential * w
        def apply_G(w):
            x, _, ok = pcg(apply_op, precond.solve, w, disc.weights,
                           tol=1e-12, maxiter=1000)
            if not ok:
                raise SolverError("A0 metric solve did not converge")
            return x
    elif metric is FlowKind.AU:
        def apply_G(w):
            x, _, ok = pcg(lambda z: apply_Au(state, problem, z), precond.solve,
                           w, disc.weights, tol=1e-12, maxiter=1000)
            if not ok:
                raise SolverError("AU metric solve did not converge")
            return x
    else:
        raise ValueError(f"not a plain-metric flow: {metric}")

    grad = apply_G(eg)
    Gu = apply_G(u)
    gamma = inner_h(disc, u, grad) / inner_h(disc, u, Gu)
    return grad - gamma * Gu


def step_metric(state: State, problem: Problem, tau: float, metric: FlowKind,
                precond: FastSolver) -> State:
    g = _metric_gradient(state, problem, metric, precond)
    return State(retract(state.disc, state.coeffs - tau * g), state.disc)


def line_search_step(state: State, problem: Problem, g: np.ndarray,
                     policy: LineSearchStep) -> float:
    """Step size minimizing tau -> E_h(R_h(u - tau g)) over [lo, hi]."""
    disc = state.disc
    gnorm = np.sqrt(max(inner_h(disc, g, g), 0.0))
    if gnorm == 0:
        return policy.lo

    def phi(tau):
        val = energy(State(retract(disc, state.coeffs - tau * g), disc), problem)
        if not np.isfinite(val):
            raise SolverError(f"non-finite energy in line search at tau={tau}")
        return val

    res = minimize_scalar(phi, bounds=(policy.lo, policy.hi), method="bounded",
                          options={"xatol": policy.tol, "maxiter": policy.max_evals})
    return float(res.x)


def default_initial_state(disc, kind: str = "constant",
                          problem: Problem | None = None) -> State:
    """'constant': normalized all-ones; 'linear': beta=0 ground state."""
    if kind == "constant":
        return State(retract(disc, np.ones(disc.ndof)), disc)
    if kind == "linear":
        if problem is None:
            raise ValueError("linear initial guess needs the problem")
        from .linalg import lowest_two_eigenpairs
        pre = FastSolver(disc, max(float(np.min(problem.potential)), problem.alpha))
        res = lowest_two_eigenpairs(
            lambda w: disc.apply_neg_laplacian(w) + problem.potential * w,
            disc.weights, tol=1e-10, solve_inner=pre.solve)
        return State(retract(disc, res.v0), disc)
    raise ValueError(f"unknown initial guess kind: {kind}")


def run(flow: FlowConfig, problem: Problem, u0: State, stop: StopRule) -> RunReport:
    """Iterate the chosen flow until tolerance, stall, or max_iter."""
    disc = u0.disc
    if not isinstance(disc, TensorOperator):
        raise ValueError("flows need a tensor-product discretization (FastSolver)")
    t0 = time.perf_counter()

    alpha = flow.effective_alpha
    if flow.kind is FlowKind.BFSP:
        solver = FastSolver(disc, alpha + 1.0 / flow.dt)
    else:
        solver = FastSolver(disc, alpha)
    precond = None
    if flow.kind in (FlowKind.L2, FlowKind.A0, FlowKind.AU):
        precond = FastSolver(disc, 0.0)

    state = u0
    records = [IterationRecord(0, energy(state, problem),
                               residual(state, problem),
                               eigenvalue_estimate(state, problem), 0.0)]
    best = records[0].residual
    best_iter = 0
    reason = "max_iter"
    for it in range(1, stop.max_iter + 1):
        try:
            if flow.kind in (FlowKind.MODIFIED_H1, FlowKind.H1_SEMINORM):
                g = riemannian_gradient(state, problem, solver)
                if isinstance(flow.step, LineSearchStep):
                    tau = line_search_step(state, problem, g, flow.step)
                else:
                    tau = flow.step.tau
                state = State(retract(disc, state.coeffs - tau * g), disc)
            elif flow.kind is FlowKind.BFSP:
                tau = flow.dt
                state = step_bfsp(state, problem, flow.dt, alpha, solver)
            else:
                g = _metric_gradient(state, problem, flow.kind, precond)
                if isinstance(flow.step, LineSearchStep):
                    tau = line_search_step(state, problem, g, flow.step)
                else:
                    tau = flow.step.tau
                state = State(retract(disc, state.coeffs - tau * g), disc)
        except SolverError:
            reason = "step_failure"
            break
        rec = IterationRecord(it, energy(state, problem),
                              residual(state, problem),
                              eigenvalue_estimate(state, problem), tau)
        records.append(rec)
        if rec.residual <= stop.residual_tol:
            reason = "tol"
            break
        if rec.residual < best * (1.0 - stop.stall_rtol):
            best = rec.residual
            best_iter = it
        elif it - best_iter >= stop.stall_window:
            reason = "stall"
            break
    return RunReport(records, state, reason, time.perf_counter() - t0)

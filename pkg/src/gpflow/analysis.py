"""Manufactured solutions, convergence studies, and structural checks.

The manufactured case uses the potential V = beta (1 - u*^2) with
u*(x) = prod_i sin(pi (x_i + 1) / 2) on [-1, 1]^d, for which

    lambda* = d pi^2 / 4 + beta,
    E*      = lambda*/2 - (beta/4) (3/4)^d,
    rho*    = (3/4)^d.

On FD2 grids the nodal restriction of u* is an exact discrete eigenvector,
so discrete eigenvalue/energy errors have the closed forms d (mu1 - pi^2/4)
and d (mu1 - pi^2/4) / 2 with mu1 = (4/h^2) sin^2(pi h / 4), independent of
beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .energy import Problem, State, apply_Au, energy, eigenvalue_estimate, retract
from .flows import FixedStep, FlowConfig, FlowKind, RunReport, StopRule, run
from .grids import GridSpec, Scheme, TensorOperator
from .linalg import EigenResult, FastSolver, lowest_two_eigenpairs


@dataclass(frozen=True)
class ExactCase:
    beta: float
    dim: int
    potential: np.ndarray     # node values of beta (1 - u*^2)
    u_star: np.ndarray        # node values of the amplitude-1 ground state
    lambda_star: float
    energy_star: float
    rho_star: float


def _node_coordinates(disc) -> np.ndarray:
    if hasattr(disc, "node_coordinates"):
        return disc.node_coordinates()
    return np.asarray(disc.nodes)


def exact_case(disc, beta: float) -> ExactCase:
    """Manufactured ground state on [-1, 1]^d evaluated at the disc's nodes."""
    if hasattr(disc, "spec") and disc.spec.half_width != 1.0:
        raise ValueError("the manufactured case lives on [-1, 1]^d (half_width 1)")
    coords = _node_coordinates(disc)
    d = coords.shape[1]
    u = np.prod(np.sin(np.pi * (coords + 1.0) / 2.0), axis=1)
    lam = d * np.pi ** 2 / 4.0 + beta
    return ExactCase(
        beta=beta,
        dim=d,
        potential=beta * (1.0 - u ** 2),
        u_star=u,
        lambda_star=lam,
        energy_star=lam / 2.0 - (beta / 4.0) * (3.0 / 4.0) ** d,
        rho_star=(3.0 / 4.0) ** d,
    )


@dataclass
class ConvergenceRow:
    label: str
    h: float
    lambda_err: float
    energy_err: float
    sup_err: float
    iterations: int
    converged: bool
    lambda_order: float = np.nan
    energy_order: float = np.nan
    sup_order: float = np.nan


def _order(coarse: float, fine: float) -> float:
    if coarse <= 0 or fine <= 0:
        return np.nan
    return np.log2(coarse / fine)


def solve_exact_case(spec: GridSpec, beta: float, alpha: float = 0.2,
                     tau: float = 1.0, stop: StopRule | None = None,
                     initial: str = "constant"):
    """Run the modified-H1 flow on the manufactured case; returns (report, case)."""
    from .flows import default_initial_state
    disc = TensorOperator(spec)
    case = exact_case(disc, beta)
    problem = Problem(case.potential, beta, alpha)
    u0 = default_initial_state(disc, initial, problem)
    if stop is None:
        stop = StopRule(residual_tol=1e-12, stall_window=10, max_iter=200)
    flow = FlowConfig(kind=FlowKind.MODIFIED_H1, alpha=alpha, step=FixedStep(tau))
    return run(flow, problem, u0, stop), case


def convergence_study(schemes, levels, d: int, beta: float,
                      alpha: float = 0.2, tau: float = 1.0,
                      initial: str = "constant") -> dict[str, list[ConvergenceRow]]:
    """Errors and observed orders of the manufactured case per scheme and level.

    `levels` holds cells_per_dim values; successive levels are assumed to
    double the resolution when orders are formed.
    """
    if len(levels) < 2:
        raise ValueError("need at least two refinement levels")
    table: dict[str, list[ConvergenceRow]] = {}
    for scheme, degree in schemes:
        rows = []
        for cells in levels:
            spec = GridSpec(1.0, d, cells, scheme, degree)
            report, case = solve_exact_case(spec, beta, alpha, tau, initial=initial)
            state = report.final_state
            lam = eigenvalue_estimate(state, Problem(case.potential, beta, alpha))
            en = energy(state, Problem(case.potential, beta, alpha))
            u = state.coeffs
            if float(np.dot(state.disc.weights, u)) < 0:
                u = -u
            sup = float(np.max(np.abs(u - case.u_star)))
            n = spec.interior_per_dim
            rows.append(ConvergenceRow(
                label=f"{n}^{d}", h=spec.cell_size,
                lambda_err=abs(lam - case.lambda_star),
                energy_err=abs(en - case.energy_star),
                sup_err=sup,
                iterations=report.iterations,
                converged=report.converged,
            ))
        for prev, cur in zip(rows, rows[1:]):
            cur.lambda_order = _order(prev.lambda_err, cur.lambda_err)
            cur.energy_order = _order(prev.energy_err, cur.energy_err)
            cur.sup_order = _order(prev.sup_err, cur.sup_err)
        name = scheme.value if scheme is not Scheme.SEM else f"sem{degree}"
        table[name] = rows
    return table


@dataclass(frozen=True)
class MMatrixReport:
    passes_sufficient: bool
    witness: str


def m_matrix_check(A) -> MMatrixReport:
    """Sufficient M-matrix test: positive diagonal, nonpositive off-diagonal,
    nonnegative row sums with at least one positive row sum."""
    A = sp.csr_matrix(A)
    n = A.shape[0]
    diag = A.diagonal()
    if np.any(diag <= 0):
        i = int(np.argmin(diag))
        return MMatrixReport(False, f"nonpositive diagonal at row {i}: {diag[i]}")
    off = A - sp.diags(diag)
    off_max = off.max() if off.nnz else 0.0
    if off_max > 1e-13 * np.max(diag):
        return MMatrixReport(False, f"positive off-diagonal entry {off_max}")
    rowsums = np.asarray(A.sum(axis=1)).ravel()
    tol = 1e-10 * np.max(np.abs(diag))
    if np.any(rowsums < -tol):
        i = int(np.argmin(rowsums))
        return MMatrixReport(False, f"negative row sum at row {i}: {rowsums[i]}")
    if not np.any(rowsums > tol):
        return MMatrixReport(False, "no strictly positive row sum")
    return MMatrixReport(True, "")


def monotonicity_oracle(A: np.ndarray, tol: float = 1e-12) -> bool:
    """Explicit-inverse check that A^{-1} >= 0 entrywise (small dense only)."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] > 200:
        raise ValueError("monotonicity oracle is restricted to n <= 200")
    inv = np.linalg.inv(A)
    return bool(np.min(inv) >= -tol * np.max(np.abs(inv)))


def dense_neg_laplacian(disc) -> np.ndarray:
    """Densely assembled -Delta_h via unit-vector applies (oracle use only)."""
    n = disc.ndof
    A = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        A[:, j] = disc.apply_neg_laplacian(e)
        e[j] = 0.0
    return A


def dense_Au(state: State, problem: Problem) -> np.ndarray:
    return (dense_neg_laplacian(state.disc)
            + np.diag(problem.potential + problem.beta * state.coeffs ** 2))


@dataclass(frozen=True)
class PerronReport:
    gap: float
    min_entry: float
    positive_eigenvector: bool
    positive_gap: bool
    eigen: EigenResult


def perron_check(apply_A, disc, tol: float = 1e-9, solve_inner=None) -> PerronReport:
    res = lowest_two_eigenpairs(apply_A, disc.weights, tol=tol, solve_inner=solve_inner)
    min_entry = float(np.min(res.v0))
    return PerronReport(gap=res.gap, min_entry=min_entry,
                        positive_eigenvector=min_entry > 0,
                        positive_gap=res.gap > 0, eigen=res)


@dataclass
class EigengapRow:
    h: float
    lambda0: float
    lambda1: float
    gap: float


def eigengap_study(specs, problem_for, alpha: float = 0.2, tau: float = 1.0,
                   stop: StopRule | None = None) -> list[EigengapRow]:
    """Gap of A_{u*} across refinement levels; u* from a converged flow run."""
    rows = []
    for spec in specs:
        disc = TensorOperator(spec)
        problem = problem_for(disc)
        u0 = State(retract(disc, np.ones(disc.ndof)), disc)
        flow = FlowConfig(kind=FlowKind.MODIFIED_H1, alpha=alpha, step=FixedStep(tau))
        report = run(flow, problem, u0,
                     stop or StopRule(residual_tol=1e-12, stall_window=10, max_iter=400))
        if not report.converged:
            raise RuntimeError(f"ground state did not converge on {spec}")
        star = report.final_state
        shift = float(np.mean(problem.potential + problem.beta * star.coeffs ** 2))
        pre = FastSolver(disc, max(shift, 1e-3))
        res = lowest_two_eigenpairs(lambda w: apply_Au(star, problem, w),
                                    disc.weights, tol=1e-9, solve_inner=pre.solve)
        rows.append(EigengapRow(h=spec.cell_size, lambda0=res.lambda0,
                                lambda1=res.lambda1, gap=res.gap))
    return rows


@dataclass(frozen=True)
class ConvexityReport:
    supported: bool
    hessian_min_eig: float
    hessian_scale: float
    hessian_psd: bool
    abs_value_inequality: bool


def _is_monotone_scheme(disc) -> bool:
    spec = getattr(disc, "spec", None)
    if spec is None:
        return True  # P1 AssembledOperator
    return spec.scheme is Scheme.FD2 or (spec.scheme is Scheme.SEM and spec.degree == 1)


def convexity_check(disc, problem: Problem, samples: int = 20,
                    rng=None, fd_step: float = 1e-5) -> ConvexityReport:
    """(a) finite-difference Hessian of v -> E_h(sqrt(v)) is PSD at random
    positive v; (b) E_h(u) >= E_h(|u|) for random u.  Monotone schemes only."""
    if not _is_monotone_scheme(disc):
        return ConvexityReport(False, np.nan, np.nan, False, False)
    rng = np.random.default_rng(0) if rng is None else rng
    n = disc.ndof

    def E_of_v(v):
        return energy(State(np.sqrt(v), disc), problem)

    min_eig = np.inf
    scale = 0.0
    for _ in range(samples):
        v = rng.uniform(0.2, 1.0, size=n)
        v /= float(np.dot(disc.weights, v))
        H = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                ei = np.zeros(n); ei[i] = fd_step
                ej = np.zeros(n); ej[j] = fd_step
                H[i, j] = H[j, i] = (
                    E_of_v(v + ei + ej) - E_of_v(v + ei - ej)
                    - E_of_v(v - ei + ej) + E_of_v(v - ei - ej)
                ) / (4.0 * fd_step ** 2)
        scale = max(scale, float(np.max(np.abs(H))))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(H)[0]))

    abs_ok = True
    for _ in range(samples):
        u = rng.standard_normal(n)
        if energy(State(u, disc), problem) < energy(State(np.abs(u), disc), problem) - 1e-12:
            abs_ok = False
    return ConvexityReport(True, min_eig, scale,
                           min_eig >= -1e-8 * max(scale, 1.0), abs_ok)


@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float


def rate_fit(report: RunReport, tail_fraction: float = 0.5) -> RateFit:
    """Geometric convergence rate fitted to the tail of the residual trace."""
    res = report.residuals
    res = res[res > 0]
    tail = res[int(len(res) * (1.0 - tail_fraction)):]
    if len(tail) < 10:
        raise ValueError(f"need >= 10 tail iterations, got {len(tail)}")
    x = np.arange(len(tail), dtype=float)
    y = np.log(tail)
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return RateFit(rate=float(np.exp(slope)), r_squared=r2)

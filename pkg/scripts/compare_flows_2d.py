#!/usr/bin/env python3
"""Compare gradient-flow variants on the 2D optical-lattice problem.

Domain [-L, L]^2 with V = sin^2(pi x / 4) sin^2(pi y / 4), interaction
beta.  Runs the modified-H1 flow against BFSP (and optionally the plain
metric flows) from the linear ground state and prints per-flow iteration
counts and terminal residuals.
"""

import argparse
import sys

import numpy as np

from gpflow.energy import Problem, energy, eigenvalue_estimate
from gpflow.flows import (FixedStep, FlowConfig, FlowKind, StopRule,
                          default_initial_state, run)
from gpflow.grids import GridSpec, Scheme, TensorOperator
from gpflow.potentials import sin2_product


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=300)
    ap.add_argument("--half-width", type=float, default=8.0)
    ap.add_argument("--beta", type=float, default=5.0)
    ap.add_argument("--alpha", type=float, default=0.15)
    ap.add_argument("--dt", type=float, default=0.1, help="BFSP time step")
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--max-iter", type=int, default=2000)
    ap.add_argument("--all-metrics", action="store_true",
                    help="also run the L2 / A0 / AU metric flows")
    args = ap.parse_args()

    spec = GridSpec(args.half_width, 2, args.cells, Scheme.FD2)
    disc = TensorOperator(spec)
    V = sin2_product(disc.node_coordinates())
    problem = Problem(V, args.beta, args.alpha)
    u0 = default_initial_state(disc, "linear", problem)
    stop = StopRule(residual_tol=args.tol, stall_window=10,
                    max_iter=args.max_iter)

    # stabilization shift for BFSP: midpoint of V + beta u0^2
    b = V + args.beta * u0.coeffs ** 2
    alpha_bfsp = 0.5 * (float(np.max(b)) + float(np.min(b)))

    flows = [
        ("modified_h1", FlowConfig(alpha=args.alpha, step=FixedStep(1.0))),
        ("bfsp", FlowConfig(kind=FlowKind.BFSP, alpha=alpha_bfsp, dt=args.dt)),
    ]
    if args.all_metrics:
        for kind in (FlowKind.L2, FlowKind.A0, FlowKind.AU):
            flows.append((kind.value,
                          FlowConfig(kind=kind, alpha=args.alpha,
                                     step=FixedStep(1.0))))

    print(f"{'flow':<14}{'iters':>7}{'reason':>10}{'residual':>12}"
          f"{'lambda':>16}{'energy':>16}{'seconds':>9}")
    for name, flow in flows:
        rep = run(flow, problem, u0, stop)
        s = rep.final_state
        print(f"{name:<14}{rep.iterations:>7}{rep.reason:>10}"
              f"{rep.records[-1].residual:>12.3e}"
              f"{eigenvalue_estimate(s, problem):>16.10f}"
              f"{energy(s, problem):>16.10f}{rep.wall_seconds:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

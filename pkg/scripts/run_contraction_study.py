#!/usr/bin/env python3
"""Amplitude escalation of the fixed-point iteration.

Doubles the forcing amplitude until the contraction monitor trips,
printing the contraction-factor trajectory of every run; the last line
shows the empirical smallness threshold for the chosen parameters.
"""

import argparse

from hamelflow.background import HamelParameters
from hamelflow.errors import ContractionError, IterationError
from hamelflow.forcing import power_envelope_forcing
from hamelflow.grid import RadialGrid
from hamelflow.nonlinear import picard_iterate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=4.0)
    ap.add_argument("--rho", type=float, default=2.5)
    ap.add_argument("--epsilon0", type=float, default=0.5)
    ap.add_argument("--max-doublings", type=int, default=14)
    ap.add_argument("--panels", type=int, default=64)
    args = ap.parse_args()

    grid = RadialGrid.build(args.panels, 8, 1e3)
    params = HamelParameters(args.alpha, args.gamma, args.rho)
    eps = args.epsilon0
    last_good = None
    for _ in range(args.max_doublings):
        forcing = power_envelope_forcing(grid, params, eps, {0: 1.0, 1: 1.0})
        try:
            sol, diag = picard_iterate(forcing, params, grid, max_iter=60)
            q = diag.contraction_factors
            print(f"eps={eps:10.4g} converged in {diag.iterations:2d} iterations, "
                  f"q1={q[0]:.3e}, q_last={q[-1]:.3e}")
            last_good = eps
        except (ContractionError, IterationError) as exc:
            q = exc.diagnostics.contraction_factors
            print(f"eps={eps:10.4g} NON-CONTRACTION after {exc.diagnostics.iterations} "
                  f"iterations, q trail {[f'{x:.3g}' for x in q[-3:]]}")
            break
        eps *= 2.0
    if last_good is not None:
        print(f"largest converged amplitude: {last_good}")


if __name__ == "__main__":
    main()

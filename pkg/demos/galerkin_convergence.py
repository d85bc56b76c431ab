"""Galerkin refinement of the stochastic problem with the saturated forcing.

The data are one random field drawn on the K = 8 box and restricted to each
solver box, so the three runs are projections of one problem.  Successive
M-distances should shrink, and the a priori ratios stay well below one.
Takes about a minute on one core.

    python demos/galerkin_convergence.py
"""

import time

from bsnse.config import build_problem, load_config
from bsnse.engine import mdistance, mnorm, solve_bsnse
from bsnse.estimates import apriori_report

cfg = load_config()
sols = {}
for K in (2, 4, 8):
    t0 = time.time()
    cfg.update({"solver.K": K, "solver.L": 32, "solver.M": 2000, "solver.seed": 7})
    sols[K] = solve_bsnse(*build_problem(cfg))
    rep = apriori_report(sols[K])
    print(f"K={K}: {sols[K].modes.dim:4d} real modes, M-norm {mnorm(sols[K]):.4f}, "
          f"a priori ratios H {rep.extra['ratio_H']:.2e} V {rep.extra['ratio_V']:.2e} ({time.time() - t0:.1f} s)")

print(f"M-distance K 2->4: {mdistance(sols[2], sols[4]):.4f}")
print(f"M-distance K 4->8: {mdistance(sols[4], sols[8]):.4f}")

"""Deterministic nonlinear problem against a forward Navier-Stokes run.

With psi = 1 and sigma = 0 the backward solution is deterministic (Z = 0) and
u(t) = -v(T - t), where v solves the forward equation from -xi with the reversed
forcing.  The backward solver is first order in dt, so the residual should halve
with each refinement.

    python demos/reversal.py
"""

import math
from pathlib import Path

from bsnse.config import build_problem, load_config
from bsnse.engine import solve_bsnse
from bsnse.forward import reversal_residual, reversal_run

cfg = load_config(Path(__file__).with_name("configs") / "reversal.cfg")
prev = None
print(f"{'L':>5} {'residual':>10} {'order':>6} {'max|Z|':>9}")
for L in cfg["reversal.levels"]:
    sc, model, sigma, term = build_problem(dict(cfg, **{"solver.L": L, "solver.M": cfg["reversal.M"]}))
    sol = solve_bsnse(sc, model, sigma, term)
    r = reversal_residual(sol, reversal_run(sol, substeps=cfg["reversal.substeps"]))
    order = "" if prev is None else f"{math.log2(prev / r):6.2f}"
    print(f"{L:5d} {r:10.3e} {order:>6} {math.sqrt(sol.summary['z_h2'].max()):9.1e}")
    prev = r

"""Command-line front end: ``bsnse <subcommand> --config PATH --out DIR [--seed N] [--threads N]``.

Exit codes: 0 success, 1 a check failed, 2 config error, 3 inadmissible
(super-parabolicity margin not positive), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import (ConfigError, build_model, build_problem, build_sigma, load_config)
from .engine import (AdmissibilityError, NumericalFailure, SolverConfig, TruncationRadiusError,
                     linear_oracle_table, solve_bsnse, u0_standard_error)
from .estimates import (apriori_report, b_difference_residual, coercivity_residual, energy_gronwall_report,
                        forcing_property_reports, gronwall_check, heat_mode_components,
                        ito_energy_residual, spectral_identity_reports, spectral_inequality_reports,
                        uniqueness_gap)
from .fieldio import utc_now, write_field_csv, write_manifest, write_table_csv
from .forcing import superparabolicity_margin
from .forward import reversal_residual, reversal_run
from .spectral import ModeSet, random_field, worker_pool

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_NUMERICAL = 0, 1, 2, 3, 4

REPORT_HEADER = ["name", "samples", "violations", "margin_min", "lhs_max", "rhs_min"]


def _report_row(r):
    return [r.name, r.samples, r.violations, float(np.min(r.margin)), float(np.max(r.lhs)),
            float(np.min(r.rhs))]


def _write_reports(out, name, reports):
    return write_table_csv(os.path.join(out, name), REPORT_HEADER, [_report_row(r) for r in reports])


# ---------------------------------------------------------------------------
# subcommands; each returns (files, extra, ok)


def cmd_simulate(cfg, out):
    sc, model, sigma, term = build_problem(cfg)
    sol = solve_bsnse(sc, model, sigma, term)
    files = [write_field_csv(sol.u0, os.path.join(out, "u0.csv"))]
    node = cfg["output.slice_node"] if cfg["output.slice_node"] >= 0 else sc.L // 2
    if node > sc.L:
        raise ConfigError(f"output.slice_node={node} exceeds solver.L={sc.L}")
    paths = min(cfg["output.slice_paths"], sc.M)
    u_slice, _ = sol.fields(node, sol.ensemble.subset(np.arange(paths)))
    files.append(write_field_csv(u_slice, os.path.join(out, "slice.csv")))
    ito, _ = ito_energy_residual(sol)
    s, d = sol.summary, sol.diagnostics
    rows = []
    for i in range(sc.L + 1):
        last = i == sc.L
        rows.append([i, float(sol.grid.nodes[i]), float(s["u_h2"][i].mean()), float(s["u_v2"][i].mean()),
                     float(s["z_h2"][i].mean()), math.nan if last else float(ito[i]),
                     -1 if last else int(d["degree"][i]), math.nan if last else float(d["cond_y"][i]),
                     -1 if last else int(d["picard_iters"][i])])
    files.append(write_table_csv(os.path.join(out, "nodes.csv"),
                                 ["i", "t", "mean_u_h2", "mean_u_v2", "mean_z_h2", "ito_residual",
                                  "degree", "cond_y", "picard_iters"], rows))
    rep = apriori_report(sol)
    files.append(write_table_csv(os.path.join(out, "apriori.csv"), ["level", "lhs", "rhs", "ratio"],
                                 [["H", rep.lhs[0], rep.rhs[0], rep.extra["ratio_H"]],
                                  ["V", rep.lhs[1], rep.rhs[1], rep.extra["ratio_V"]]]))
    extra = {"apriori": rep.summary(), "margin": d["margin"], "max_divergence": d["max_divergence"],
             "u0_standard_error": u0_standard_error(sol)}
    return files, extra, rep.passed


def cmd_invariants(cfg, out):
    modes = ModeSet.box(cfg["invariants.K"], cfg["solver.period"])
    n, seed = cfg["invariants.samples"], cfg["solver.seed"]
    sigma = build_sigma(cfg)
    lam = superparabolicity_margin(cfg["solver.nu"], cfg["solver.lambda_bar"], sigma, cfg["solver.T"])
    reports = (spectral_identity_reports(modes, n, seed) + spectral_inequality_reports(modes, n, seed, lam)
               + forcing_property_reports(build_model(cfg, modes), cfg["solver.nu"], sigma, modes, n, seed,
                                          cfg["solver.T"]))
    files = [_write_reports(out, "invariants.csv", reports)]
    return files, {"violations": sum(r.violations for r in reports)}, all(r.passed for r in reports)


def cmd_oracle_linear(cfg, out):
    sc, model, sigma, term = build_problem(cfg)
    try:
        sol = solve_bsnse(sc, model, sigma, term)
        rows = linear_oracle_table(sol)
    except ValueError as exc:
        if isinstance(exc, (AdmissibilityError, TruncationRadiusError)):
            raise
        raise ConfigError(str(exc)) from None
    table = [[kx, ky, c, v.real, v.imag, r.real, r.imag, e] for kx, ky, c, v, r, e in rows]
    files = [write_table_csv(os.path.join(out, "oracle_linear.csv"),
                             ["kx", "ky", "comp", "re_solver", "im_solver", "re_oracle", "im_oracle", "rel_err"],
                             table)]
    worst = max(e for *_, e in rows) if rows else 0.0
    return files, {"max_rel_err": worst, "u0_standard_error": u0_standard_error(sol)}, worst <= 0.02


def cmd_oracle_reversal(cfg, out):
    if cfg["terminal.psi"] != "one" or cfg["sigma.x"] != 0.0 or cfg["sigma.y"] != 0.0:
        raise ConfigError("oracle-reversal needs terminal.psi = one and sigma.x = sigma.y = 0")
    rows, prev = [], None
    for L in cfg["reversal.levels"]:
        cfg_L = dict(cfg, **{"solver.L": L, "solver.M": cfg["reversal.M"],
                             "solver.basis_degree": min(cfg["solver.basis_degree"], cfg["reversal.M"] - 2)})
        sc, model, sigma, term = build_problem(cfg_L)
        sol = solve_bsnse(sc, model, sigma, term)
        r = reversal_residual(sol, reversal_run(sol, substeps=cfg["reversal.substeps"]))
        order = math.nan if prev is None or r == 0 else math.log(prev[1] / r) / math.log(L / prev[0])
        rows.append([L, sc.T / L, r, order])
        prev = (L, r)
    files = [write_table_csv(os.path.join(out, "reversal.csv"), ["L", "dt", "residual", "order"], rows)]
    res = [r[2] for r in rows]
    monotone = all(b < a for a, b in zip(res, res[1:]))
    return files, {"residuals": res, "monotone": monotone}, monotone


def cmd_estimates(cfg, out):
    sc, model, sigma, term = build_problem(cfg)
    n, seed = cfg["estimates.samples"], cfg["solver.seed"]
    modes = sc.modes
    coer = coercivity_residual(model, sc.nu, sigma, lambda_bar=sc.lambda_bar, samples=n, modes=modes,
                               T=sc.T, seed=seed)
    lam = coer.constants["lam"]
    rng = np.random.default_rng(seed)
    u = random_field(modes, rng, batch=n, decay=1.0)
    v = random_field(modes, rng, batch=n, decay=1.0)
    bdiff = b_difference_residual(u, v, lam)
    # deterministic Gronwall on the heat mode |u(t)|^2 = e^{-2 nu lambda_1 (T - t)} |xi|^2 (alpha = 0)
    grid = sc.grid
    lam1 = float(modes.eigenvalues.min())
    heat = np.exp(-2.0 * sc.nu * lam1 * (sc.T - grid.nodes))
    det = gronwall_check(heat, 0.0, np.zeros_like(heat), grid)
    sol = solve_bsnse(sc, model, sigma, term)
    energy = energy_gronwall_report(sol)
    reports = [coer, bdiff, det, energy]
    files = [_write_reports(out, "estimates.csv", reports),
             write_table_csv(os.path.join(out, "coercivity_samples.csv"), ["j", "lhs", "rhs", "tolerance"],
                             coer.rows())]
    extra = {"coercivity_constants": coer.summary()["constants"],
             "heat_mode": heat_mode_components(sc.nu, lam1, 1.0, sc.T)}
    return files, extra, all(r.passed for r in reports)


def cmd_uniqueness(cfg, out):
    sc, model, sigma, term = build_problem(cfg)
    solA = solve_bsnse(sc, model, sigma, term)
    scB = SolverConfig(**{**sc.__dict__, "seed": cfg["uniqueness.seed_b"]})
    if scB.seed == sc.seed:
        raise ConfigError("uniqueness.seed_b must differ from the run seed")
    solB = solve_bsnse(scB, model, sigma, term)
    rep = uniqueness_gap(solA, solB, n_se=cfg["uniqueness.n_se"])
    x = rep.extra
    rows = [["sqrt_gap", x["sqrt_gap"]], ["pooled_se", x["pooled_se"]],
            ["ratio", x["sqrt_gap"] / x["pooled_se"] if x["pooled_se"] > 0 else math.inf],
            ["u0_distance", x["u0_distance"]], ["u0_pooled_se", x["u0_pooled_se"]],
            ["weight_max", x["weight_max"]]]
    files = [write_table_csv(os.path.join(out, "uniqueness.csv"), ["quantity", "value"], rows)]
    return files, {"report": rep.summary(), "seed_b": scB.seed}, rep.passed


COMMANDS = {
    "simulate": cmd_simulate,
    "invariants": cmd_invariants,
    "oracle-linear": cmd_oracle_linear,
    "oracle-reversal": cmd_oracle_reversal,
    "estimates": cmd_estimates,
    "uniqueness": cmd_uniqueness,
}


def build_parser():
    p = argparse.ArgumentParser(prog="bsnse", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"bsnse {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value config file (defaults if omitted)")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--seed", type=int, help="overrides solver.seed")
        s.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    return p


def run(command, config_path, out, seed=None, threads=1):
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg["solver.seed"] = seed
        if threads is not None and threads < 1:
            raise ConfigError("--threads must be >= 1")
        margin = superparabolicity_margin(cfg["solver.nu"], cfg["solver.lambda_bar"], build_sigma(cfg),
                                          cfg["solver.T"])
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not margin > 0:
        print(f"inadmissible configuration: super-parabolicity margin {margin:.6g} is not positive "
              f"(nu - lambda_bar^2 |sigma|^2 / 2)", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    os.makedirs(out, exist_ok=True)
    started = utc_now()
    try:
        with worker_pool(threads):
            files, extra, ok = COMMANDS[command](cfg, out)
    except (ConfigError, TruncationRadiusError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        print(f"inadmissible configuration: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    extra = dict(extra, passed=bool(ok), threads=threads)
    write_manifest(out, __version__, command, cfg, cfg["solver.seed"], started, files, extra=_json_safe(extra))
    print(f"{command}: {'ok' if ok else 'CHECK FAILED'}; {len(files)} file(s) in {out}")
    return EXIT_OK if ok else EXIT_CHECK


def _json_safe(v):
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _json_safe(v.tolist())
    return v


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())

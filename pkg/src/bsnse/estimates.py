"""Numerical audits of the energy inequalities behind existence and uniqueness.

Every audit returns an ``EstimateReport`` holding per-sample left and right
hand sides and the explicit constants used, so "there exists C" is replaced
by a specific C that is then checked on fresh samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import (BsdeSolution, apriori_constants, iter_paired, regress_condexp)
from .forcing import raw_driver, superparabolicity_margin
from .spectral import (ModeSet, VelocityField, convection, inner, nonlinear_B, norm,
                       random_field, trilinear_b)


@dataclass
class EstimateReport:
    """Sampled inequality ``lhs <= rhs (+ tolerance)``."""

    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    constants: dict
    tolerance: np.ndarray | float = 0.0
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = np.atleast_1d(np.asarray(self.lhs, dtype=float))
        self.rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))

    @property
    def margin(self):
        return self.rhs + self.tolerance - self.lhs

    @property
    def violations(self):
        return int(np.sum(~(self.margin >= 0)))

    @property
    def passed(self):
        return self.violations == 0

    @property
    def samples(self):
        return int(self.lhs.size)

    def summary(self):
        m = self.margin
        return {"name": self.name, "samples": self.samples, "violations": self.violations,
                "margin_min": float(np.min(m)), "margin_mean": float(np.mean(m)),
                "constants": {k: _jsonable(v) for k, v in self.constants.items()},
                "seed": self.seed, **{k: _jsonable(v) for k, v in self.extra.items()}}

    def rows(self):
        tol = np.broadcast_to(self.tolerance, self.lhs.shape)
        return [(j, float(a), float(b), float(t)) for j, (a, b, t) in enumerate(zip(self.lhs, self.rhs, tol))]


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# ---------------------------------------------------------------------------
# Gronwall envelopes


def gronwall_envelope(gT, alpha, h, grid, order=5):
    """t -> e^{alpha (T - t)} gT + int_t^T e^{alpha (s - t)} h(s) ds.

    ``h`` is a callable (Gauss-Legendre on each cell of ``grid``) or an array
    of node values (trapezoid rule on the grid).
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    T = grid.T
    nodes = grid.nodes
    if callable(h):
        x, w = np.polynomial.legendre.leggauss(order)

        def integral(t):
            edges = np.concatenate([[t], nodes[nodes > t]])
            total = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                s = a + (x + 1.0) * (b - a) / 2.0
                hv = np.array([h(si) for si in s], dtype=float)
                total += np.sum(w * (b - a) / 2.0 * np.exp(alpha * (s - t)) * hv)
            return total
    else:
        hv = np.asarray(h, dtype=float)
        if hv.shape != nodes.shape:
            raise ValueError("node values of h must match the grid")

        def integral(t):
            s = np.concatenate([[t], nodes[nodes > t]])
            vals = np.interp(s, nodes, hv) * np.exp(alpha * (s - t))
            return float(np.trapezoid(vals, s))

    def env(t):
        t = np.asarray(t, dtype=float)
        out = np.array([math.exp(alpha * (T - ti)) * gT + integral(ti) for ti in t.ravel()])
        return out.reshape(t.shape) if t.ndim else float(out[0])

    return env


def gronwall_check(g, alpha, h, grid):
    """Report for g(t) <= envelope(t) given node values ``g`` (deterministic form)."""
    g = np.asarray(g, dtype=float)
    env = gronwall_envelope(g[-1], alpha, h, grid)
    rhs = env(grid.nodes)
    return EstimateReport("gronwall", g, rhs, {"alpha": alpha}, tolerance=1e-12 * np.maximum(1.0, np.abs(rhs)))


def stochastic_gronwall_check(Y, X, alpha, ensemble, basis_degree=4, n_se=4.0):
    """Y_i <= e^{alpha (T - t_i)} E_i[Y_L] + E_i[sum_{j >= i} e^{alpha (t_j - t_i)} X_j dt].

    ``Y`` and ``X`` have shape ``(L + 1, M)`` with ``Y_i`` a function of
    ``W_{t_i}``.  The conditional expectation of the gap (right side target
    minus ``Y_i``) is the regression on ``W_{t_i}``; it must be nonnegative up
    to ``n_se`` standard errors of the fitted value.
    """
    Y = np.asarray(Y, dtype=float)
    X = np.asarray(X, dtype=float)
    grid = ensemble.grid
    L, dt, t = grid.L, grid.dt, grid.nodes
    lhs, rhs, tol = [], [], []
    for i in range(L + 1):
        disc = np.exp(alpha * (t[i:L] - t[i]))
        target = math.exp(alpha * (grid.T - t[i])) * Y[L] + dt * (disc[:, None] * X[i:L]).sum(axis=0)
        reg = regress_condexp(target - Y[i], ensemble.W[:, i], basis_degree)
        resid = target - Y[i] - reg.fitted
        se = math.sqrt((reg.degree + 1) / ensemble.M) * float(np.std(resid))
        lhs.append(Y[i])
        rhs.append(Y[i] + reg.fitted)
        tol.append(np.full(ensemble.M, n_se * se + 1e-12 * max(1.0, float(np.abs(target).max()))))
    return EstimateReport("stochastic_gronwall", np.concatenate(lhs), np.concatenate(rhs),
                          {"alpha": alpha, "basis_degree": basis_degree, "n_se": n_se},
                          tolerance=np.concatenate(tol), seed=ensemble.seed)


# ---------------------------------------------------------------------------
# coercivity and difference estimates


def coercivity_constants(model, nu, sigma, lambda_bar, T=1.0):
    """lam, kappa = (lb^2 - 1) / (4 lb^2) and C = 2 varrho(eps) + beta^2 / lam, eps = kappa / 2."""
    c = apriori_constants(model, nu, lambda_bar, sigma, T)
    return {k: c[k] for k in ("lam", "lambda_bar", "kappa", "eps", "C", "beta")}


def _sample_pairs(modes, rng, samples, scale_range=(1e-2, 1e2)):
    lo, hi = np.log(scale_range)
    phi = random_field(modes, rng, batch=samples, decay=rng.uniform(0.0, 2.0))
    psi = random_field(modes, rng, batch=samples, decay=rng.uniform(0.0, 2.0))
    phi = phi * (np.exp(rng.uniform(lo, hi, samples)) / norm(phi))
    psi = psi * (np.exp(rng.uniform(lo, hi, samples)) / norm(psi))
    return phi, psi


def coercivity_residual(model, nu, sigma, lam=None, lambda_bar=math.sqrt(2.0), samples=1000,
                        modes=None, T=1.0, seed=0):
    """2<Phi(t, phi, psi), phi> - |psi|^2 <= -lam |phi|_V^2 - kappa |psi|^2 + 2 g(t) + C |phi|^2."""
    modes = modes or ModeSet.box(4, model.period)
    margin = superparabolicity_margin(nu, lambda_bar, sigma, T)
    if margin <= 0:
        raise ValueError(f"inadmissible configuration, margin {margin:.6g}")
    const = coercivity_constants(model, nu, sigma, lambda_bar, T)
    if lam is not None:
        if lam > margin:
            raise ValueError(f"lam={lam} exceeds the super-parabolicity margin {margin}")
        const["lam"] = lam
        const["C"] = 2.0 * model.bundle.varrho(const["eps"]) + model.bundle.beta**2 / lam
    rng = np.random.default_rng(seed)
    phi, psi = _sample_pairs(modes, rng, samples)
    t = rng.uniform(0.0, T, samples)
    driver = raw_driver(model, nu, sigma, modes)
    lhs = np.empty(samples)
    for j in range(samples):
        lhs[j] = 2.0 * inner(driver(t[j], phi[j], psi[j]), phi[j]) - norm(psi[j]) ** 2
    g = np.array([model.bundle.g(tj) for tj in t])
    rhs = (-const["lam"] * norm(phi, "V") ** 2 - const["kappa"] * norm(psi) ** 2 + 2.0 * g
           + const["C"] * norm(phi) ** 2)
    scale = norm(phi, "V") ** 2 + norm(psi) ** 2 + np.abs(g)
    return EstimateReport("coercivity", lhs, rhs, const, tolerance=1e-10 * scale, seed=seed)


def b_difference_residual(u, v, lam):
    """|<B(u) - B(v), u - v>| <= lam / 4 |u - v|_V^2 + (2 / lam) |v|_V^2 |u - v|^2."""
    w = u - v
    lhs = np.abs(inner(nonlinear_B(u) - nonlinear_B(v), w))
    rhs = lam / 4.0 * norm(w, "V") ** 2 + 2.0 / lam * norm(v, "V") ** 2 * norm(w) ** 2
    scale = norm(u, "V") ** 2 * norm(u) + norm(v, "V") ** 2 * norm(v) + 1e-300
    return EstimateReport("b_difference", lhs, rhs, {"lam": lam}, tolerance=1e-11 * scale)


def ladyzhenskaya_residual(u):
    """|u|_{L4} <= 2^{1/4} |u|^{1/2} |u|_V^{1/2}."""
    lhs = norm(u, "L4")
    rhs = 2.0**0.25 * np.sqrt(norm(u) * norm(u, "V"))
    return EstimateReport("ladyzhenskaya", lhs, rhs, {"c": 2.0**0.25}, tolerance=1e-12 * rhs)


def trilinear_residual(u, v, w):
    """|b(u, v, w)| <= 2^{1/2} |u|^{1/2} |u|_V^{1/2} |v|_V |w|^{1/2} |w|_V^{1/2}."""
    lhs = np.abs(trilinear_b(u, v, w))
    rhs = math.sqrt(2.0) * np.sqrt(norm(u) * norm(u, "V") * norm(w) * norm(w, "V")) * norm(v, "V")
    return EstimateReport("trilinear", lhs, rhs, {"c": math.sqrt(2.0)}, tolerance=1e-11 * rhs)


def trilinear_CG_ratios(u, v, w):
    """Ratios of |b| to the three C_G-type right-hand sides (their maxima estimate C_G)."""
    b = np.abs(trilinear_b(u, v, w))
    H, V, A = (lambda f: norm(f)), (lambda f: norm(f, "V")), (lambda f: norm(f, "DA"))
    r2 = b / (np.sqrt(H(u) * A(u)) * V(v) * H(w))
    r3 = b / (np.sqrt(H(u) * V(u) * V(v) * A(v)) * H(w))
    r4 = b / (H(u) * V(v) * np.sqrt(H(w) * A(w)))
    return r2, r3, r4


def measure_C_G(modes, samples=1000, seed=0):
    """Empirical constants in the three C_G trilinear bounds and in |B(u)| <= C_G |u|^{1/2}|u|_V|Au|^{1/2}."""
    rng = np.random.default_rng(seed)
    u, v = _sample_pairs(modes, rng, samples, (1.0, 1.0))
    w = random_field(modes, rng, batch=samples, decay=rng.uniform(0.0, 2.0))
    r2, r3, r4 = trilinear_CG_ratios(u, v, w)
    rb = norm(nonlinear_B(u)) / (np.sqrt(norm(u) * norm(u, "DA")) * norm(u, "V"))
    return {"b_DA_first": float(r2.max()), "b_DA_second": float(r3.max()), "b_DA_third": float(r4.max()),
            "B_bound": float(rb.max()), "samples": samples, "seed": seed}


def untruncated_enstrophy_identity(v):
    """Relative size of <Pi(v, v), Laplacian v> on the full (untruncated) product."""
    P = convection(v, v, truncate=False)
    big = v.embed(P.modes)
    lap = VelocityField(P.modes, -big.coeffs * P.modes.eigenvalues[:, None])
    return np.abs(inner(P, lap)) / (norm(P) * norm(lap) + 1e-300)


# ---------------------------------------------------------------------------
# solution audits


def _energy_components(sol, start=0):
    """Path-max sup terms and path-mean tail sums of the two energy levels."""
    s = sol.summary
    dt = sol.grid.dt
    L = sol.grid.L

    def tail(x):  # sum_{j >= i, j < L} x_j dt, per node i
        c = np.zeros_like(x)
        c[:L] = np.cumsum(x[:L][::-1], axis=0)[::-1] * dt
        return c

    tv = tail(s["u_v2"]).mean(axis=1)
    tz = tail(s["z_h2"]).mean(axis=1)
    ta = tail(s["u_a2"]).mean(axis=1)
    tzv = tail(s["z_v2"]).mean(axis=1)
    sup_h = s["u_h2"].max(axis=1)
    sup_v = s["u_v2"].max(axis=1)
    return {"lhs_H": float(np.max(sup_h + tv + tz)), "lhs_V": float(np.max(sup_v + ta + tzv)),
            "sup_u2": float(sup_h.max()), "sup_uV2": float(sup_v.max()),
            "int_v2": float(tv[0]), "int_z2": float(tz[0]), "int_a2": float(ta[0]), "int_zV2": float(tzv[0])}


def apriori_report(sol: BsdeSolution, model=None, config=None):
    """Empirical left sides of the two a priori bounds against C (|g|_L1 + sup |xi|^2).

    Conditional expectations are replaced by ensemble means (an upper-level
    proxy); sup over paths and nodes stands in for the essential supremum.
    """
    model = model or sol.model
    config = config or sol.config
    c = apriori_constants(model, config.nu, config.lambda_bar, sol.sigma, config.T)
    g1 = model.bundle.g_l1(config.T)
    xiH = sol.terminal.sup_norm("H") ** 2
    xiV = sol.terminal.sup_norm("V") ** 2
    comp = _energy_components(sol)
    rhs_H = c["C_L2"] * (g1 + xiH)
    rhs_V = c["C_V"] * (g1 + xiV)
    lhs = np.array([comp["lhs_H"], comp["lhs_V"]])
    rhs = np.array([rhs_H, rhs_V])
    ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
    return EstimateReport("apriori", lhs, rhs, {**c, "g_l1": g1, "sup_xi_H2": xiH, "sup_xi_V2": xiV},
                          seed=sol.ensemble.seed, extra={**comp, "ratio_H": float(ratio[0]),
                                                         "ratio_V": float(ratio[1])})


def heat_mode_components(nu, lambda_k, xi_norm2, T):
    """Closed-form sup |u|^2 and int |u|_V^2 for u(t) = e^{-nu lambda_k (T - t)} xi."""
    r = 2.0 * nu * lambda_k
    frac = -math.expm1(-r * T) / r if r > 0 else T
    return {"sup_u2": xi_norm2, "int_v2": lambda_k * xi_norm2 * frac}


def ito_energy_residual(sol, model=None, config=None):
    """Per-node residual of the discrete backward Ito identity for |u|^2.

    r_i = |u_i|^2 - |u_{i+1}|^2 - 2 <Phi_i, u_i> dt + |Z_i|^2 dt + 2 <Z_i, u_i> dW_i,
    returned as ``(path_mean_abs, per_path)`` with ``per_path`` of shape ``(L, M)``.
    """
    s = sol.summary
    dt = sol.grid.dt
    dW = sol.ensemble.increments.T
    r = (s["u_h2"][:-1] - s["u_h2"][1:] - 2.0 * s["phi_u"][:-1] * dt + s["z_h2"][:-1] * dt
         + 2.0 * s["zu"][:-1] * dW)
    return np.abs(r).mean(axis=1), r


def martingale_check(sol, n_se=4.0):
    """Path mean of sum_i <Z_i, u_i> dW_i against ``n_se`` standard errors."""
    x = (sol.summary["zu"][:-1] * sol.ensemble.increments.T).sum(axis=0)
    se = float(np.std(x)) / math.sqrt(x.size)
    return EstimateReport("martingale", [abs(float(x.mean()))], [n_se * se], {"n_se": n_se},
                          tolerance=1e-14, seed=sol.ensemble.seed)


def uniqueness_weight_K(lam, lambda_bar):
    """K with 2 rho + rho^2 (2 / lam + 2 lb^2 / (lb^2 - 1)) <= K (1 + rho^2)."""
    lb2 = lambda_bar**2
    return 1.0 + 2.0 / lam + 2.0 * lb2 / (lb2 - 1.0)


def _regression_se2(sol, weight_nodes, lam, kappa2, z_key="se2_z_multi"):
    """Weighted squared Monte Carlo error of one solution's fitted fields."""
    pw = sol.pathwise
    L = sol.grid.L
    w = weight_nodes[:L]
    return float(pw["se2_u_h"][0] + sol.grid.dt * np.sum(w * (kappa2 * pw[z_key][:L] + lam * pw["se2_u_v"][:L])))


def uniqueness_gap(solA, solB, v_for_weight=None, lam=None, K=None, n_se=3.0):
    """Weighted distance between two solutions of one problem.

    gap = E[e^{R_0} |du_0|^2 + sum_i e^{R_i} (kappa2 |dZ_i|^2 + lam |du_i|_V^2) dt],
    R_i = sum_{j < i} (K + 4/lam |v_j|_V^2 + K rho^2) dt, with kappa2 =
    (lb^2 - 1) / (2 lb^2), evaluated on the ensemble of ``solA``.  The budget is
    ``n_se^2`` times the pooled squared Monte Carlo standard error of the two
    solutions, i.e. ``sqrt(gap) <= n_se * pooled SE``.
    """
    ca, cb = solA.config, solB.config
    same = (ca.nu, ca.T, ca.L, ca.lambda_bar, ca.period) == (cb.nu, cb.T, cb.L, cb.lambda_bar, cb.period)
    if not same or solA.model is not solB.model and repr(solA.model) != repr(solB.model):
        raise ValueError("solutions come from different problems")
    v = v_for_weight or solB
    lb = ca.lambda_bar
    margin = superparabolicity_margin(ca.nu, lb, solA.sigma, ca.T)
    lam = margin if lam is None else lam
    K = uniqueness_weight_K(lam, lb) if K is None else K
    rho = solA.model.bundle.rho(None)
    kappa2 = (lb**2 - 1.0) / (2.0 * lb**2)
    ens = solA.ensemble
    grid = solA.grid
    dt = grid.dt
    L = grid.L
    du2 = np.zeros((L + 1, ens.M))
    duv = np.zeros((L + 1, ens.M))
    dz2 = np.zeros((L + 1, ens.M))
    vv = np.zeros((L + 1, ens.M))
    for i, uA, ZA, uB, ZB in iter_paired(solA, solB, ens):
        du = uA - uB
        du2[i] = norm(du) ** 2
        duv[i] = norm(du, "V") ** 2
        dz2[i] = norm(ZA - ZB) ** 2
        if v is solB:
            vv[i] = norm(uB, "V") ** 2
        elif v is solA:
            vv[i] = norm(uA, "V") ** 2
    if v is not solA and v is not solB:
        for i in range(L + 1):
            vv[i] = norm(v.fields(i, ens)[0], "V") ** 2
    R = np.zeros((L + 1, ens.M))
    R[1:] = np.cumsum((K + 4.0 / lam * vv[:-1] + K * rho**2) * dt, axis=0)
    w = np.exp(R)
    per_path = w[0] * du2[0] + ((w[:L] * (kappa2 * dz2[:L] + lam * duv[:L])).sum(axis=0)) * dt
    gap = float(per_path.mean())
    wbar = w.mean(axis=1)
    se2 = _regression_se2(solA, wbar, lam, kappa2) + _regression_se2(solB, wbar, lam, kappa2)
    u0_gap = float(np.sqrt(du2[0].mean()))
    u0_se = math.sqrt((solA.pathwise["var_u_h"][0] / solA.ensemble.M)
                      + (solB.pathwise["var_u_h"][0] / solB.ensemble.M))
    return EstimateReport("uniqueness_gap", [gap], [n_se**2 * se2],
                          {"lam": lam, "K": K, "rho": rho, "kappa2": kappa2, "n_se": n_se},
                          seed=solA.ensemble.seed,
                          extra={"pooled_se": math.sqrt(se2), "sqrt_gap": math.sqrt(gap),
                                 "u0_distance": u0_gap, "u0_pooled_se": u0_se,
                                 "weight_max": float(w.max()), "seed_B": solB.ensemble.seed})


# ---------------------------------------------------------------------------
# property suites


def _triples(modes, rng, samples):
    fields = []
    for _ in range(3):
        f = random_field(modes, rng, batch=samples, decay=rng.uniform(0.0, 2.0))
        fields.append(f * (np.exp(rng.uniform(np.log(1e-2), np.log(1e2), samples)) / norm(f)))
    return fields


def spectral_identity_reports(modes, samples=1000, seed=0, tol=1e-10):
    """b(u, v, v) = 0, b(u, v, w) = -b(u, w, v) and <Pi(v, v), Laplacian v> = 0 (untruncated)."""
    rng = np.random.default_rng(seed)
    u, v, w = _triples(modes, rng, samples)
    su = np.sqrt(norm(u) * norm(u, "V"))
    scale_vv = su * norm(v, "V") * np.sqrt(norm(v) * norm(v, "V"))
    scale_vw = su * np.maximum(norm(v, "V") * np.sqrt(norm(w) * norm(w, "V")),
                               norm(w, "V") * np.sqrt(norm(v) * norm(v, "V")))
    r_zero = np.abs(trilinear_b(u, v, v)) / scale_vv
    r_anti = np.abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) / scale_vw
    r_ens = untruncated_enstrophy_identity(v)
    zeros = np.zeros(samples)
    return [EstimateReport("b_uvv_zero", r_zero, zeros, {"relative": True}, tolerance=tol, seed=seed),
            EstimateReport("b_antisymmetry", r_anti, zeros, {"relative": True}, tolerance=tol, seed=seed),
            EstimateReport("enstrophy_identity", r_ens, zeros, {"relative": True}, tolerance=tol, seed=seed)]


def spectral_inequality_reports(modes, samples=1000, seed=0, lam=0.37):
    """Ladyzhenskaya, the first trilinear bound and the b-difference estimate on fresh samples."""
    rng = np.random.default_rng(seed)
    u, v, w = _triples(modes, rng, samples)
    return [ladyzhenskaya_residual(u), trilinear_residual(u, v, w),
            b_difference_residual(u, v, lam)]


def forcing_property_reports(model, nu, sigma, modes, samples=1000, seed=0, T=1.0):
    """Retraction and cutoff ranges, Leray idempotence and divergence, Lipschitz bound of phi_n."""
    from .forcing import retract_phi_n, truncate_R_M
    from .spectral import leray_project
    rng = np.random.default_rng(seed)
    n = 1.5
    x, y, _ = _triples(modes, rng, samples)
    px, py = retract_phi_n(n, x), retract_phi_n(n, y)
    r_ball = norm(px)
    r_lip = norm(px - py)
    scale = norm(x - y)
    cut = np.asarray(truncate_R_M(2.0, rng.uniform(0.0, 5.0, samples)))
    raw = VelocityField(modes, rng.standard_normal((samples, modes.size, 2))
                        + 1j * rng.standard_normal((samples, modes.size, 2)))
    p1 = leray_project(raw)
    idem = norm(leray_project(p1) - p1) / norm(raw)
    div = np.abs(p1.divergence()).max(axis=-1) / (np.abs(raw.coeffs).max(axis=(-2, -1)) * modes.q.max())
    f = raw_driver(model, nu, sigma, modes)
    t = rng.uniform(0.0, T)
    fd = np.abs(f(t, x, y).divergence()).max(axis=-1) / np.maximum(norm(f(t, x, y)), 1e-300)
    zeros = np.zeros(samples)
    return [EstimateReport("retraction_ball", r_ball, np.full(samples, n), {"n": n}, tolerance=1e-12 * n, seed=seed),
            EstimateReport("retraction_lipschitz", r_lip, scale, {"n": n}, tolerance=1e-12 * scale, seed=seed),
            EstimateReport("cutoff_range", np.abs(cut - 0.5), np.full(samples, 0.5), {"M": 2.0}, seed=seed),
            EstimateReport("leray_idempotent", idem, zeros, {}, tolerance=1e-13, seed=seed),
            EstimateReport("leray_divergence", div, zeros, {}, tolerance=1e-13, seed=seed),
            EstimateReport("driver_divergence", fd, zeros, {}, tolerance=1e-12, seed=seed)]


def energy_gronwall_report(sol, n_se=4.0):
    """E_i |u_i|^2 <= e^{C (T - t_i)} E_i |xi|^2 + E_i sum_j e^{C (t_j - t_i)} 2 g(t_j) dt (conditional form)."""
    c = apriori_constants(sol.model, sol.config.nu, sol.config.lambda_bar, sol.sigma, sol.config.T)
    g = np.array([sol.model.bundle.g(t) for t in sol.grid.nodes])
    X = np.broadcast_to(2.0 * g[:, None], sol.summary["u_h2"].shape)
    rep = stochastic_gronwall_check(sol.summary["u_h2"], X, c["C"], sol.ensemble,
                                    basis_degree=sol.config.basis_degree, n_se=n_se)
    rep.name = "energy_gronwall"
    rep.constants["C"] = c["C"]
    return rep

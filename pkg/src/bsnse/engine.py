"""Backward Euler / least-squares Monte Carlo solver for the Galerkin system.

At each node, going backwards,

    Z_i = E_i[(u_{i+1} - E_i u_{i+1}) dW_i] / dt
    u_i = E_i[u_{i+1}] + dt * driver(t_i, u_i, Z_i)      (Picard)

where ``E_i`` is a polynomial regression on the Brownian value ``W_{t_i}``.
The stiff part ``-nu A`` is inverted exactly inside the Picard map, so the
fixed point is the implicit step and the iteration contracts at the rate
``dt * Lip(driver + nu A)``.

Only regression coefficients and per-path scalar summaries are kept, so a
solution can be re-evaluated on any ensemble (``BsdeSolution.fields``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import hermite_e

from .forcing import (ForcingModel, TruncationSpec, assemble_truncated_driver, raw_driver,
                      superparabolicity_margin)
from .spectral import (ModeSet, SigmaVector, VelocityField, inner, leray_project, norm,
                       worker_pool)

REGRESSION_CHUNK = 4096
COND_LIMIT = 1e10


class AdmissibilityError(ValueError):
    """Non-positive super-parabolicity margin."""


class TruncationRadiusError(ValueError):
    """Truncation radius below the a priori bound."""


class NumericalFailure(RuntimeError):
    """Picard non-contraction or blow-up."""


# ---------------------------------------------------------------------------
# time grid and Brownian paths


@dataclass(frozen=True)
class TimeGrid:
    T: float
    L: int

    def __post_init__(self):
        if self.T <= 0 or self.L < 1:
            raise ValueError("need T > 0 and L >= 1")

    @property
    def dt(self):
        return self.T / self.L

    @property
    def nodes(self):
        return np.arange(self.L + 1) * self.dt


@dataclass(frozen=True, eq=False)
class BrownianEnsemble:
    seed: int
    grid: TimeGrid
    increments: np.ndarray  # (M, L)
    W: np.ndarray  # (M, L + 1)

    @property
    def M(self):
        return self.increments.shape[0]

    def subset(self, paths):
        """Ensemble restricted to the given path indices (same seed and grid)."""
        idx = np.asarray(paths)
        return BrownianEnsemble(self.seed, self.grid, self.increments[idx], self.W[idx])


def generate_brownian(seed, M, grid):
    """M paths of a scalar Brownian motion on ``grid``; reproducible from (seed, M, L)."""
    if M < 2:
        raise ValueError("need at least two paths")
    rng = np.random.Generator(np.random.PCG64(seed))
    dW = rng.standard_normal((M, grid.L)) * math.sqrt(grid.dt)
    W = np.zeros((M, grid.L + 1))
    np.cumsum(dW, axis=1, out=W[:, 1:])
    dW.setflags(write=False)
    W.setflags(write=False)
    return BrownianEnsemble(seed, grid, dW, W)


# ---------------------------------------------------------------------------
# regression


@dataclass(frozen=True)
class Regression:
    """Fitted polynomial in the standardized state; callable on new states."""

    coef: np.ndarray  # (degree + 1, *response_shape)
    center: float
    scale: float
    degree: int
    requested_degree: int
    cond: float
    fitted: np.ndarray = field(repr=False)
    support: tuple = (-np.inf, np.inf)

    @property
    def degraded(self):
        return self.degree < self.requested_degree

    def features(self, state):
        return _features(state, self.center, self.scale, self.degree)

    def __call__(self, state):
        """Evaluate the fit; states outside the fitted range are clamped to it."""
        state = np.clip(np.asarray(state, dtype=float), *self.support)
        X = self.features(state)
        return np.tensordot(X, self.coef, axes=(1, 0))


def _features(state, center, scale, degree):
    x = (state - center) / scale if degree > 0 else np.zeros_like(state)
    return hermite_e.hermevander(x, degree)


def _gram(X, Y):
    """Fixed-order chunked accumulation of X^T X and X^T Y."""
    p = X.shape[1]
    G = np.zeros((p, p))
    R = np.zeros((p,) + Y.shape[1:], dtype=Y.dtype)
    for s in range(0, X.shape[0], REGRESSION_CHUNK):
        Xc = X[s:s + REGRESSION_CHUNK]
        G += Xc.T @ Xc
        R += np.tensordot(Xc, Y[s:s + REGRESSION_CHUNK], axes=(0, 0))
    return G, R


def regress_condexp(values, state, basis_degree):
    """Least-squares fit of ``values`` on Hermite polynomials of the standardized state.

    Rank-deficient or ill-conditioned designs fall back to lower degrees; the
    returned ``Regression`` records the degree actually used.
    """
    values = np.asarray(values)
    state = np.asarray(state, dtype=float)
    M = state.shape[0]
    if M <= basis_degree + 1:
        raise ValueError(f"need more than {basis_degree + 1} paths for degree {basis_degree}")
    center = float(state.mean())
    scale = float(state.std())
    degree = basis_degree if scale > 1e-14 * max(1.0, abs(center)) else 0
    scale = scale if degree > 0 else 1.0
    while True:
        X = _features(state, center, scale, degree)
        G, R = _gram(X, values)
        ev = np.linalg.eigvalsh(G)
        cond = float(ev[-1] / ev[0]) if ev[0] > 0 else np.inf
        if cond < COND_LIMIT or degree == 0:
            break
        degree -= 1
    coef = np.linalg.solve(G, R.reshape(G.shape[0], -1)).reshape(R.shape)
    fitted = np.tensordot(X, coef, axes=(1, 0))
    support = (float(state.min()), float(state.max()))
    return Regression(coef, center, scale, degree, basis_degree, cond, fitted, support)


# ---------------------------------------------------------------------------
# terminal data


def psi_one(w):
    return np.ones_like(np.asarray(w, dtype=float))


def psi_tanh(amplitude=0.5):
    def psi(w):
        return 1.0 + amplitude * np.tanh(w)

    psi.bound = 1.0 + abs(amplitude)
    psi.constant = amplitude == 0
    return psi


psi_one.bound = 1.0
psi_one.constant = True


@dataclass(frozen=True)
class TerminalCondition:
    """xi = psi(W_T) * base, psi bounded."""

    base: VelocityField
    psi: Callable = psi_one

    @property
    def deterministic(self):
        return bool(getattr(self.psi, "constant", False))

    @property
    def psi_bound(self):
        return float(getattr(self.psi, "bound", np.inf))

    def sup_norm(self, kind="H"):
        return self.psi_bound * float(norm(self.base, kind))

    def __call__(self, W_T):
        return self.base * self.psi(np.asarray(W_T, dtype=float))


# ---------------------------------------------------------------------------
# configuration and solution


@dataclass(frozen=True)
class SolverConfig:
    nu: float = 0.1
    K: int = 2
    period: float = 2.0 * np.pi
    T: float = 1.0
    L: int = 32
    M: int = 1000
    basis_degree: int = 4
    picard_iters: int = 3
    picard_tol: float = 1e-10
    lambda_bar: float = math.sqrt(2.0)
    truncation: TruncationSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.nu <= 0 or self.picard_tol <= 0 or self.picard_iters < 1:
            raise ValueError("need nu > 0, picard_tol > 0, picard_iters >= 1")
        if self.M < self.basis_degree + 2:
            raise ValueError("M must be at least basis_degree + 2")

    @property
    def grid(self):
        return TimeGrid(self.T, self.L)

    @property
    def modes(self):
        return ModeSet.box(self.K, self.period)


@dataclass(eq=False)
class BsdeSolution:
    """Solution as per-node fitted functions plus per-path scalar summaries.

    ``summary`` arrays have shape ``(L + 1, M)`` (node L holds the terminal
    values; Z-related rows at node L are zero).  ``pathwise`` rows hold the
    statistics behind the Monte Carlo standard errors.
    """

    config: SolverConfig
    modes: ModeSet
    grid: TimeGrid
    ensemble: BrownianEnsemble
    terminal: TerminalCondition
    model: ForcingModel
    sigma: SigmaVector
    driver: Callable
    y_reg: list
    z_reg: list
    summary: dict
    diagnostics: dict
    u0: VelocityField
    pathwise: dict

    def fields(self, i, ensemble=None):
        """(u_i, Z_i) on every path of ``ensemble`` (default: the solving ensemble).

        Z_L is returned as zeros.
        """
        ens = self.ensemble if ensemble is None else ensemble
        if ens.grid != self.grid:
            raise ValueError("ensemble grid does not match the solution grid")
        w = ens.W[:, i]
        if i == self.grid.L:
            return self.terminal(w), VelocityField.zeros(self.modes, (ens.M,))
        Y = VelocityField(self.modes, self.y_reg[i](w))
        Z = leray_project(VelocityField(self.modes, self.z_reg[i](w)))
        u, _ = _picard(self.driver, self.grid.nodes[i], Y, Z, self.grid.dt, self.config)
        return u, Z

    def node_stats(self, name):
        return self.summary[name]


def _picard(driver, t, Y, Z, dt, config):
    """Solve u = Y + dt * driver(t, u, Z) with the -nu A part inverted exactly."""
    nu = config.nu
    lam = Y.modes.eigenvalues[:, None]
    inv = 1.0 / (1.0 + dt * nu * lam)
    u = VelocityField(Y.modes, Y.coeffs * inv)
    increments = []
    for _ in range(config.picard_iters):
        g = driver(t, u, Z)
        rhs = Y.coeffs + dt * (g.coeffs + nu * lam * u.coeffs)
        new = VelocityField(Y.modes, rhs * inv)
        inc = float(np.max(norm(new - u))) if u.coeffs.size else 0.0
        increments.append(inc)
        u = new
        if inc < config.picard_tol:
            break
        if len(increments) >= 3 and increments[-1] > increments[-2] > increments[-3]:
            ratio = increments[-1] / max(increments[-2], 1e-300)
            raise NumericalFailure(
                f"Picard iteration not contracting at t={t:.4g}: increments {increments}, "
                f"dt * local Lipschitz estimate ~ {ratio:.3g}")
    return leray_project(u), increments


def backward_step(u_next, ensemble, i, driver, config):
    """One backward node: returns ``(u_i, Z_i, info)`` on every path."""
    grid = ensemble.grid
    dt = grid.dt
    w = ensemble.W[:, i]
    dW = ensemble.increments[:, i]
    y_reg = regress_condexp(u_next.coeffs, w, config.basis_degree)
    resid = u_next.coeffs - y_reg.fitted
    z_reg = regress_condexp(resid * (dW / dt)[:, None, None], w, config.basis_degree)
    Y = VelocityField(u_next.modes, y_reg.fitted)
    Z = leray_project(VelocityField(u_next.modes, z_reg.fitted))
    u, incs = _picard(driver, grid.nodes[i], Y, Z, dt, config)
    info = {"y_reg": y_reg, "z_reg": z_reg, "picard": incs, "resid": resid}
    return u, Z, info


def apriori_constants(model, nu, lambda_bar, sigma, T):
    """Explicit constants of the energy chain for the shipped model bundle.

    Returns ``lam`` (margin), ``kappa = (lb^2 - 1) / (4 lb^2)``, the coercivity
    constant ``C`` and the resulting constants of the two a priori bounds.
    """
    lam = superparabolicity_margin(nu, lambda_bar, sigma, T)
    lb2 = lambda_bar**2
    kappa = (lb2 - 1.0) / (4.0 * lb2)
    b = model.bundle
    eps = (lb2 - 1.0) / (8.0 * lb2)
    C = 2.0 * b.varrho(eps) + b.beta**2 / lam
    m = min(lam, kappa)
    growth = math.exp(C * T)
    C_L2 = 2.0 * (growth + (1.0 + C * T * growth) / m)
    kappa_v = (lb2 - 1.0) / (2.0 * lb2)
    lam1 = (2.0 * math.pi / model.period) ** 2
    rho1 = b.rho1(None)
    C_V = (1.0 + rho1 / lam * (1.0 + b.beta * C_L2 * max(1.0, 1.0 / lam1))) * (1.0 + 1.0 / min(lam, kappa_v))
    return {"lam": lam, "lambda_bar": lambda_bar, "kappa": kappa, "eps": eps, "C": C,
            "C_L2": C_L2, "C_V": C_V, "beta": b.beta, "rho1": rho1}


def apriori_state_bound(model, nu, lambda_bar, sigma, terminal, T):
    """Pathwise bound on sup_t |u(t)| from the energy chain and stochastic Gronwall."""
    c = apriori_constants(model, nu, lambda_bar, sigma, T)
    g1 = model.bundle.g_l1(T)
    xi2 = terminal.sup_norm("H") ** 2
    return math.sqrt(math.exp(c["C"] * T) * (xi2 + 2.0 * g1))


def make_driver(config, model, sigma, modes=None, validate=True):
    modes = modes or config.modes
    if config.truncation is None:
        return raw_driver(model, config.nu, sigma, modes)
    return assemble_truncated_driver(config.truncation, model, config.nu, sigma, modes,
                                     T=config.T, validate=validate)


_SUMMARY = ("u_h2", "u_v2", "u_a2", "z_h2", "z_v2", "zu", "phi_u")


def solve_bsnse(config, model, sigma, terminal, ensemble=None, driver=None, workers=None):
    """Solve the Galerkin backward system on ``config.modes`` backwards from T.

    ``workers`` sets the grid-evaluation thread count; results do not depend on it.
    """
    lam = superparabolicity_margin(config.nu, config.lambda_bar, sigma, config.T)
    if lam <= 0:
        raise AdmissibilityError(f"super-parabolicity margin {lam:.6g} is not positive")
    modes = config.modes
    if terminal.base.modes != modes:
        terminal = TerminalCondition(terminal.base.embed(modes), terminal.psi)
    bound = None
    if config.truncation is not None:
        bound = apriori_state_bound(model, config.nu, config.lambda_bar, sigma, terminal, config.T)
        if config.truncation.M <= bound:
            raise TruncationRadiusError(
                f"truncation radius M={config.truncation.M} does not exceed the a priori bound {bound:.6g}")
    grid = config.grid
    if ensemble is None:
        ensemble = generate_brownian(config.seed, config.M, grid)
    elif ensemble.grid != grid or ensemble.M != config.M:
        raise ValueError("ensemble does not match config")
    if driver is None:
        driver = make_driver(config, model, sigma, modes)

    with worker_pool(workers):
        return _solve(config, model, sigma, terminal, ensemble, driver, modes, grid, lam, bound)


def _sq_norms(u, weights):
    """Squared norms of ``u`` for each row of ``weights`` (per-mode), shape ``(..., rows)``."""
    e = (u.coeffs.real**2 + u.coeffs.imag**2).sum(-1)
    return (2.0 * u.modes.area) * (e @ weights.T)


def _sandwich(X, r2):
    """Mean squared error of a least-squares fit at fresh design points, tr(G^-1 S) / M,
    with G = X^T X and S = sum_m x_m x_m^T r2_m (heteroscedasticity-robust)."""
    G = X.T @ X
    S = (X * r2[:, None]).T @ X
    return float(np.trace(np.linalg.solve(G, S)) / X.shape[0])


def _record(summary, i, u, Z, phi, weights):
    s = _sq_norms(u, weights)
    summary["u_h2"][i], summary["u_v2"][i], summary["u_a2"][i] = s[:, 0], s[:, 1], s[:, 2]
    if Z is not None:
        s = _sq_norms(Z, weights[:2])
        summary["z_h2"][i], summary["z_v2"][i] = s[:, 0], s[:, 1]
        summary["zu"][i] = inner(Z, u)
        summary["phi_u"][i] = inner(phi, u)


def _solve(config, model, sigma, terminal, ensemble, driver, modes, grid, lam, bound):
    L, M, dt = grid.L, ensemble.M, grid.dt
    lam_k = modes.eigenvalues
    weights = np.stack([np.ones_like(lam_k), lam_k, lam_k**2])
    summary = {k: np.zeros((L + 1, M)) for k in _SUMMARY}
    # mean squared deviation of the pathwise estimators from the fitted values
    pathwise = {k: np.zeros(L + 1) for k in ("var_u_h", "var_u_v", "se2_u_h", "se2_u_v",
                                              "se2_z_one", "se2_z_multi")}
    y_reg, z_reg = [None] * L, [None] * L
    diag = {"degree": np.zeros(L, int), "cond_y": np.zeros(L), "cond_z": np.zeros(L),
            "picard_iters": np.zeros(L, int), "picard_last_increment": np.zeros(L),
            "max_divergence": 0.0, "margin": lam, "apriori_bound": bound}

    u = terminal(ensemble.W[:, L])
    _record(summary, L, u, None, None, weights)
    D = u.coeffs.copy()  # xi + sum_{j >= i} dt Phi_j along each path
    for i in range(L - 1, -1, -1):
        u_next = u
        u, Z, info = backward_step(u_next, ensemble, i, driver, config)
        # driver value implied by the scheme, u_i = E_i u_{i+1} + dt Phi_i
        phi = VelocityField(modes, (u.coeffs - info["y_reg"].fitted) / dt)
        _record(summary, i, u, Z, phi, weights)
        y_reg[i], z_reg[i] = info["y_reg"], info["z_reg"]
        diag["degree"][i] = info["y_reg"].degree
        diag["cond_y"][i] = info["y_reg"].cond
        diag["cond_z"][i] = info["z_reg"].cond
        diag["picard_iters"][i] = len(info["picard"])
        diag["picard_last_increment"][i] = info["picard"][-1]
        scale = (ensemble.increments[:, i] / dt)[:, None, None]
        z_one = VelocityField(modes, info["resid"] * scale) - Z
        z_multi = VelocityField(modes, (D - info["y_reg"].fitted) * scale) - Z
        D += dt * phi.coeffs
        dev = VelocityField(modes, D) - u
        X = info["y_reg"].features(ensemble.W[:, i])
        r_u = _sq_norms(dev, weights[:2])
        pathwise["var_u_h"][i], pathwise["var_u_v"][i] = r_u.mean(axis=0)
        pathwise["se2_u_h"][i] = _sandwich(X, r_u[:, 0])
        pathwise["se2_u_v"][i] = _sandwich(X, r_u[:, 1])
        pathwise["se2_z_one"][i] = _sandwich(X, _sq_norms(z_one, weights[:1])[:, 0])
        pathwise["se2_z_multi"][i] = _sandwich(X, _sq_norms(z_multi, weights[:1])[:, 0])
        div = float(np.abs(u.divergence()).max())
        diag["max_divergence"] = max(diag["max_divergence"], div)
        if not np.all(np.isfinite(u.coeffs)):
            raise NumericalFailure(f"non-finite solution at node {i}")
    return BsdeSolution(config, modes, grid, ensemble, terminal, model, sigma, driver,
                        y_reg, z_reg, summary, diag, u[0], pathwise)


# ---------------------------------------------------------------------------
# reference values and norms


def linear_mode_oracle(nu, lambda_k, kappa_k, f_k, psi, T, t_eval=0.0, c_k=1.0, w=0.0,
                       a1=0.0, a2=0.0, nodes=128):
    """Value at ``t_eval`` (with ``W_t = w``) of the scalar linear BSDE

        -dy = (-(nu lambda_k - a1) y + (i kappa_k + a2) z + f_k(t)) dt - z dW,
        y_T = psi(W_T) c_k.

    Measure change removes the z term: y_t = e^{-r tau} c_k E[psi(w + sqrt(tau) G)
    exp(theta sqrt(tau) G - theta^2 tau / 2)] + int_t^T e^{-r(s-t)} f_k(s) ds with
    r = nu lambda_k - a1, theta = i kappa_k + a2 and tau = T - t.  The Gaussian
    expectation uses Gauss-Hermite quadrature, the time integral Gauss-Legendre.
    """
    r = nu * lambda_k - a1
    theta = 1j * kappa_k + a2
    tau = T - t_eval
    x, wts = hermite_e.hermegauss(nodes)
    wts = wts / math.sqrt(2.0 * math.pi)
    g = np.sqrt(tau) * x
    expect = np.sum(wts * psi(w + g) * np.exp(theta * g - theta**2 * tau / 2.0))
    y = math.exp(-r * tau) * c_k * expect
    if f_k is not None and tau > 0:
        s, sw = np.polynomial.legendre.leggauss(nodes)
        s = t_eval + (s + 1.0) * tau / 2.0
        vals = np.array([f_k(si) for si in s], dtype=complex)
        y = y + np.sum(sw * tau / 2.0 * np.exp(-r * (s - t_eval)) * vals)
    return complex(y)


def single_shell(*fields):
    """True if all nonzero modes of the fields share one |k|^2, where B vanishes identically."""
    shells = set()
    for f in fields:
        if f is None:
            continue
        nz = np.any(f.coeffs != 0, axis=-1)
        shells |= set(f.modes.eigenvalues[nz].tolist())
    return len(shells) <= 1


def linear_oracle_table(sol, nodes=128):
    """Rows ``(kx, ky, comp, solver, oracle, rel_err)`` comparing u(0) with the per-mode oracle.

    Needs linear forcing, a time-constant sigma direction and single-shell data.
    """
    model, sigma = sol.model, sol.sigma
    if model.kind != "linear":
        raise ValueError("linear oracle needs linear forcing")
    if sigma.profile is not None:
        raise ValueError("linear oracle needs a time-constant sigma")
    a0 = model.a0_field.embed(sol.modes) if model.a0_field is not None else None
    if not single_shell(sol.terminal.base, a0):
        raise ValueError("terminal data and a0 must lie on one shell |k|^2 = const")
    s = np.asarray(sigma.base, dtype=float)
    rows = []
    for i in range(sol.modes.size):
        kappa = float(sol.modes.q[i] @ s)
        for comp in range(2):
            c = sol.terminal.base.coeffs[i, comp]
            f = a0.coeffs[i, comp] if a0 is not None else 0.0
            if c == 0 and f == 0:
                continue
            fk = None if f == 0 else (lambda t, f=f: model._profile(t) * f)
            ref = linear_mode_oracle(sol.config.nu, sol.modes.eigenvalues[i], kappa, fk, sol.terminal.psi,
                                     sol.grid.T, c_k=c, a1=model.a1, a2=model.a2, nodes=nodes)
            val = complex(sol.u0.coeffs[i, comp])
            rows.append((int(sol.modes.kx[i]), int(sol.modes.ky[i]), comp, val, ref,
                         abs(val - ref) / max(abs(ref), 1e-300)))
    return rows


def mnorm_from_fields(u, Z, grid):
    """Empirical M-norm from per-path fields ``u`` (L+1 nodes) and ``Z`` (L nodes).

    ``u`` and ``Z`` are VelocityFields with batch shape (nodes, M).
    """
    sup = np.max(norm(u) ** 2, axis=0)
    iv = np.sum(norm(u[:-1], "V") ** 2, axis=0) * grid.dt
    iz = np.sum(norm(Z) ** 2, axis=0) * grid.dt
    return float(np.sqrt(np.mean(sup) + np.mean(iv) + np.mean(iz)))


def mnorm(sol):
    """(E sup_t |u|^2 + E int |u|_V^2 + E int |Z|^2)^(1/2) with grid sums and path averages."""
    s = sol.summary
    dt = sol.grid.dt
    sup = s["u_h2"].max(axis=0)
    iv = s["u_v2"][:-1].sum(axis=0) * dt
    iz = s["z_h2"][:-1].sum(axis=0) * dt
    return float(np.sqrt(sup.mean() + iv.mean() + iz.mean()))


def iter_paired(solA, solB, ensemble=None):
    """Yield ``(i, uA, ZA, uB, ZB)`` on a shared ensemble, both embedded in the larger mode set."""
    ens = solA.ensemble if ensemble is None else ensemble
    target = solA.modes if solA.modes.contains(solB.modes) else solB.modes
    if not target.contains(solA.modes) or not target.contains(solB.modes):
        raise ValueError("mode sets are not nested")
    for i in range(solA.grid.L, -1, -1):
        uA, ZA = solA.fields(i, ens)
        uB, ZB = solB.fields(i, ens)
        if uA.modes != target:
            uA, ZA = uA.embed(target), ZA.embed(target)
        if uB.modes != target:
            uB, ZB = uB.embed(target), ZB.embed(target)
        yield i, uA, ZA, uB, ZB


def mdistance(solA, solB, ensemble=None):
    """Empirical M-norm of the difference of two solutions along one ensemble."""
    if solA.grid != solB.grid:
        raise ValueError("time grids differ")
    ens = solA.ensemble if ensemble is None else ensemble
    dt = solA.grid.dt
    sup = np.zeros(ens.M)
    iv = np.zeros(ens.M)
    iz = np.zeros(ens.M)
    for i, uA, ZA, uB, ZB in iter_paired(solA, solB, ens):
        du = uA - uB
        sup = np.maximum(sup, norm(du) ** 2)
        if i < solA.grid.L:
            iv += norm(du, "V") ** 2 * dt
            iz += norm(ZA - ZB) ** 2 * dt
    return float(np.sqrt(sup.mean() + iv.mean() + iz.mean()))


def u0_standard_error(sol):
    """Monte Carlo standard error (H norm) of the deterministic value u(0)."""
    return math.sqrt(sol.pathwise["var_u_h"][0] / sol.ensemble.M)

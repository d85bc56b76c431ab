"""Forward Galerkin Navier-Stokes integrator, used as an oracle for the backward solver.

With deterministic data the backward problem  -du = Phi(t, u, 0) dt, u(T) = xi
is an ordinary differential equation backwards in time.  Setting
v(s) = -u(T - s) turns it into the forward system

    dv/ds = -nu A v - B(v) - f~(s, v),   v(0) = -xi,   f~(s, v) = f(T - s, -v, 0),

(B is even, B(-v) = B(v)), which is integrated here with classical RK4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import NumericalFailure, TimeGrid
from .forcing import forcing_eval
from .spectral import VelocityField, leray_project, nonlinear_B, norm, stokes_apply


@dataclass(frozen=True, eq=False)
class ForwardRun:
    u0: VelocityField
    f_schedule: Callable | None
    nu: float
    grid: TimeGrid
    trajectory: VelocityField  # batch shape (L + 1,)
    substeps: int = 1

    def at(self, i):
        return self.trajectory[i]

    def energy_residual(self):
        """Per-step mismatch of |u|^2 change against -2 nu int |u|_V^2 (trapezoid); zero forcing only."""
        e = norm(self.trajectory) ** 2
        v = norm(self.trajectory, "V") ** 2
        dt = self.grid.dt
        return (e[1:] - e[:-1]) + self.nu * dt * (v[1:] + v[:-1])


def forward_rhs(t, u, nu, f_schedule):
    out = -nu * stokes_apply(u).coeffs - nonlinear_B(u).coeffs
    if f_schedule is not None:
        out = out - f_schedule(t, u).coeffs
    return leray_project(VelocityField(u.modes, out))


def forward_solve(u0, f_schedule, nu, grid, substeps=1, blowup=1e6):
    """RK4 on du/dt = -nu A u - B(u) - P f~(t, u); stores the state at every grid node.

    ``f_schedule(t, u)`` returns a field (or ``None`` for no forcing).  Aborts if
    |u|_V exceeds ``blowup`` times its initial value.
    """
    div = np.abs(u0.divergence()).max()
    if div > 1e-12 * max(1.0, np.abs(u0.coeffs).max() * u0.modes.q.max()):
        raise ValueError("initial state is not divergence-free")
    h = grid.dt / substeps
    u = u0
    v0 = max(float(norm(u0, "V")), 1e-300)
    traj = np.empty((grid.L + 1,) + u0.coeffs.shape, dtype=complex)
    traj[0] = u0.coeffs
    t = 0.0
    for i in range(grid.L):
        for k in range(substeps):
            t = grid.nodes[i] + k * h
            k1 = forward_rhs(t, u, nu, f_schedule)
            k2 = forward_rhs(t + h / 2, u + k1 * (h / 2), nu, f_schedule)
            k3 = forward_rhs(t + h / 2, u + k2 * (h / 2), nu, f_schedule)
            k4 = forward_rhs(t + h, u + k3 * h, nu, f_schedule)
            u = u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
        vn = float(norm(u, "V"))
        if not np.isfinite(vn) or vn > blowup * v0:
            raise NumericalFailure(f"forward blow-up at t={grid.nodes[i + 1]:.4g}: |u|_V = {vn:.3g}")
        traj[i + 1] = u.coeffs
    return ForwardRun(u0, f_schedule, nu, grid, VelocityField(u0.modes, traj), substeps)


def reversed_forcing(model, T):
    """f~(s, v) = f(T - s, -v, 0) as a forward forcing schedule (``None`` for zero forcing)."""
    if model.kind == "zero":
        return None

    def f_tilde(s, v):
        return forcing_eval(model, T - s, -v, VelocityField.zeros(v.modes, v.batch_shape))

    return f_tilde


def reversal_run(sol, substeps=4):
    """Forward oracle run matched to a deterministic-data backward solution."""
    _check_deterministic(sol)
    xi = sol.terminal.base * float(sol.terminal.psi(0.0))
    return forward_solve(-xi, reversed_forcing(sol.model, sol.grid.T), sol.config.nu,
                         sol.grid, substeps=substeps)


def _check_deterministic(sol):
    if not sol.terminal.deterministic:
        raise ValueError("reversal oracle needs a deterministic terminal condition")
    if not sol.sigma.is_zero:
        raise ValueError("reversal oracle needs sigma = 0")


def reversal_residual(backward_sol, forward_run):
    """max over nodes of |u_b(t_i) + u_f(T - t_i)| / |xi|  (0 when xi = 0)."""
    _check_deterministic(backward_sol)
    grid = backward_sol.grid
    fgrid = forward_run.grid
    if abs(fgrid.T - grid.T) > 1e-12 * grid.T or fgrid.L % grid.L:
        raise ValueError("forward grid must refine the backward grid over the same horizon")
    m = fgrid.L // grid.L
    one = backward_sol.ensemble.subset([0])
    xi_norm = float(norm(backward_sol.terminal.base)) * abs(float(backward_sol.terminal.psi(0.0)))
    worst = 0.0
    for i in range(grid.L + 1):
        ub = backward_sol.fields(i, one)[0][0]
        uf = forward_run.at(m * (grid.L - i))
        if uf.modes != ub.modes:
            uf = uf.embed(ub.modes)
        worst = max(worst, float(norm(ub + uf)))
    if xi_norm == 0.0:
        return 0.0
    return worst / xi_norm

import math
from pathlib import Path

import numpy as np
import pytest

from bsnse.config import build_problem, load_config
from bsnse.engine import NumericalFailure, TerminalCondition, TimeGrid, psi_tanh, solve_bsnse
from bsnse.forcing import ForcingModel
from bsnse.forward import forward_solve, reversal_residual, reversal_run, reversed_forcing
from bsnse.spectral import ModeSet, SigmaVector, VelocityField, norm, random_field, taylor_green

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def test_single_mode_decay():
    """A single Fourier mode is a shear flow, B vanishes and u(t) = e^{-nu lambda t} u0."""
    m = ModeSet.box(3)
    u0 = VelocityField.from_modes(m, {(2, 1): (0.5 - 1.0j, -1.0 + 2.0j)})
    grid = TimeGrid(1.0, 256)
    run = forward_solve(u0, None, 0.3, grid)
    for i in (64, 128, 256):
        expect = u0 * math.exp(-0.3 * 5.0 * grid.nodes[i])
        assert float(norm(run.at(i) - expect)) <= 1e-8 * float(norm(u0))


def test_taylor_green_decay():
    m = ModeSet.box(3)
    u0 = taylor_green(m, 1.5)
    grid = TimeGrid(2.0, 256)
    run = forward_solve(u0, None, 0.2, grid)
    expect = u0 * math.exp(-2.0 * 0.2 * 2.0)
    assert float(norm(run.at(256) - expect)) <= 1e-8 * float(norm(u0))


def test_energy_identity_rk4_order(rng):
    m = ModeSet.box(4)
    u0 = random_field(m, rng, decay=1.0)
    res = []
    for L in (32, 64, 128):
        run = forward_solve(u0, None, 0.1, TimeGrid(1.0, L))
        res.append(np.abs(run.energy_residual()).sum())
    # trapezoid quadrature of the dissipation dominates, so the residual halves twice per refinement
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.15) and res[1] / res[2] == pytest.approx(4.0, rel=0.15)


def test_energy_nonincreasing_and_divergence_free(rng):
    m = ModeSet.box(4)
    u0 = random_field(m, rng, decay=0.5) * 3.0
    run = forward_solve(u0, None, 0.05, TimeGrid(1.0, 64))
    e = norm(run.trajectory) ** 2
    assert np.all(np.diff(e) <= 1e-14 * e[0])
    assert np.abs(run.trajectory.divergence()).max() <= 1e-12


def test_rejects_divergent_initial_state():
    m = ModeSet.box(2)
    bad = VelocityField.from_modes(m, {(1, 0): (1.0, 0.0)})
    with pytest.raises(ValueError):
        forward_solve(bad, None, 0.1, TimeGrid(1.0, 4))


def test_blowup_is_reported(rng):
    m = ModeSet.box(2)
    u0 = random_field(m, rng)
    grow = lambda t, u: u * (-50.0)  # noqa: E731  (forcing enters with a minus sign)
    with pytest.raises(NumericalFailure):
        forward_solve(u0, grow, 0.1, TimeGrid(1.0, 4))


def test_reversed_forcing_zero_model():
    assert reversed_forcing(ForcingModel("zero"), 1.0) is None


def _reversal_problem(L):
    cfg = load_config(CONFIGS / "reversal.cfg")
    cfg.update({"solver.L": L, "solver.M": 8, "solver.K": 3})
    return build_problem(cfg)


def test_reversal_zero_terminal_gives_zero():
    sc, model, sigma, term = _reversal_problem(8)
    term = TerminalCondition(VelocityField.zeros(sc.modes))
    sol = solve_bsnse(sc, ForcingModel("zero"), sigma, term)
    assert reversal_residual(sol, reversal_run(sol)) == 0.0


def test_reversal_needs_deterministic_data():
    sc, model, sigma, term = _reversal_problem(8)
    sol = solve_bsnse(sc, model, sigma, TerminalCondition(term.base, psi_tanh(0.5)))
    with pytest.raises(ValueError):
        reversal_run(sol)
    sol = solve_bsnse(sc, model, SigmaVector((0.1, 0.0)), term)
    with pytest.raises(ValueError):
        reversal_run(sol)


def test_reversal_residual_decreases_first_order():
    res = []
    for L in (16, 32, 64):
        sc, model, sigma, term = _reversal_problem(L)
        sol = solve_bsnse(sc, model, sigma, term)
        res.append(reversal_residual(sol, reversal_run(sol)))
    assert res[0] > res[1] > res[2]
    assert math.log2(res[1] / res[2]) >= 0.8

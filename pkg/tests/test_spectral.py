import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsnse.spectral import (ModeSet, SigmaVector, VelocityField, apply_J, convection, gradient_field,
                            grid_energy, inner, leray_project, nonlinear_B, norm, random_field,
                            stokes_apply, taylor_green, trilinear_b, worker_pool)

from conftest import direct_convection, direct_trilinear, full_coeffs

seeds = st.integers(0, 2**32 - 1)
decays = st.floats(0.0, 2.5)
FAST = settings(max_examples=30, deadline=None)


def field(modes, seed, decay=1.0, batch=()):
    return random_field(modes, np.random.default_rng(seed), batch=batch, decay=decay)


# ---------------------------------------------------------------------------
# mode sets


def test_box_counts_and_representatives():
    m = ModeSet.box(3)
    assert m.size == ((2 * 3 + 1) ** 2 - 1) // 2
    assert m.dim == 2 * m.size
    assert np.all((m.ky > 0) | ((m.ky == 0) & (m.kx > 0)))
    full = m.modes
    assert {tuple(k) for k in full} == {(-a, -b) for a, b in full}


def test_modes_sorted_by_shell():
    m = ModeSet.box(4)
    k2 = m.modes[:, 0] ** 2 + m.modes[:, 1] ** 2
    assert np.all(np.diff(k2) >= 0)


def test_leading_first_shells():
    m = ModeSet.leading(8)
    assert sorted(m.k2.tolist()) == [1, 1, 2, 2]


def test_rejects_non_representative():
    with pytest.raises(ValueError):
        ModeSet([0], [-1])
    with pytest.raises(ValueError):
        ModeSet([1, 1], [0, 0])


def test_period_scales_eigenvalues():
    m = ModeSet.box(2, period=np.pi)
    assert np.allclose(m.eigenvalues, 4.0 * m.k2)


# ---------------------------------------------------------------------------
# Leray projection


def test_projection_hand_value():
    m = ModeSet.box(1)
    u = VelocityField.from_modes(m, {(1, 0): (1.0, 1.0)})
    p = leray_project(u)
    i, _ = m.index_of(1, 0)
    assert np.allclose(p.coeffs[i], [0.0, 1.0])


@given(seeds)
@FAST
def test_projection_matches_dense_matrix(seed):
    m = ModeSet.box(3)
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((m.size, 2)) + 1j * rng.standard_normal((m.size, 2))
    p = leray_project(VelocityField(m, c)).coeffs
    for j in range(m.size):
        k = m.q[j]
        P = np.eye(2) - np.outer(k, k) / (k @ k)
        assert np.allclose(p[j], P @ c[j], atol=1e-14)


@given(seeds)
@FAST
def test_projection_kills_gradients(seed):
    m = ModeSet.box(3)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)
    g = gradient_field(m, q)
    assert np.abs(leray_project(g).coeffs).max() < 1e-13 * np.abs(g.coeffs).max()


@given(seeds, decays)
@FAST
def test_projection_idempotent_and_divergence_free(seed, decay):
    m = ModeSet.box(4)
    rng = np.random.default_rng(seed)
    raw = VelocityField(m, rng.standard_normal((m.size, 2)) + 1j * rng.standard_normal((m.size, 2)))
    p = leray_project(raw)
    assert np.abs(p.divergence()).max() < 1e-13 * np.abs(raw.coeffs).max() * m.q.max()
    assert np.allclose(leray_project(p).coeffs, p.coeffs, atol=1e-15)
    u = field(m, seed, decay)
    assert np.allclose(leray_project(u).coeffs, u.coeffs, atol=1e-15)


# ---------------------------------------------------------------------------
# Stokes operator and norms


def test_stokes_hand_values():
    m = ModeSet.box(4)
    u = VelocityField.from_modes(m, {(1, 0): (0.0, 1.0), (3, 4): (4.0, -3.0)})
    a = stokes_apply(u)
    assert np.allclose(a.coeffs[m.index_of(1, 0)[0]], [0.0, 1.0])
    assert np.allclose(a.coeffs[m.index_of(3, 4)[0]], [100.0, -75.0])
    z = VelocityField.zeros(m)
    assert not np.any(stokes_apply(z).coeffs)


def test_single_pair_norms():
    m = ModeSet.box(1)
    u = VelocityField.from_modes(m, {(1, 0): (0.0, 0.5)})
    assert norm(u) == pytest.approx(2.0 * np.pi / math.sqrt(2.0), rel=1e-15)
    assert norm(u, "V") == pytest.approx(float(norm(u)), rel=1e-15)
    # grid quadrature of |u|^2 = cos^2 x on the torus gives 2 pi^2
    assert grid_energy(u) == pytest.approx(2.0 * np.pi**2, rel=1e-14)


@given(seeds, decays)
@FAST
def test_parseval(seed, decay):
    m = ModeSet.box(4)
    u = field(m, seed, decay)
    assert grid_energy(u) == pytest.approx(float(norm(u)) ** 2, rel=1e-12)
    assert inner(u, u) == pytest.approx(float(norm(u)) ** 2, rel=1e-13)


@given(seeds, decays)
@FAST
def test_norm_ordering_and_ladyzhenskaya(seed, decay):
    m = ModeSet.box(4)
    u = field(m, seed, decay)
    h, v, a = norm(u), norm(u, "V"), norm(u, "DA")
    assert h <= v * (1 + 1e-14) and v <= a * (1 + 1e-14)  # lambda_1 = 1 at a = 2 pi
    assert v**2 <= h * a * (1 + 1e-13)
    assert norm(u, "L4") <= 2**0.25 * np.sqrt(h * v) * (1 + 1e-12)


def test_l4_of_single_mode():
    # u = (0, cos x): int cos^4 = (3/8) |G|
    m = ModeSet.box(1)
    u = VelocityField.from_modes(m, {(1, 0): (0.0, 0.5)})
    assert norm(u, "L4") == pytest.approx((3.0 / 8.0 * 4.0 * np.pi**2) ** 0.25, rel=1e-14)


def test_norm_rejects_kind():
    with pytest.raises(ValueError):
        norm(VelocityField.zeros(ModeSet.box(1)), "W")


# ---------------------------------------------------------------------------
# trilinear form and convection


def test_trilinear_matches_direct_sum(box5, rng):
    for _ in range(3):
        u, v, w = (random_field(box5, rng) for _ in range(3))
        ref = direct_trilinear(u, v, w)
        assert trilinear_b(u, v, w) == pytest.approx(ref, rel=1e-10, abs=1e-10 * abs(ref) + 1e-12)


@given(seeds, decays)
@FAST
def test_trilinear_identities(seed, decay):
    m = ModeSet.box(4)
    u, v, w = field(m, seed, decay, (3,))
    scale = float(norm(u, "V") * norm(v, "V") * norm(w, "V"))
    assert abs(trilinear_b(u, v, v)) <= 1e-12 * scale
    assert abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) <= 1e-12 * scale
    assert abs(trilinear_b(u, v, w) - inner(convection(u, v), w)) <= 1e-12 * scale


def test_convection_matches_direct(box3, rng):
    u, v = random_field(box3, rng), random_field(box3, rng)
    ref = leray_project(direct_convection(u, v, box3))
    assert np.allclose(convection(u, v).coeffs, ref.coeffs, atol=1e-12)
    big = ModeSet.box(6)
    full = leray_project(direct_convection(u, v, big))
    assert np.allclose(convection(u, v, truncate=False).coeffs, full.coeffs, atol=1e-12)


@given(seeds, decays)
@FAST
def test_rotational_form_equals_convection(seed, decay):
    m = ModeSet.box(4)
    u = field(m, seed, decay, (2,))
    assert np.allclose(nonlinear_B(u).coeffs, convection(u, u).coeffs, atol=1e-12 * float(norm(u).max()) ** 2)


def test_taylor_green_steady(box3):
    tg = taylor_green(box3)
    assert norm(nonlinear_B(tg)) < 1e-14
    ref = leray_project(direct_convection(tg, tg, ModeSet.box(6)))
    assert np.abs(ref.coeffs).max() < 1e-15
    # physical values
    g = tg.to_grid(8)
    x = 2 * np.pi * np.arange(8) / 8
    X, Y = np.meshgrid(x, x, indexing="ij")
    assert np.allclose(g[0], np.sin(X) * np.cos(Y), atol=1e-14)
    assert np.allclose(g[1], -np.cos(X) * np.sin(Y), atol=1e-14)


def test_single_mode_B_vanishes(box3, rng):
    u = VelocityField.from_modes(box3, {(2, 1): (1.0 + 0.5j, -2.0 - 1.0j)})
    assert np.abs(u.divergence()).max() < 1e-15
    assert np.abs(nonlinear_B(u).coeffs).max() < 1e-14


@given(seeds)
@FAST
def test_B_energy_cancellation(seed):
    m = ModeSet.box(3)
    rng = np.random.default_rng(seed)
    u = VelocityField.from_modes(m, {(1, 2): tuple(rng.standard_normal(2)), (2, -1): tuple(rng.standard_normal(2))})
    u = leray_project(u)
    assert abs(inner(nonlinear_B(u), u)) <= 1e-12 * float(norm(u)) ** 3


def test_untruncated_enstrophy_identity(box3, rng):
    v = random_field(box3, rng)
    P = convection(v, v, truncate=False)
    lap = VelocityField(P.modes, -v.embed(P.modes).coeffs * P.modes.eigenvalues[:, None])
    assert abs(inner(P, lap)) <= 1e-10 * float(norm(P) * norm(lap))


def test_worker_count_does_not_change_results(rng):
    m = ModeSet.box(3)
    u = random_field(m, rng, batch=5000)
    serial = nonlinear_B(u).coeffs
    with worker_pool(4):
        threaded = nonlinear_B(u).coeffs
        with worker_pool(None):
            inherited = nonlinear_B(u).coeffs
    assert np.array_equal(serial, threaded) and np.array_equal(serial, inherited)


# ---------------------------------------------------------------------------
# J operator


def test_J_hand_value():
    m = ModeSet.box(2)
    c = np.array([1.0, -2.0]) / math.sqrt(5.0)
    u = VelocityField.from_modes(m, {(2, 1): tuple(c)})
    out = apply_J(u, SigmaVector((1.0, 1.0)), 0.0)
    assert np.allclose(out.coeffs[m.index_of(2, 1)[0]], 3j * c, atol=1e-15)


def test_J_zero_cases(box3, rng):
    u = random_field(box3, rng)
    assert not np.any(apply_J(u, SigmaVector((0.0, 0.0)), 0.0).coeffs)
    v = VelocityField.from_modes(box3, {(0, 1): (1.0, 0.0)})
    assert np.abs(apply_J(v, SigmaVector((1.0, 0.0)), 0.0).coeffs).max() == 0.0


def test_J_matches_grid_directional_derivative(box3, rng):
    u = random_field(box3, rng)
    s = np.array([0.7, -0.3])
    n = 16
    x = 2 * np.pi * np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    deriv = np.zeros((2, n, n))
    for (kx, ky), c in full_coeffs(u).items():
        phase = np.exp(1j * (kx * X + ky * Y))
        deriv += np.real(1j * (kx * s[0] + ky * s[1]) * c[:, None, None] * phase)
    assert np.allclose(apply_J(u, SigmaVector(tuple(s)), 0.0).to_grid(n), deriv, atol=1e-12)


def test_J_is_skew(box3, rng):
    u, v = random_field(box3, rng), random_field(box3, rng)
    sig = SigmaVector((0.4, -1.1))
    assert inner(apply_J(u, sig, 0.0), v) == pytest.approx(-inner(u, apply_J(v, sig, 0.0)), abs=1e-12)


def test_sigma_bounds():
    s = SigmaVector((0.3, -0.4), profile=np.cos, horizon=1.0)
    assert s.sup_norm() == pytest.approx(0.5)
    assert s.Lambda == pytest.approx(0.4)
    assert SigmaVector((0.3, 0.0), bound=0.2).check_bound() is False

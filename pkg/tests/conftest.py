import numpy as np
import pytest

from bsnse.spectral import ModeSet, VelocityField, random_field


def full_coeffs(u):
    """dict (kx, ky) -> complex 2-vector over both signs (conjugate symmetry applied)."""
    out = {}
    for j, (kx, ky) in enumerate(zip(u.modes.kx.tolist(), u.modes.ky.tolist())):
        out[(kx, ky)] = u.coeffs[j]
        out[(-kx, -ky)] = np.conj(u.coeffs[j])
    return out


def direct_trilinear(u, v, w):
    """b(u, v, w) as a direct sum over Fourier triples k + l + m = 0 (independent of grid transforms)."""
    U, V, W = full_coeffs(u), full_coeffs(v), full_coeffs(w)
    s = 2.0 * np.pi / u.modes.period
    total = 0.0 + 0.0j
    for k, uk in U.items():
        for l, vl in V.items():
            m = (-k[0] - l[0], -k[1] - l[1])
            wm = W.get(m)
            if wm is None:
                continue
            ql = s * np.array(l, dtype=float)
            total += (uk @ (1j * ql)) * (vl @ wm)
    assert abs(total.imag) < 1e-9 * max(1.0, abs(total))
    return u.modes.area * total.real


def direct_convection(u, v, out_modes):
    """(u . grad) v by direct convolution, restricted to ``out_modes`` (not projected)."""
    U, V = full_coeffs(u), full_coeffs(v)
    s = 2.0 * np.pi / u.modes.period
    c = np.zeros((out_modes.size, 2), dtype=complex)
    index = {(kx, ky): j for j, (kx, ky) in enumerate(zip(out_modes.kx.tolist(), out_modes.ky.tolist()))}
    for k, uk in U.items():
        for l, vl in V.items():
            m = (k[0] + l[0], k[1] + l[1])
            j = index.get(m)
            if j is None:
                continue
            c[j] += (uk @ (1j * s * np.array(l, dtype=float))) * vl
    return VelocityField(out_modes, c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def box3():
    return ModeSet.box(3)


@pytest.fixture
def box5():
    return ModeSet.box(5)


def rand(modes, rng, batch=(), decay=1.0):
    return random_field(modes, rng, batch=batch, decay=decay)

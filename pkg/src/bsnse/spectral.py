"""Truncated Fourier representation of divergence-free fields on the periodic square.

A field is stored through one representative of each conjugate pair of
wavevectors (``ky > 0``, or ``ky == 0`` and ``kx > 0``); the coefficient of
``-k`` is the complex conjugate.  The physical field is

    u(x) = sum over stored k of  c_k exp(i q.x) + conj(c_k) exp(-i q.x),
    q = (2 pi / a) k,

so the H inner product carries the Parseval weight ``|G| = a**2`` and a factor
of two for the implied conjugate modes.

Products are formed pseudospectrally on a grid with at least ``3 K + 1``
points per axis, which is alias-free for quadratic terms and makes the
quadrature of triple products exact.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi
# fixed path-chunk for grid work; keeps peak memory bounded for large ensembles
GRID_CHUNK = 2048

_POOL = None


@contextmanager
def worker_pool(workers=None):
    """Spread grid chunks over ``workers`` threads inside the block.

    Chunk boundaries are fixed, so results do not depend on the worker count.
    ``None`` keeps whatever pool is already active.
    """
    global _POOL
    if workers is None:
        yield
        return
    prev = _POOL
    pool = ThreadPoolExecutor(workers) if workers and workers > 1 else None
    _POOL = pool
    try:
        yield
    finally:
        _POOL = prev
        if pool is not None:
            pool.shutdown()


def _map_chunks(fn, arrays, nb, out):
    starts = range(0, nb, GRID_CHUNK)

    def run(s):
        out[s:s + GRID_CHUNK] = fn(*(a[s:s + GRID_CHUNK] for a in arrays))

    if _POOL is None:
        for s in starts:
            run(s)
    else:
        list(_POOL.map(run, starts))
    return out


def _is_representative(kx, ky):
    return (ky > 0) | ((ky == 0) & (kx > 0))


def _sort_key(kx, ky):
    return np.lexsort((ky, kx, kx * kx + ky * ky))


class ModeSet:
    """Ordered finite set of wavevectors spanning the Galerkin space.

    Only conjugate-pair representatives are stored.  ``modes`` gives the
    full list (both signs) ordered by ``|k|^2`` with lexicographic ties.
    """

    def __init__(self, kx, ky, period=TWO_PI):
        kx = np.asarray(kx, dtype=np.int64).ravel()
        ky = np.asarray(ky, dtype=np.int64).ravel()
        if kx.shape != ky.shape or kx.size == 0:
            raise ValueError("kx and ky must be non-empty and of equal length")
        if period <= 0:
            raise ValueError("period must be positive")
        if not np.all(_is_representative(kx, ky)):
            raise ValueError("modes must be conjugate-pair representatives "
                             "(ky > 0, or ky == 0 and kx > 0)")
        order = _sort_key(kx, ky)
        kx, ky = kx[order], ky[order]
        if len(set(zip(kx.tolist(), ky.tolist()))) != kx.size:
            raise ValueError("duplicate wavevectors")
        self.kx = kx
        self.ky = ky
        self.kx.setflags(write=False)
        self.ky.setflags(write=False)
        self.period = float(period)
        self.scale = TWO_PI / self.period
        q = self.scale * np.stack([kx, ky], axis=-1).astype(float)
        q.setflags(write=False)
        self.q = q
        self.k2 = (kx * kx + ky * ky).astype(float)
        self.eigenvalues = self.scale**2 * self.k2
        self.eigenvalues.setflags(write=False)
        self.kmax = int(max(np.abs(kx).max(), np.abs(ky).max()))
        self._key = (self.period, tuple(kx.tolist()), tuple(ky.tolist()))
        self._grid_index = {}
        self._projector = None

    @classmethod
    def box(cls, K, period=TWO_PI):
        """All ``k != 0`` with ``max(|kx|, |ky|) <= K``."""
        if K < 1:
            raise ValueError("K must be >= 1")
        kx, ky = np.meshgrid(np.arange(-K, K + 1), np.arange(0, K + 1), indexing="ij")
        kx, ky = kx.ravel(), ky.ravel()
        keep = _is_representative(kx, ky)
        return cls(kx[keep], ky[keep], period)

    @classmethod
    def leading(cls, N, period=TWO_PI):
        """The first ``N`` Stokes eigenmodes (``N`` even, counted with both signs)."""
        if N < 2 or N % 2:
            raise ValueError("N must be a positive even mode count")
        R = int(np.ceil(np.sqrt(N))) + 1
        full = cls.box(R, period)
        return cls(full.kx[: N // 2], full.ky[: N // 2], period)

    @property
    def size(self):
        """Number of stored representatives."""
        return self.kx.size

    @property
    def dim(self):
        """Mode count N of the Galerkin space (both signs)."""
        return 2 * self.kx.size

    @property
    def area(self):
        return self.period**2

    @property
    def modes(self):
        """Full ordered list of wavevectors, closed under negation."""
        kx = np.concatenate([self.kx, -self.kx])
        ky = np.concatenate([self.ky, -self.ky])
        order = _sort_key(kx, ky)
        return np.stack([kx[order], ky[order]], axis=-1)

    @property
    def full_eigenvalues(self):
        m = self.modes
        return self.scale**2 * (m[:, 0] ** 2 + m[:, 1] ** 2).astype(float)

    def index_of(self, kx, ky):
        """Representative index of ``(kx, ky)`` and whether it is conjugated."""
        if not _is_representative(np.int64(kx), np.int64(ky)):
            kx, ky, conj = -kx, -ky, True
        else:
            conj = False
        hit = np.nonzero((self.kx == kx) & (self.ky == ky))[0]
        if hit.size == 0:
            raise KeyError((kx, ky))
        return int(hit[0]), conj

    def contains(self, other):
        return all((kx, ky) in self._pairs for kx, ky in zip(other.kx.tolist(), other.ky.tolist()))

    @property
    def _pairs(self):
        return set(zip(self.kx.tolist(), self.ky.tolist()))

    def grid_size(self, order=3):
        """Smallest grid on which products of ``order`` fields are alias-free."""
        return order * self.kmax + 1

    def grid_index(self, n):
        """Dense real transform matrices for an ``n x n`` grid (cached).

        ``to_grid`` maps ``[Re c, Im c]`` (length ``2 * size``) to the ``n * n``
        values of ``2 Re sum_rep c_k e^{i q.x}``; ``from_grid`` is its left
        inverse on the stored modes (exact for grids with ``n > 2 kmax``).
        """
        if n not in self._grid_index:
            if n < 2 * self.kmax + 1:
                raise ValueError("grid too small for the mode set")
            x = 2.0 * np.pi / n * np.arange(n)
            X, Y = np.meshgrid(x, x, indexing="ij")
            ph = np.outer(self.kx, X.ravel()) + np.outer(self.ky, Y.ravel())
            cos, sin = np.cos(ph), np.sin(ph)
            to_grid = np.concatenate([2.0 * cos, -2.0 * sin])
            from_grid = np.concatenate([cos, -sin]).T / (n * n)
            self._grid_index[n] = (np.ascontiguousarray(to_grid), np.ascontiguousarray(from_grid))
        return self._grid_index[n]

    @property
    def projector(self):
        """Entries (p11, p12, p22) of I - q q^T / |q|^2 per mode."""
        if self._projector is None:
            q2 = (self.q**2).sum(-1)
            self._projector = (1.0 - self.q[:, 0] ** 2 / q2, -self.q[:, 0] * self.q[:, 1] / q2,
                               1.0 - self.q[:, 1] ** 2 / q2)
        return self._projector

    def __eq__(self, other):
        return isinstance(other, ModeSet) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"ModeSet(N={self.dim}, kmax={self.kmax}, period={self.period:g})"


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Coefficients ``(..., n, 2)`` on a ModeSet; leading axes are a batch (e.g. paths)."""

    modes: ModeSet
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape[-2:] != (self.modes.size, 2):
            raise ValueError(f"coeffs shape {c.shape} does not match {self.modes}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, modes, batch=()):
        return cls(modes, np.zeros(tuple(batch) + (modes.size, 2), dtype=complex))

    @classmethod
    def from_modes(cls, modes, entries):
        """Build from ``{(kx, ky): (cx, cy)}``; non-representatives are conjugated in."""
        c = np.zeros((modes.size, 2), dtype=complex)
        for (kx, ky), val in entries.items():
            i, conj = modes.index_of(kx, ky)
            val = np.asarray(val, dtype=complex)
            c[i] = np.conj(val) if conj else val
        return cls(modes, c)

    @property
    def batch_shape(self):
        return self.coeffs.shape[:-2]

    def __getitem__(self, idx):
        return VelocityField(self.modes, self.coeffs[idx])

    def _other(self, other):
        if isinstance(other, VelocityField):
            _check_same(self, other)
            return other.coeffs
        return other

    def __add__(self, other):
        return VelocityField(self.modes, self.coeffs + self._other(other))

    def __sub__(self, other):
        return VelocityField(self.modes, self.coeffs - self._other(other))

    def __neg__(self):
        return VelocityField(self.modes, -self.coeffs)

    def __mul__(self, s):
        s = np.asarray(s)
        if s.ndim:
            s = s[..., None, None]
        return VelocityField(self.modes, self.coeffs * s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / np.asarray(s, dtype=float))

    def divergence(self):
        """Fourier coefficients of div u, shape ``(..., n)``."""
        return 1j * np.einsum("...kj,kj->...k", self.coeffs, self.modes.q)

    def embed(self, modes):
        """Zero-pad (or restrict) onto another mode set."""
        out = np.zeros(self.batch_shape + (modes.size, 2), dtype=complex)
        src = {(kx, ky): i for i, (kx, ky) in enumerate(zip(self.modes.kx.tolist(), self.modes.ky.tolist()))}
        for j, key in enumerate(zip(modes.kx.tolist(), modes.ky.tolist())):
            i = src.get(key)
            if i is not None:
                out[..., j, :] = self.coeffs[..., i, :]
        return VelocityField(modes, out)

    def to_grid(self, n=None):
        """Physical values ``(..., 2, n, n)`` on the uniform grid ``x_j = a j / n``."""
        n = n or self.modes.grid_size()
        return _to_grid(self.modes, self.coeffs, n)


def _check_same(*fields):
    m = fields[0].modes
    for f in fields[1:]:
        if f.modes != m:
            raise ValueError(f"mode-set mismatch: {m} vs {f.modes}")


def _to_grid(modes, coeffs, n):
    """Values ``(..., c, n, n)`` (axes x, y) of ``2 Re sum_rep c_k e^{i q.x}``."""
    to_grid, _ = modes.grid_index(n)
    cs = np.swapaxes(coeffs, -1, -2)
    ri = np.concatenate([cs.real, cs.imag], axis=-1)
    vals = ri.reshape(-1, ri.shape[-1]) @ to_grid
    return vals.reshape(cs.shape[:-1] + (n, n))


def _from_grid(modes, values, n):
    """Fourier coefficients ``(..., n_rep, c)`` of real grid values ``(..., c, n, n)``."""
    _, from_grid = modes.grid_index(n)
    ri = values.reshape(-1, n * n) @ from_grid
    m = modes.size
    c = (ri[:, :m] + 1j * ri[:, m:]).reshape(values.shape[:-2] + (m,))
    return np.swapaxes(c, -1, -2)


def _gradient_coeffs(u):
    """Coefficients of d_i u_j as ``(..., n, 4)`` ordered (d1u1, d1u2, d2u1, d2u2)."""
    q = u.modes.q
    c = u.coeffs
    return np.concatenate([1j * q[:, :1] * c, 1j * q[:, 1:] * c], axis=-1)


# ---------------------------------------------------------------------------
# linear operators


def leray_project(u):
    """Orthogonal projection onto divergence-free fields: ``(I - k k^T / |k|^2) c_k``."""
    p11, p12, p22 = u.modes.projector
    c = u.coeffs
    out = np.empty_like(c)
    out[..., 0] = p11 * c[..., 0] + p12 * c[..., 1]
    out[..., 1] = p12 * c[..., 0] + p22 * c[..., 1]
    return VelocityField(u.modes, out)


def stokes_apply(u):
    """Stokes operator A = -Laplacian, diagonal with eigenvalues (2 pi / a)^2 |k|^2."""
    return VelocityField(u.modes, u.coeffs * u.modes.eigenvalues[:, None])


def laplacian(u):
    return -stokes_apply(u)


@dataclass(frozen=True)
class SigmaVector:
    """Spatially constant transport coefficient ``sigma(t) = profile(t) * base``.

    ``bound`` is the componentwise bound Lambda; when omitted it is taken as the
    sampled supremum of the components over ``[0, horizon]``.
    """

    base: tuple = (0.0, 0.0)
    profile: Callable[[float], float] | None = None
    bound: float | None = None
    horizon: float = 1.0
    samples: int = field(default=1001, repr=False)

    def __call__(self, t):
        s = np.asarray(self.base, dtype=float)
        return s if self.profile is None else float(self.profile(t)) * s

    def sample(self, T=None):
        T = self.horizon if T is None else T
        ts = np.linspace(0.0, T, self.samples)
        return ts, np.array([self(t) for t in ts])

    def sup_norm(self, T=None):
        """sup over t of the Euclidean norm |sigma(t)|."""
        return float(np.sqrt((self.sample(T)[1] ** 2).sum(-1)).max())

    @property
    def Lambda(self):
        if self.bound is not None:
            return float(self.bound)
        return float(np.abs(self.sample()[1]).max())

    def check_bound(self, T=None):
        if self.bound is None:
            return True
        return bool(np.abs(self.sample(T)[1]).max() <= self.bound)

    @property
    def is_zero(self):
        return not np.any(np.asarray(self.base, dtype=float))


def apply_J(Z, sigma, t, project=True):
    """Transport of Z along sigma(t) followed by Leray projection.

    ``project=False`` skips the projection, which is exact for divergence-free Z.
    """
    s = sigma(t) if callable(sigma) else np.asarray(sigma, dtype=float)
    out = VelocityField(Z.modes, Z.coeffs * (1j * (Z.modes.q @ s))[:, None])
    return leray_project(out) if project else out


# ---------------------------------------------------------------------------
# inner products and norms


def inner(u, v):
    """H inner product ``|G| sum_k c_k . conj(d_k)`` over all modes (real)."""
    _check_same(u, v)
    return 2.0 * u.modes.area * np.real(np.einsum("...kj,...kj->...", u.coeffs, np.conj(v.coeffs)))


def _weighted_sq(u, w):
    return 2.0 * u.modes.area * np.einsum("...kj,k->...", np.abs(u.coeffs) ** 2, w)


def norm(u, kind="H"):
    """H, V, DA or L4 norm; batched over leading axes."""
    kind = kind.upper()
    lam = u.modes.eigenvalues
    if kind == "H":
        return np.sqrt(_weighted_sq(u, np.ones_like(lam)))
    if kind == "V":
        return np.sqrt(_weighted_sq(u, lam))
    if kind == "DA":
        return np.sqrt(_weighted_sq(u, lam**2))
    if kind == "L4":
        n = u.modes.grid_size(order=4)
        g = u.to_grid(n)
        m4 = ((g**2).sum(axis=-3) ** 2).mean(axis=(-2, -1))
        return (u.modes.area * m4) ** 0.25
    raise ValueError(f"unknown norm kind {kind!r}")


def grid_energy(u, n=None):
    """Quadrature of |u|^2 over the torus (Parseval cross-check)."""
    g = u.to_grid(n)
    return u.modes.area * (g**2).sum(axis=-3).mean(axis=(-2, -1))


# ---------------------------------------------------------------------------
# convection


def trilinear_b(u, v, w):
    """b(u, v, w) = sum_ij int u_i d_i v_j w_j dx, exact by grid quadrature."""
    _check_same(u, v, w)
    modes = u.modes
    n = modes.grid_size(order=3)
    ug = _to_grid(modes, u.coeffs, n)
    dv = _to_grid(modes, _gradient_coeffs(v), n)
    wg = _to_grid(modes, w.coeffs, n)
    conv = ug[..., :1, :, :] * dv[..., 0:2, :, :] + ug[..., 1:2, :, :] * dv[..., 2:4, :, :]
    return modes.area * (conv * wg).sum(axis=-3).mean(axis=(-2, -1))


def _convection_chunk(modes, uc, gc, n, out_modes):
    ug = _to_grid(modes, uc, n)
    dv = _to_grid(modes, gc, n)
    conv = ug[..., :1, :, :] * dv[..., 0:2, :, :] + ug[..., 1:2, :, :] * dv[..., 2:4, :, :]
    return _from_grid(out_modes, conv, n)


def convection(u, v, truncate=True):
    """Pi(u, v) = P((u . grad) v).

    With ``truncate`` the result lives on ``u.modes`` (Galerkin convention);
    otherwise on the box of radius ``2 kmax``, which holds the full product.
    """
    _check_same(u, v)
    modes = u.modes
    out_modes = modes if truncate else ModeSet.box(2 * modes.kmax, modes.period)
    n = modes.grid_size(order=3 if truncate else 4)
    gv = _gradient_coeffs(v)
    batch = u.batch_shape
    flat_u = u.coeffs.reshape((-1,) + u.coeffs.shape[-2:])
    flat_g = gv.reshape((-1,) + gv.shape[-2:])
    nb = flat_u.shape[0]
    out = np.empty((nb, out_modes.size, 2), dtype=complex)
    _map_chunks(lambda a, b: _convection_chunk(modes, a, b, n, out_modes), (flat_u, flat_g), nb, out)
    return leray_project(VelocityField(out_modes, out.reshape(batch + (out_modes.size, 2))))


def _rotational_chunk(modes, uc, n):
    q = modes.q
    w = 1j * (q[:, 0] * uc[..., 1] - q[:, 1] * uc[..., 0])  # vorticity
    g = _to_grid(modes, np.concatenate([uc, w[..., None]], axis=-1), n)
    lamb = np.stack([-g[..., 2, :, :] * g[..., 1, :, :], g[..., 2, :, :] * g[..., 0, :, :]], axis=-3)
    return _from_grid(modes, lamb, n)


def nonlinear_B(u, project=True):
    """B(u) = Pi(u, u) truncated back onto the mode set.

    Uses (u . grad) u = grad(|u|^2 / 2) + omega (-u_2, u_1); the gradient part
    is removed by the projection, so only u and omega go to the grid.  With
    ``project=False`` the caller applies the projection later.
    """
    modes = u.modes
    n = modes.grid_size(order=3)
    flat = u.coeffs.reshape((-1,) + u.coeffs.shape[-2:])
    out = _map_chunks(lambda a: _rotational_chunk(modes, a, n), (flat,), flat.shape[0], np.empty_like(flat))
    out = VelocityField(modes, out.reshape(u.coeffs.shape))
    return leray_project(out) if project else out


# ---------------------------------------------------------------------------
# sampling


def random_field(modes, rng, batch=(), decay=1.0, divergence_free=True, scale=1.0):
    """Random field with coefficient variance ``~ (1 + |k|^2)^(-decay)``."""
    batch = (batch,) if np.isscalar(batch) else tuple(batch)
    shape = batch + (modes.size, 2)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c *= scale * (1.0 + modes.k2)[:, None] ** (-decay / 2)
    u = VelocityField(modes, c)
    return leray_project(u) if divergence_free else u


def gradient_field(modes, q_coeffs):
    """Gradient of a scalar with coefficients ``q_k``: ``c_k = i q_phys q_k``."""
    q_coeffs = np.asarray(q_coeffs, dtype=complex)
    return VelocityField(modes, 1j * q_coeffs[..., None] * modes.q)


def taylor_green(modes, amplitude=1.0):
    """u = A (sin x cos y, -cos x sin y) at wavenumber (1, 1); requires period 2 pi."""
    A = amplitude / 4.0
    # sin x cos y = sum over (+-1, +-1) of e^{i(kx x + ky y)} / (4i) * sign(kx)
    entries = {
        (1, 1): (-1j * A, 1j * A),
        (-1, 1): (1j * A, 1j * A),
    }
    return VelocityField.from_modes(modes, entries)

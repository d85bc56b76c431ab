"""Forcing models with explicit structural bundles, and the truncated driver.

Every shipped model carries the constants ``(g, beta, rho, rho1, varrho)`` for
which the one-sided growth, growth-in-norm and local monotonicity bounds hold,
so the estimate audits can plug them in without guessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral import (SigmaVector, VelocityField, apply_J, inner, leray_project,
                       nonlinear_B, norm, random_field)


class TruncationError(ValueError):
    """Raised when a dominating schedule h_M fails its sampled check."""


def _const(c):
    return lambda *_: c


@dataclass(frozen=True)
class AssumptionBundle:
    """Constants of the structural conditions on f.

    g(t) >= 0 integrable, beta >= 0, rho/rho1 locally bounded (here
    constant), varrho decreasing on (0, 1].
    """

    g: Callable[[float], float]
    beta: float
    rho: Callable[[VelocityField], float]
    rho1: Callable[[VelocityField], float]
    varrho: Callable[[float], float]

    def g_l1(self, T, n=2001):
        ts = np.linspace(0.0, T, n)
        return float(np.trapezoid([self.g(t) for t in ts], ts))

    def g_sup(self, T, n=2001):
        return float(max(self.g(t) for t in np.linspace(0.0, T, n)))


@dataclass(frozen=True)
class ForcingModel:
    """f(t, u, Z) of kind ``zero``, ``linear`` or ``saturated``.

    linear:     f = a0(t) + a1 u + a2 Z
    saturated:  f = a0(t) - c1 u + c2 phi_{n0}(Z)

    with ``a0(t) = profile(t) * a0_field`` divergence-free.
    """

    kind: str = "zero"
    a0_field: VelocityField | None = None
    a0_profile: Callable[[float], float] | None = None
    a1: float = 0.0
    a2: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    n0: float = 1.0
    period: float = 2.0 * np.pi
    bundle: AssumptionBundle = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "saturated"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind == "saturated" and (self.c1 < 0 or self.c2 < 0 or self.n0 <= 0):
            raise ValueError("saturated forcing needs c1, c2 >= 0 and n0 > 0")
        if self.a0_field is not None:
            div = np.abs(self.a0_field.divergence()).max()
            scale = np.abs(self.a0_field.coeffs).max() * self.a0_field.modes.q.max()
            if div > 1e-12 * max(scale, 1.0):
                raise ValueError("a0 must be divergence-free")
        object.__setattr__(self, "bundle", self._make_bundle())

    # -- model pieces

    @property
    def lipschitz_u(self):
        return {"zero": 0.0, "linear": self.a1, "saturated": -self.c1}[self.kind]

    @property
    def lipschitz_z(self):
        """Global Lipschitz constant of f in Z."""
        return {"zero": 0.0, "linear": abs(self.a2), "saturated": self.c2}[self.kind]

    def a0_norm(self, t):
        if self.a0_field is None or self.kind == "zero":
            return 0.0
        return abs(self._profile(t)) * float(norm(self.a0_field))

    def _profile(self, t):
        return 1.0 if self.a0_profile is None else float(self.a0_profile(t))

    def a0(self, t, modes):
        if self.a0_field is None or self.kind == "zero":
            return VelocityField.zeros(modes)
        if self.a0_field.modes != modes:
            return self.a0_field.embed(modes) * self._profile(t)
        return self.a0_field * self._profile(t)

    def _make_bundle(self):
        if self.kind == "zero":
            return AssumptionBundle(_const(0.0), 0.0, _const(0.0), _const(1.0), _const(0.0))
        if self.kind == "linear":
            a1, a2 = self.a1, self.a2
            growth = max(a1, 0.0)
            rho = max(growth, abs(a2))
        else:
            a1, a2 = self.c1, self.c2
            growth = 0.0
            rho = self.c2
        has_a0 = self.a0_field is not None
        # <f, v> <= |a0|^2/2 + |v|^2/2 + growth |v|^2 + eps |phi|^2 + a2^2/(4 eps) |v|^2
        base = 0.5 if has_a0 else 0.0

        def varrho(eps, base=base, growth=growth, a2=a2):
            return base + growth + a2 * a2 / (4.0 * eps)

        def g(t):
            return 0.5 * self.a0_norm(t) ** 2

        # |f|^2 <= 3|a0|^2 + 3 a1^2 |v|^2 + 3 a2^2 |phi|^2 and |v|^2 <= |v|_V^2 / lambda_1
        lam1 = (2.0 * np.pi / self.period) ** 2
        beta = 1.0
        rho1 = max(6.0, 3.0 * a1 * a1 / lam1, 3.0 * a2 * a2)
        return AssumptionBundle(g, beta, _const(rho), _const(rho1), varrho)


def forcing_eval(model, t, u, Z, project=True):
    """H-valued forcing, batched over leading axes of ``u`` and ``Z``."""
    if u.modes != Z.modes:
        raise ValueError("mode-set mismatch between u and Z")
    modes = u.modes
    if model.kind == "zero":
        return VelocityField.zeros(modes, np.broadcast_shapes(u.batch_shape, Z.batch_shape))
    a0 = model.a0(t, modes)
    if model.kind == "linear":
        out = u * model.a1 + Z * model.a2 + a0.coeffs
    else:
        out = u * (-model.c1) + retract_phi_n(model.n0, Z) * model.c2 + a0.coeffs
    return leray_project(out) if project else out


def superparabolicity_margin(nu, lambda_bar, sigma, T):
    """inf over t of nu - lambda_bar^2 |sigma(t)|^2 / 2 (admissible iff positive)."""
    if lambda_bar <= 1:
        raise ValueError("lambda_bar must exceed 1")
    if isinstance(sigma, SigmaVector):
        s2 = sigma.sup_norm(T) ** 2
    else:
        s2 = float(np.sum(np.asarray(sigma, dtype=float) ** 2))
    return float(nu - lambda_bar**2 * s2 / 2.0)


# ---------------------------------------------------------------------------
# truncation machinery


def smoothstep5(tau):
    tau = np.clip(tau, 0.0, 1.0)
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)


def truncate_R_M(M, X_norm):
    """C^2 cutoff: 1 on [0, M], 0 on [M+1, inf), quintic in between."""
    if M <= 0:
        raise ValueError("M must be positive")
    X_norm = np.asarray(X_norm, dtype=float)
    out = 1.0 - smoothstep5(X_norm - M)
    return out if out.ndim else float(out)


def retract_phi_n(n, Z):
    """Radial retraction onto the H-ball of radius n: ``Z n / max(|Z|, n)``."""
    r = norm(Z)
    return Z * (n / np.maximum(r, n))


@dataclass(frozen=True)
class TruncationSpec:
    """State radius M, Z radius n and an optional dominating schedule h_M."""

    M: float
    n: int
    h_M_schedule: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.M <= 0 or self.n <= 0:
            raise ValueError("truncation radii must be positive")


def raw_driver(model, nu, sigma, modes):
    """Phi(t, y, z) = -nu A y + B(y) + J z + P_N f(t, y, z)."""

    lam = modes.eigenvalues[:, None]

    def phi(t, y, z):
        out = nonlinear_B(y, project=False).coeffs - nu * lam * y.coeffs
        if not (isinstance(sigma, SigmaVector) and sigma.is_zero):
            out += apply_J(z, sigma, t, project=False).coeffs
        if model.kind != "zero":
            out += forcing_eval(model, t, y, z, project=False).coeffs
        return leray_project(VelocityField(y.modes, out))

    phi.modes = modes
    phi.truncated = False
    return phi


def explicit_h_M(model, nu, modes, M, T=None):
    """Explicit dominator of sup over |w| <= M+1 of |Phi(t, w, 0)|.

    |A w| <= lambda_max |w|,  |B(w)| <= sqrt(N) / a * lambda_max^(1/2) |w|^2,
    |f(t, w, 0)|^2 <= (g(t) + beta lambda_max |w|^2) rho1.
    """
    lam_max = float(modes.eigenvalues.max())
    c_b = np.sqrt(modes.dim) / modes.period
    r = M + 1.0
    b = model.bundle
    rho1 = b.rho1(None)

    def h(t):
        f_bound = np.sqrt((b.g(t) + b.beta * lam_max * r * r) * rho1) if model.kind != "zero" else 0.0
        return nu * lam_max * r + c_b * np.sqrt(lam_max) * r * r + f_bound

    return h


def validate_h_M(h, model, nu, sigma, modes, M, T, rng=None, samples=1000, times=5):
    """Sampled check of h_M(t) >= |Phi(t, w, 0)| for |w| <= M + 1; returns the worst ratio."""
    rng = np.random.default_rng(0) if rng is None else rng
    phi = raw_driver(model, nu, sigma, modes)
    w = random_field(modes, rng, batch=samples, decay=rng.uniform(0.0, 2.0))
    radius = (M + 1.0) * rng.uniform(0.0, 1.0, samples) ** 0.5
    radius[:10] = M + 1.0
    w = w * (radius / norm(w))
    z0 = VelocityField.zeros(modes, (samples,))
    worst = 0.0
    for t in np.linspace(0.0, T, times):
        val = norm(phi(t, w, z0))
        worst = max(worst, float(val.max() / h(t)))
    if worst > 1.0:
        raise TruncationError(f"h_M fails sampled domination (ratio {worst:.4g})")
    return worst


def assemble_truncated_driver(spec, model, nu, sigma, modes, T=1.0, validate=True, rng=None):
    """Phi^{N,M,n}(t, y, z) = R_M(y) n / max(h_M(t), n) P_N Phi(t, y, phi_n(z))."""
    h = spec.h_M_schedule or explicit_h_M(model, nu, modes, spec.M)
    if validate:
        validate_h_M(h, model, nu, sigma, modes, spec.M, T, rng=rng)
    phi = raw_driver(model, nu, sigma, modes)
    n = float(spec.n)

    def trunc(t, y, z):
        cut = truncate_R_M(spec.M, norm(y)) * (n / max(h(t), n))
        return phi(t, y, retract_phi_n(n, z)) * cut

    trunc.modes = modes
    trunc.truncated = True
    trunc.h_M = h
    trunc.spec = spec
    trunc.raw = phi
    return trunc


def monotonicity_constant(driver, modes, T, rng, samples=1000, radius=None):
    """Sampled estimate of sup <D(t,X,Z) - D(t,Y,Z), X - Y> / |X - Y|^2."""
    radius = radius if radius is not None else getattr(driver, "spec", TruncationSpec(1.0, 1)).M + 2.0
    X = random_field(modes, rng, batch=samples)
    Y = random_field(modes, rng, batch=samples)
    Z = random_field(modes, rng, batch=samples)
    X = X * (radius * rng.uniform(0, 1, samples) / norm(X))
    Y = Y * (radius * rng.uniform(0, 1, samples) / norm(Y))
    Z = Z * (radius * rng.uniform(0, 2, samples) / norm(Z))
    t = rng.uniform(0, T)
    d = X - Y
    lhs = inner(driver(t, X, Z) - driver(t, Y, Z), d)
    return lhs / norm(d) ** 2

"""Flat ``key = value`` run configuration with namespaced keys.

Every key has a typed default; unknown keys are rejected.  ``resolve`` returns
the full parameter dict (defaults filled in), which is what the manifest records.
"""

from __future__ import annotations

import math

import numpy as np

from .engine import SolverConfig, TerminalCondition, psi_one, psi_tanh
from .forcing import ForcingModel, TruncationSpec
from .spectral import ModeSet, SigmaVector, VelocityField, norm, random_field, taylor_green


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _ints(s):
    return tuple(int(x) for x in str(s).split(",") if x.strip())


DEFAULTS = {
    "solver.nu": (0.5, float),
    "solver.K": (2, int),
    "solver.period": (2.0 * math.pi, float),
    "solver.T": (1.0, float),
    "solver.L": (32, int),
    "solver.M": (1000, int),
    "solver.basis_degree": (4, int),
    "solver.picard_iters": (3, int),
    "solver.picard_tol": (1e-10, float),
    "solver.lambda_bar": (math.sqrt(2.0), float),
    "solver.seed": (0, int),
    "data.K": (8, int),
    "sigma.x": (0.3, float),
    "sigma.y": (0.2, float),
    "forcing.kind": ("saturated", str),
    "forcing.a1": (0.0, float),
    "forcing.a2": (0.0, float),
    "forcing.c1": (0.5, float),
    "forcing.c2": (0.5, float),
    "forcing.n0": (2.0, float),
    "forcing.a0_kind": ("random", str),
    "forcing.a0_amplitude": (0.2, float),
    "forcing.a0_decay": (2.0, float),
    "forcing.a0_seed": (11, int),
    "forcing.a0_omega": (0.0, float),
    "terminal.kind": ("random", str),
    "terminal.amplitude": (1.0, float),
    "terminal.decay": (2.0, float),
    "terminal.seed": (5, int),
    "terminal.psi": ("tanh", str),
    "terminal.psi_amplitude": (0.5, float),
    "truncation.enabled": (False, _bool),
    "truncation.M": (0.0, float),
    "truncation.n": (0, int),
    "uniqueness.seed_b": (1, int),
    "uniqueness.n_se": (3.0, float),
    "invariants.K": (5, int),
    "invariants.samples": (1000, int),
    "estimates.samples": (1000, int),
    "reversal.levels": ((64, 128, 256), _ints),
    "reversal.substeps": (4, int),
    "reversal.M": (8, int),
    "output.slice_node": (-1, int),
    "output.slice_paths": (16, int),
}

_CHOICES = {
    "forcing.kind": ("zero", "linear", "saturated"),
    "forcing.a0_kind": ("random", "shell"),
    "terminal.kind": ("random", "taylor_green", "zero"),
    "terminal.psi": ("one", "tanh"),
}


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` comments) into a dict of raw strings."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def resolve(raw=None):
    """Typed, fully resolved configuration; unknown keys and bad values raise ConfigError."""
    raw = dict(raw or {})
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)}; valid keys: {', '.join(sorted(DEFAULTS))}")
    cfg = {}
    for key, (default, conv) in DEFAULTS.items():
        if key not in raw:
            cfg[key] = default
            continue
        try:
            cfg[key] = conv(raw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
    for key, choices in _CHOICES.items():
        if cfg[key] not in choices:
            raise ConfigError(f"{key} must be one of {', '.join(choices)}, got {cfg[key]!r}")
    return cfg


def load_config(path=None):
    if path is None:
        return resolve()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return resolve(parse_config_text(text))


def format_config(cfg):
    """Config dict back to its ``key = value`` text (round-trips through ``resolve``)."""
    lines = []
    for key in DEFAULTS:
        v = cfg[key]
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# object construction


def build_solver_config(cfg, seed=None, truncation=True):
    trunc = None
    if truncation and cfg["truncation.enabled"]:
        trunc = TruncationSpec(cfg["truncation.M"], cfg["truncation.n"])
    try:
        return SolverConfig(nu=cfg["solver.nu"], K=cfg["solver.K"], period=cfg["solver.period"],
                            T=cfg["solver.T"], L=cfg["solver.L"], M=cfg["solver.M"],
                            basis_degree=cfg["solver.basis_degree"],
                            picard_iters=cfg["solver.picard_iters"], picard_tol=cfg["solver.picard_tol"],
                            lambda_bar=cfg["solver.lambda_bar"], truncation=trunc,
                            seed=cfg["solver.seed"] if seed is None else seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_sigma(cfg):
    return SigmaVector((cfg["sigma.x"], cfg["sigma.y"]), horizon=cfg["solver.T"])


def _reference_field(cfg, seed_key, decay_key, modes):
    """Unit-norm random field drawn once on the data.K box, then restricted to ``modes``.

    Drawing on a fixed box keeps the data the same function for every solver K,
    so runs at different K are Galerkin projections of one problem.
    """
    if cfg["data.K"] < 1:
        raise ConfigError("data.K must be >= 1")
    ref = ModeSet.box(cfg["data.K"], cfg["solver.period"])
    f = random_field(ref, np.random.default_rng(cfg[seed_key]), decay=cfg[decay_key])
    out = (f * (1.0 / float(norm(f)))).embed(modes)
    if not np.any(out.coeffs):
        raise ConfigError(f"random data from {seed_key} has no component on the solver modes")
    return out


def build_model(cfg, modes):
    kind = cfg["forcing.kind"]
    a0 = None
    if kind != "zero" and cfg["forcing.a0_amplitude"] != 0.0:
        if cfg["forcing.a0_kind"] == "shell":
            # (1, -1) lies on the Taylor-Green shell |k|^2 = 2
            a0 = VelocityField.from_modes(modes, {(1, -1): (1.0, 1.0)})
        else:
            a0 = _reference_field(cfg, "forcing.a0_seed", "forcing.a0_decay", modes)
        a0 = a0 * (cfg["forcing.a0_amplitude"] / float(norm(a0)))
    omega = cfg["forcing.a0_omega"]
    profile = None if omega == 0.0 else (lambda t, w=omega: math.cos(w * t))
    try:
        return ForcingModel(kind, a0_field=a0, a0_profile=profile, a1=cfg["forcing.a1"],
                            a2=cfg["forcing.a2"], c1=cfg["forcing.c1"], c2=cfg["forcing.c2"],
                            n0=cfg["forcing.n0"], period=cfg["solver.period"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_terminal(cfg, modes):
    kind = cfg["terminal.kind"]
    amp = cfg["terminal.amplitude"]
    if kind == "random":
        base = _reference_field(cfg, "terminal.seed", "terminal.decay", modes) * amp
    elif kind == "taylor_green":
        base = taylor_green(modes, amp)
    else:
        base = VelocityField.zeros(modes)
    psi = psi_one if cfg["terminal.psi"] == "one" else psi_tanh(cfg["terminal.psi_amplitude"])
    return TerminalCondition(base, psi)


def build_problem(cfg, seed=None):
    """(SolverConfig, ForcingModel, SigmaVector, TerminalCondition) from a resolved config."""
    sc = build_solver_config(cfg, seed)
    modes = ModeSet.box(sc.K, sc.period)
    return sc, build_model(cfg, modes), build_sigma(cfg), build_terminal(cfg, modes)

"""Spectral Galerkin solver and estimate audits for the 2D backward stochastic Navier-Stokes equation."""

from .spectral import (ModeSet, SigmaVector, VelocityField, apply_J, convection, inner, leray_project,
                       nonlinear_B, norm, random_field, stokes_apply, trilinear_b, worker_pool)

__version__ = "0.1.0"

__all__ = ["ModeSet", "SigmaVector", "VelocityField", "apply_J", "convection", "inner", "leray_project",
           "nonlinear_B", "norm", "random_field", "stokes_apply", "trilinear_b", "worker_pool"]

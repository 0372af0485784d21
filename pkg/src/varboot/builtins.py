"""Named densities, curves and metrics selectable from the command line."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .errors import ValidationError
from .frenet import SampledCurve
from .hyperbolic import euclidean_metric, halfspace_metric
from .reparam import ScalarDensity

DENSITIES = {
    "one": lambda: ScalarDensity.constant(1.0),
    "four": lambda: ScalarDensity.constant(4.0),
    "quadratic": lambda: ScalarDensity(lambda y: (1.0 + y) ** 2, name="quadratic"),
    "exponential": lambda: ScalarDensity(lambda y: np.exp(2.0 * y), name="exponential"),
    "wave": lambda: ScalarDensity(lambda y: 1.0 + 0.5 * np.sin(2.0 * np.pi * y), name="wave"),
}

# Closed-form F(1)^2 = (int sqrt m)^2 for the registry.
DENSITY_OPTIMA = {
    "one": 1.0,
    "four": 4.0,
    "quadratic": 2.25,
    "exponential": (np.e - 1.0) ** 2,
}


def density(name: str) -> ScalarDensity:
    try:
        return DENSITIES[name]()
    except KeyError:
        raise ValidationError(f"unknown density {name!r}; choose from {sorted(DENSITIES)}") from None


def helix(n: int = 2000, a: float = 1.0, b: float = 1.0) -> SampledCurve:
    """Arclength helix ``(a cos(s/c), a sin(s/c), b s/c)``, ``c = sqrt(a^2+b^2)``, s in [0, 1]."""
    c = np.hypot(a, b)
    s = np.linspace(0.0, 1.0, n)
    phi = s / c
    return SampledCurve(s, np.stack([a * np.cos(phi), a * np.sin(phi), b * phi], axis=1), arclength=True)


def circle(n: int = 2000) -> SampledCurve:
    s = np.linspace(0.0, 1.0, n)
    return SampledCurve(s, np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], axis=1), arclength=True)


def bent(n: int = 2000) -> SampledCurve:
    """Twisted cubic ``(u, u^2, u^3)`` (not arclength; curvature and torsion vary)."""
    u = np.linspace(0.0, 1.0, n)
    return SampledCurve(u, np.stack([u, u * u, u**3], axis=1))


CURVES = {"helix": helix, "circle": circle, "bent": bent}


def curve(name: str, n: int = 2000) -> SampledCurve:
    try:
        return CURVES[name](n)
    except KeyError:
        raise ValidationError(f"unknown curve {name!r}; choose from {sorted(CURVES)}") from None


METRICS = {"euclidean": lambda: euclidean_metric(2), "halfplane": lambda: halfspace_metric(2)}


def metric(name: str):
    try:
        return METRICS[name]()
    except KeyError:
        raise ValidationError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


def fixture_path(name: str = "helix.csv"):
    return resources.files("varboot") / "data" / name

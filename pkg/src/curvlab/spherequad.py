"""Quadrature rules on the unit circle and unit sphere.

The circle rule is a uniform angular grid (periodic trapezoid, spectrally
accurate for smooth integrands).  The sphere rule uses icosphere vertices as
nodes with their spherical Voronoi cell areas as weights, so constants are
integrated exactly: the weights sum to 4*pi up to round-off.  "Level" is the
icosphere subdivision depth; node count is 10*4**level + 2.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import SphericalVoronoi

from .mesh import icosphere

_SPHERE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_CIRCLE_BASE = 16


def circle_rule(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions (N, 2) and weights (N,) on S^1; N = 16 * 2**level."""
    if level < 0:
        raise ValueError("quadrature level must be >= 0")
    n = _CIRCLE_BASE * 2 ** level
    theta = 2.0 * np.pi * np.arange(n) / n
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    weights = np.full(n, 2.0 * np.pi / n)
    return dirs, weights


def sphere_rule(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions (N, 3) and Voronoi-area weights (N,) on S^2."""
    if level < 0:
        raise ValueError("quadrature level must be >= 0")
    if level not in _SPHERE_CACHE:
        ico = icosphere(level)
        sv = SphericalVoronoi(ico.vertices, radius=1.0)
        weights = sv.calculate_areas()
        _SPHERE_CACHE[level] = (ico.vertices.copy(), weights)
    dirs, weights = _SPHERE_CACHE[level]
    return dirs, weights


def rule(ambient_dim: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature rule on S^(ambient_dim - 1) for ambient_dim in {2, 3}."""
    if ambient_dim == 2:
        return circle_rule(level)
    if ambient_dim == 3:
        return sphere_rule(level)
    raise ValueError("ambient dimension must be 2 or 3")


def sphere_measure(ambient_dim: int) -> float:
    """H^(d-1)(S^(d-1)) for d in {2, 3}: 2*pi or 4*pi."""
    if ambient_dim == 2:
        return 2.0 * np.pi
    if ambient_dim == 3:
        return 4.0 * np.pi
    raise ValueError("ambient dimension must be 2 or 3")

"""Closed-form projections and proximal maps used by the problem families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Vector, as_vector

__all__ = [
    "AffineHyperplane",
    "NonnegativeOrthant",
    "project_orthant",
    "project_hyperplane",
    "prox_indicator",
    "soft_threshold",
    "half_sq_dist_grad",
]


@dataclass(frozen=True, eq=False)
class AffineHyperplane:
    """The set {x : <normal, x> = offset}; normal must be nonzero."""

    normal: Vector
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if float(np.linalg.norm(n)) == 0.0:
            raise ValueError("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class NonnegativeOrthant:
    """The set {x : x_i >= 0 for all i} in the given dimension."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("orthant dimension must be >= 1")


def project_orthant(x) -> Vector:
    """Nearest point of the nonnegative orthant: coordinatewise max(., 0)."""
    return np.maximum(as_vector(x), 0.0)


def project_hyperplane(plane: AffineHyperplane, x) -> Vector:
    """Nearest point of the hyperplane: shift along the normal direction."""
    v = as_vector(x, plane.normal.size)
    n = plane.normal
    shift = (float(n @ v) - plane.offset) / float(n @ n)
    return v - shift * n


def prox_indicator(constraint, v, step: float) -> Vector:
    """Prox of an indicator function: the projection, for any positive step."""
    if not step > 0:
        raise ValueError("prox step must be positive")
    if isinstance(constraint, AffineHyperplane):
        return project_hyperplane(constraint, v)
    if isinstance(constraint, NonnegativeOrthant):
        return project_orthant(as_vector(v, constraint.dim))
    raise TypeError(f"no closed-form projection for {type(constraint).__name__}")


def soft_threshold(v, lambda_step: float) -> Vector:
    """Coordinatewise shrink-toward-zero: sign(v) * max(|v| - lambda_step, 0)."""
    if lambda_step < 0:
        raise ValueError("threshold must be nonnegative")
    w = as_vector(v)
    return np.sign(w) * np.maximum(np.abs(w) - lambda_step, 0.0)


def half_sq_dist_grad(orthant: NonnegativeOrthant, x) -> Vector:
    """Gradient of half the squared distance to the orthant: x - P(x).

    Valid everywhere, including boundary points, and 1-Lipschitz.
    """
    v = as_vector(x, orthant.dim)
    return v - np.maximum(v, 0.0)

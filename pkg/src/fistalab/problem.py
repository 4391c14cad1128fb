"""Composite convex objectives F = f + g over dense real coordinate vectors.

The smooth part carries its gradient and a declared Lipschitz constant for
the gradient; the nonsmooth part carries its proximal map. Indicator
functions are supported through extended-real values (``math.inf``), so
``eval_F`` may return ``+inf`` but never NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Vector = np.ndarray

__all__ = [
    "Vector",
    "DimensionMismatchError",
    "as_vector",
    "SmoothPart",
    "NonsmoothPart",
    "SolutionInfo",
    "CompositeProblem",
    "eval_F",
    "check_lipschitz",
    "LipschitzReport",
    "finite_difference_gradient",
]


class DimensionMismatchError(ValueError):
    """A vector does not match the fixed dimension of the problem."""


def as_vector(x, dim: int | None = None) -> Vector:
    """Validate and return ``x`` as a finite 1-D float64 array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector with >= 1 coordinate, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.size}")
    return v


@dataclass(frozen=True)
class SmoothPart:
    """Convex differentiable term with a ``beta``-Lipschitz gradient.

    ``beta`` is declared by the constructor of the problem family and is
    certified empirically (see :func:`check_lipschitz`), never estimated.
    """

    value: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]
    beta: float

    def __post_init__(self):
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be a positive finite real, got {self.beta!r}")


@dataclass(frozen=True)
class NonsmoothPart:
    """Convex lower-semicontinuous term given by its value and prox map.

    ``value`` may return ``+inf`` (indicator functions); ``prox(v, step)``
    must return the minimizer of ``g(u) + ||u - v||^2 / (2 step)``.
    """

    value: Callable[[Vector], float]
    prox: Callable[[Vector, float], Vector]


@dataclass(frozen=True, eq=False)
class SolutionInfo:
    """Ground truth about the minimizers, consumed by gap diagnostics.

    ``project``, when available, is the exact Euclidean projection onto the
    full solution set; without it, distances fall back to the single
    reference point ``s_ref`` (an upper bound on the true distance).
    """

    s_ref: Vector
    mu: float
    project: Optional[Callable[[Vector], Vector]] = None

    def __post_init__(self):
        object.__setattr__(self, "s_ref", as_vector(self.s_ref))
        if not math.isfinite(self.mu):
            raise ValueError("optimal value must be finite")

    @property
    def exact_distance(self) -> bool:
        return self.project is not None

    def distance(self, x: Vector) -> float:
        """Distance from x to the solution set, or to s_ref as a surrogate."""
        v = as_vector(x)
        target = self.project(v) if self.project is not None else self.s_ref
        return float(np.linalg.norm(v - target))


@dataclass(frozen=True, eq=False)
class CompositeProblem:
    """The objective F = f + g on R^dim, with optional solution info."""

    f: SmoothPart
    g: NonsmoothPart
    dim: int
    problem_id: str = "custom"
    solution: Optional[SolutionInfo] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("problem dimension must be >= 1")
        if self.solution is not None and self.solution.s_ref.size != self.dim:
            raise DimensionMismatchError("solution reference point has the wrong dimension")


def eval_F(problem: CompositeProblem, x) -> float:
    """Evaluate F(x) = f(x) + g(x); returns +inf when g(x) = +inf.

    The sum is short-circuited on an infinite g value so no inf arithmetic
    is ever performed. NaN from either part is a hard error.
    """
    v = as_vector(x, problem.dim)
    gv = float(problem.g.value(v))
    if math.isnan(gv):
        raise ValueError("nonsmooth part evaluated to NaN")
    if gv == math.inf:
        return math.inf
    fv = float(problem.f.value(v))
    total = fv + gv
    if math.isnan(total):
        raise ValueError("objective evaluated to NaN")
    return total


@dataclass(frozen=True)
class LipschitzReport:
    """Empirical certification of the declared gradient Lipschitz constant."""

    beta: float
    max_ratio: float
    pairs_used: int
    passed: bool


def check_lipschitz(problem: CompositeProblem, samples) -> LipschitzReport:
    """Certify beta against gradient difference quotients on sample pairs.

    Coincident pairs are skipped; the check passes when the largest ratio
    ``||grad f(u) - grad f(v)|| / ||u - v||`` does not exceed
    ``beta * (1 + 1e-8)``.
    """
    beta = problem.f.beta
    max_ratio = 0.0
    used = 0
    for u, v in samples:
        uu = as_vector(u, problem.dim)
        vv = as_vector(v, problem.dim)
        gap = float(np.linalg.norm(uu - vv))
        if gap == 0.0:
            continue
        ratio = float(np.linalg.norm(problem.f.gradient(uu) - problem.f.gradient(vv))) / gap
        max_ratio = max(max_ratio, ratio)
        used += 1
    if used == 0:
        raise ValueError("no usable sample pairs (empty list or all pairs coincident)")
    return LipschitzReport(
        beta=beta,
        max_ratio=max_ratio,
        pairs_used=used,
        passed=max_ratio <= beta * (1.0 + 1e-8),
    )


def finite_difference_gradient(fun: Callable[[Vector], float], x, h: float = 1e-6) -> Vector:
    """Central finite differences of ``fun`` at ``x``, one coordinate at a time."""
    v = as_vector(x)
    out = np.empty_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        out[i] = (fun(v + e) - fun(v - e)) / (2.0 * h)
    return out

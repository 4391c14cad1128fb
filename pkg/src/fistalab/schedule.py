"""Step-parameter sequences (t_k) for the accelerated solver.

Admissible sequences satisfy, for every k,

    t_k >= (k + 2) / 2,  with t_0 = 1,          (growth)
    t_k^2 >= t_{k+1}^2 - t_{k+1}.               (quadratic)

The classic choice takes the largest root of the quadratic condition at
equality; the slowest admissible growth is t_k = (k + 2) / 2 for k >= 1.
Violation checks use residuals scaled by max(1, t^2) because the raw
quadratic residual necessarily grows like eps * t^2 in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScheduleError",
    "bt_next",
    "linear_half",
    "Schedule",
    "ScheduleReport",
    "validate_schedule",
    "TkBoundsReport",
    "check_tk_bounds",
]

GROWTH_TOL = 1e-9
QUADRATIC_TOL = 1e-9


class ScheduleError(ValueError):
    """A step-parameter sequence violates the admissibility conditions."""


def bt_next(t_k: float) -> float:
    """Largest root of t^2 - t - t_k^2 = 0, the classic FISTA update."""
    if not t_k >= 1.0:
        raise ValueError(f"step parameter must satisfy t >= 1, got {t_k}")
    return 0.5 * (1.0 + math.sqrt(4.0 * t_k * t_k + 1.0))


def linear_half(k: int) -> float:
    """Slowest admissible growth: 1 at k = 0, then (k + 2) / 2."""
    if k < 0:
        raise ValueError("index must be nonnegative")
    return 1.0 if k == 0 else 0.5 * (k + 2)


def _growth_residuals(ts: np.ndarray) -> np.ndarray:
    # t_k - (k+2)/2 for k >= 1; at k = 0 the condition pins t_0 = 1 exactly.
    ks = np.arange(ts.size, dtype=float)
    res = ts - (ks + 2.0) / 2.0
    res[0] = -abs(ts[0] - 1.0)
    return res

def _quadratic_residuals(ts: np.ndarray) -> np.ndarray:
    return ts[:-1] ** 2 - ts[1:] ** 2 + ts[1:]


@dataclass(frozen=True)
class ScheduleReport:
    """Certification result for a step-parameter prefix.

    Residuals follow the sign convention "nonnegative means satisfied":
    ``growth_residuals[k] = t_k - (k+2)/2`` (0 index: -|t_0 - 1|) and
    ``quadratic_residuals[k] = t_k^2 - t_{k+1}^2 + t_{k+1}``. Violations
    list (index, scaled residual) pairs beyond the scaled tolerances;
    ``quadratic_scaled_abs_max`` is the largest |residual| / max(1, t_k^2),
    the quantity that stays near eps when the recursion holds at equality.
    """

    growth_residuals: np.ndarray
    quadratic_residuals: np.ndarray
    growth_violations: list
    quadratic_violations: list
    quadratic_scaled_abs_max: float

    @property
    def valid(self) -> bool:
        return not self.growth_violations and not self.quadratic_violations


def validate_schedule(ts) -> ScheduleReport:
    """Check a raw sequence against both admissibility conditions.

    Requires at least two entries and t_0 = 1 (to 1e-12). An empty
    violation list in the report means the prefix is admissible.
    """
    arr = np.asarray(ts, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a sequence of at least two step parameters")
    if abs(arr[0] - 1.0) > 1e-12:
        raise ValueError(f"t_0 must equal 1, got {arr[0]!r}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("step parameters must be finite")

    growth = _growth_residuals(arr)
    quad = _quadratic_residuals(arr)

    ks = np.arange(arr.size, dtype=float)
    growth_scale = np.maximum(1.0, (ks + 2.0) / 2.0)
    quad_scale = np.maximum(1.0, arr[:-1] ** 2)

    growth_violations = [
        (int(k), float(growth[k] / growth_scale[k]))
        for k in np.nonzero(growth < -GROWTH_TOL * growth_scale)[0]
    ]
    quadratic_violations = [
        (int(k), float(quad[k] / quad_scale[k]))
        for k in np.nonzero(quad < -QUADRATIC_TOL * quad_scale)[0]
    ]
    return ScheduleReport(
        growth_residuals=growth,
        quadratic_residuals=quad,
        growth_violations=growth_violations,
        quadratic_violations=quadratic_violations,
        quadratic_scaled_abs_max=float(np.max(np.abs(quad) / quad_scale)),
    )


class Schedule:
    """Lazily extended, certified prefix of a step-parameter sequence.

    ``rule`` is "bt" (quadratic recursion at equality), "linear"
    ((k + 2) / 2 growth), or "explicit" with user-supplied values. Every
    extension revalidates the new entries, so an existing instance always
    holds an admissible prefix; asking for more terms than an explicit rule
    provides is an error. Extension is single-writer; an already generated
    prefix may be shared read-only.
    """

    def __init__(self, rule: str = "bt", values=None):
        if rule in ("bt", "linear"):
            if values is not None:
                raise ValueError(f"rule {rule!r} does not take explicit values")
            self._explicit = None
        elif rule == "explicit":
            if values is None:
                raise ValueError("explicit rule needs values")
            self._explicit = np.asarray(values, dtype=float)
            if self._explicit.ndim != 1 or self._explicit.size < 1:
                raise ValueError("explicit values must be a nonempty 1-D sequence")
        else:
            raise ValueError(f"unknown schedule rule {rule!r}")
        self.rule = rule
        self._cache = [1.0] if self._explicit is None else [float(self._explicit[0])]
        self._certify(0)

    @property
    def label(self) -> str:
        return self.rule

    def _generate(self, k: int) -> float:
        if self._explicit is not None:
            if k >= self._explicit.size:
                raise ScheduleError(
                    f"explicit schedule has {self._explicit.size} entries; index {k} requested"
                )
            return float(self._explicit[k])
        if self.rule == "bt":
            return bt_next(self._cache[k - 1])
        return linear_half(k)

    def _certify(self, k: int):
        t = self._cache[k]
        if not math.isfinite(t):
            raise ScheduleError(f"t_{k} is not finite")
        if k == 0:
            if abs(t - 1.0) > 1e-12:
                raise ScheduleError(f"t_0 must equal 1, got {t!r}")
            return
        growth_scale = max(1.0, (k + 2.0) / 2.0)
        if t - (k + 2.0) / 2.0 < -GROWTH_TOL * growth_scale:
            raise ScheduleError(f"growth condition violated at k={k}: t={t}")
        prev = self._cache[k - 1]
        quad_scale = max(1.0, prev * prev)
        if prev * prev - t * t + t < -QUADRATIC_TOL * quad_scale:
            raise ScheduleError(f"quadratic condition violated at k={k}: t={t}")

    def prefix(self, k_max: int) -> np.ndarray:
        """Return t_0..t_{k_max} as an array, extending the cache as needed."""
        if k_max < 0:
            raise ValueError("k_max must be nonnegative")
        while len(self._cache) <= k_max:
            k = len(self._cache)
            self._cache.append(self._generate(k))
            self._certify(k)
        return np.array(self._cache[: k_max + 1])

    def t(self, k: int) -> float:
        return float(self.prefix(k)[k])


@dataclass(frozen=True)
class TkBoundsReport:
    """Bounds 1 <= t_k - 1 <= k for k >= 2, plus divergence evidence.

    ``inv_partial_sums[i]`` is the running sum of 1/(t_k - 1) over
    k = 2 .. 2 + i; the total diverges like the harmonic series for any
    admissible schedule.
    """

    lower_violations: list
    upper_violations: list
    inv_partial_sums: np.ndarray

    @property
    def valid(self) -> bool:
        return not self.lower_violations and not self.upper_violations

    @property
    def total(self) -> float:
        return float(self.inv_partial_sums[-1]) if self.inv_partial_sums.size else 0.0


def check_tk_bounds(ts) -> TkBoundsReport:
    """Verify the two-sided bounds on t_k - 1 from index 2 onward."""
    arr = np.asarray(ts, dtype=float)
    if arr.ndim != 1 or arr.size < 3:
        raise ValueError("need at least t_0..t_2 to check the bounds")
    ks = np.arange(2, arr.size)
    tm1 = arr[2:] - 1.0
    tol = 1e-9
    lower = [(int(k), float(v - 1.0)) for k, v in zip(ks, tm1) if v - 1.0 < -tol]
    upper = [
        (int(k), float(k - v)) for k, v in zip(ks, tm1) if k - v < -tol * max(1.0, float(k))
    ]
    # reciprocals are divergence evidence; meaningless where the lower bound fails
    inv = np.where(tm1 > 0, 1.0 / np.where(tm1 > 0, tm1, 1.0), np.nan)
    return TkBoundsReport(
        lower_violations=lower,
        upper_violations=upper,
        inv_partial_sums=np.cumsum(inv),
    )

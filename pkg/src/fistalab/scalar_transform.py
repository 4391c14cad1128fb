"""Averaging transform on scalar sequences and its limit-transfer machinery.

For a positive weight sequence phi_k, the forward transform of (h_k) is

    g_k = h_{k+1} + phi_k (h_{k+1} - h_k).

With lambda_k = phi_k / (1 + phi_k) the transform inverts to the recursion
h_{k+1} = (1 - lambda_k) g_k + lambda_k h_k, whose unrolled closed form is

    h_n = sum_{k<n} w_{n,k} g_k + h_0 prod_{j<n} lambda_j,
    w_{n,k} = (1 - lambda_k) prod_{j=k+1}^{n-1} lambda_j,

with weights that telescope to 1 - prod lambda_j. When sum 1/phi_k
diverges, the weights behave like an averaging kernel and (h_k) inherits
any limit of (g_k), finite or infinite; when the sum converges the
transfer can fail. The bundled scenarios exercise both regimes.

Long products of lambda_j underflow well before 10^6 terms, so evidence
about them is accumulated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "mixing_weight",
    "forward_transform",
    "reconstruct",
    "transform_weights",
    "weighted_reconstruction",
    "DivergenceWitness",
    "divergence_witness",
    "Scenario",
    "SCENARIO_NAMES",
    "get_scenario",
]


def mixing_weight(phi_k: float) -> float:
    """lambda = phi / (1 + phi), in (0, 1) for positive phi."""
    if not phi_k > 0:
        raise ValueError(f"phi must be positive, got {phi_k}")
    return phi_k / (1.0 + phi_k)


def _phi_array(phi, start: int, count: int) -> np.ndarray:
    """Evaluate phi on absolute indices start..start+count-1, checking positivity."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    if callable(phi):
        vals = np.array([float(phi(k)) for k in range(start, start + count)])
    else:
        vals = np.asarray(phi, dtype=float)[:count]
        if vals.size != count:
            raise ValueError(f"need {count} phi values, got {vals.size}")
    if np.any(~(vals > 0)):
        bad = int(np.argmax(~(vals > 0)))
        raise ValueError(f"phi must be positive; offending index {start + bad}")
    return vals


def forward_transform(h, phi, start: int = 0) -> np.ndarray:
    """g_k = h_{k+1} + phi_k (h_{k+1} - h_k); one entry shorter than h."""
    hh = np.asarray(h, dtype=float)
    if hh.size < 2:
        raise ValueError("need at least two h values")
    phis = _phi_array(phi, start, hh.size - 1)
    return hh[1:] + phis * (hh[1:] - hh[:-1])


def reconstruct(g, phi, h_seed: float, start: int = 0) -> np.ndarray:
    """Invert the transform by its recursion; returns h of length len(g) + 1.

    ``h_seed`` is the leading value h_{start}; entry i of the result is
    h_{start + i}.
    """
    gg = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(gg)):
        raise ValueError("g must be finite-valued")
    phis = _phi_array(phi, start, gg.size)
    lams = phis / (1.0 + phis)
    h = np.empty(gg.size + 1)
    h[0] = h_seed
    for i in range(gg.size):
        h[i + 1] = (1.0 - lams[i]) * gg[i] + lams[i] * h[i]
    return h


def transform_weights(phi, n: int, start: int = 0) -> np.ndarray:
    """The n mixing weights w_{n,k}, k = 0..n-1 (positional, offset by start).

    All weights are positive and sum to 1 - prod_{j<n} lambda_j.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phis = _phi_array(phi, start, n)
    lams = phis / (1.0 + phis)
    suffix = np.ones(n)  # prod_{j=k+1}^{n-1} lambda_j; empty product = 1
    if n > 1:
        suffix[: n - 1] = np.cumprod(lams[:0:-1])[::-1]
    return (1.0 - lams) * suffix


def weighted_reconstruction(g, phi, h_seed: float, start: int = 0) -> np.ndarray:
    """Invert the transform by the closed weighted form, entry by entry.

    Independent of :func:`reconstruct` (explicit weights and a dot product
    per entry, quadratic total cost); the two must agree to roundoff.
    """
    gg = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(gg)):
        raise ValueError("g must be finite-valued")
    phis = _phi_array(phi, start, gg.size)
    lams = phis / (1.0 + phis)
    h = np.empty(gg.size + 1)
    h[0] = h_seed
    for n in range(1, gg.size + 1):
        w = transform_weights(phis[:n], n)
        h[n] = float(w @ gg[:n]) + h_seed * float(np.prod(lams[:n]))
    return h


@dataclass(frozen=True, eq=False)
class DivergenceWitness:
    """Partial-sum evidence about the weight sequence up to a horizon.

    Each array holds running sums over the first ``count`` indices. The
    pointwise chain 1/(1+phi) >= min(1, 1/phi)/2 links divergence of
    sum 1/phi to divergence of sum (1 - lambda); ``log_weight_product``
    is sum log(lambda_k), finite even when the plain product underflows.
    """

    inv_phi: np.ndarray
    min1_inv_phi: np.ndarray
    inv_one_plus_phi: np.ndarray
    one_minus_lambda: np.ndarray
    chain_ok: bool
    log_weight_product: float

    @property
    def weight_product(self) -> float:
        return math.exp(self.log_weight_product)


def divergence_witness(phi, count: int, start: int = 0) -> DivergenceWitness:
    """Accumulate the divergence evidence for the first ``count`` weights."""
    if count < 1:
        raise ValueError("count must be >= 1")
    phis = _phi_array(phi, start, count)
    inv = 1.0 / phis
    lams = phis / (1.0 + phis)
    inv_one_plus = 1.0 / (1.0 + phis)
    chain_ok = bool(np.all(inv_one_plus >= 0.5 * np.minimum(1.0, inv) - 1e-15))
    return DivergenceWitness(
        inv_phi=np.cumsum(inv),
        min1_inv_phi=np.cumsum(np.minimum(1.0, inv)),
        inv_one_plus_phi=np.cumsum(inv_one_plus),
        one_minus_lambda=np.cumsum(1.0 - lams),
        chain_ok=chain_ok,
        log_weight_product=float(np.sum(np.log(lams))),
    )


@dataclass(frozen=True, eq=False)
class Scenario:
    """A (phi, h or g) pair with a known limit, for exercising the transform.

    ``h_closed``/``g_closed`` give whichever sequence has an explicit
    formula; the other side is derived by the transform or its inverse
    (``h_seed`` seeds the reconstruction when only g is explicit).
    ``expected_limit`` may be +-inf, in which case only hurdle exceedance
    is checkable at a finite horizon.
    """

    name: str
    start: int
    phi: Callable[[int], float]
    expected_limit: float
    provenance: str
    h_closed: Optional[Callable[[int], float]] = None
    g_closed: Optional[Callable[[int], float]] = None
    h_seed: Optional[float] = None

    def h_values(self, count: int) -> np.ndarray:
        """h over absolute indices start..start+count-1."""
        if count < 1:
            raise ValueError("count must be >= 1")
        if self.h_closed is not None:
            return np.array([self.h_closed(k) for k in range(self.start, self.start + count)])
        if count == 1:
            return np.array([float(self.h_seed)])
        return reconstruct(self.g_values(count - 1), self.phi, self.h_seed, start=self.start)

    def g_values(self, count: int) -> np.ndarray:
        """g over absolute indices start..start+count-1."""
        if count < 1:
            raise ValueError("count must be >= 1")
        if self.g_closed is not None:
            return np.array([self.g_closed(k) for k in range(self.start, self.start + count)])
        return forward_transform(self.h_values(count + 1), self.phi, start=self.start)


def _ex42(ell: float) -> Scenario:
    return Scenario(
        name="ex42",
        start=1,
        phi=float,
        expected_limit=ell,
        provenance="alternating 1/k perturbation of the limit; the transform "
        "oscillates with amplitude 2 while h still settles",
        h_closed=lambda k: ell + (-1.0) ** k / k,
    )


def _ex43(ell: float) -> Scenario:
    return Scenario(
        name="ex43",
        start=1,
        phi=float,
        expected_limit=ell,
        provenance="alternating 1/sqrt(k) perturbation; the transform is unbounded",
        h_closed=lambda k: ell + (-1.0) ** k / math.sqrt(k),
    )


def _ex44(ell: float) -> Scenario:
    return Scenario(
        name="ex44-sinh",
        start=1,
        phi=lambda k: float(k) ** 2,
        expected_limit=math.pi / math.sinh(math.pi),
        provenance="h is the partial product of j^2/(1+j^2), whose limit is the "
        "reciprocal of the classical Euler product for sinh(pi)/pi; g is "
        "identically 0, so limit transfer fails when sum 1/phi converges",
        g_closed=lambda k: 0.0,
        h_seed=1.0,
    )


def _linf_plus(ell: float) -> Scenario:
    return Scenario(
        name="linf-plus",
        start=1,
        phi=float,
        expected_limit=math.inf,
        provenance="g_k = k grows without bound and the averaged h follows, "
        "clearing any fixed hurdle",
        g_closed=float,
        h_seed=0.0,
    )


def _linf_minus(ell: float) -> Scenario:
    return Scenario(
        name="linf-minus",
        start=1,
        phi=float,
        expected_limit=-math.inf,
        provenance="negation of the unbounded-growth scenario",
        g_closed=lambda k: -float(k),
        h_seed=0.0,
    )


_SCENARIOS = {
    "ex42": _ex42,
    "ex43": _ex43,
    "ex44-sinh": _ex44,
    "linf-plus": _linf_plus,
    "linf-minus": _linf_minus,
}

SCENARIO_NAMES = tuple(sorted(_SCENARIOS))


def get_scenario(name: str, ell: float = 1.0) -> Scenario:
    """Look up a bundled scenario; ``ell`` sets the limit where it is free."""
    if name not in _SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; known: {list(SCENARIO_NAMES)}")
    return _SCENARIOS[name](ell)

"""Post-hoc trace analysis.

"Converges" is operationalized as a finite tail proxy: the oscillation
(max minus min) of the last ``window`` values must not exceed a tolerance,
and the limit estimate is the mean over that window. All other checks in
this module are exact algebraic identities evaluated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .problem import as_vector
from .solver import Trace

__all__ = [
    "ScalarSeq",
    "ConvergenceVerdict",
    "verdict",
    "inner_product_seq",
    "momentum_identity_residual",
    "orthonormal_span_basis",
    "span_projection",
    "ClusterProductReport",
    "cluster_inner_product_check",
    "xi_difference",
]

DEFAULT_WINDOW = 100
DEFAULT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ScalarSeq:
    """A scalar sequence indexed contiguously from ``start``."""

    values: np.ndarray
    start: int = 0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Finite-tail convergence proxy for a scalar sequence.

    ``converged`` holds iff the tail is finite and its oscillation is at
    most ``tol``; ``limit_estimate`` is the tail mean (NaN for a
    non-finite tail).
    """

    converged: bool
    limit_estimate: float
    tail_oscillation: float
    window: int
    tol: float
    finite_tail: bool = True


def verdict(seq: ScalarSeq, window: int = DEFAULT_WINDOW, tol: float = DEFAULT_TOL) -> ConvergenceVerdict:
    """Judge a sequence by the oscillation of its last ``window`` values.

    Requires 2 <= window <= len(seq) / 2 so the tail is a genuine tail. A
    non-finite value in the window yields a not-converged verdict with the
    ``finite_tail`` flag cleared, never an exception.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if 2 * window > len(seq):
        raise ValueError(f"window {window} too long for a sequence of {len(seq)} values")
    if not tol >= 0:
        raise ValueError("tol must be nonnegative")
    tail = seq.values[-window:]
    if not np.all(np.isfinite(tail)):
        return ConvergenceVerdict(
            converged=False,
            limit_estimate=math.nan,
            tail_oscillation=math.inf,
            window=window,
            tol=tol,
            finite_tail=False,
        )
    oscillation = float(tail.max() - tail.min())
    return ConvergenceVerdict(
        converged=oscillation <= tol,
        limit_estimate=float(tail.mean()),
        tail_oscillation=oscillation,
        window=window,
        tol=tol,
    )


def inner_product_seq(trace: Trace, which: str, d) -> ScalarSeq:
    """The sequence <v_k, d> for v in {x, y, z} along a trace."""
    if which not in ("x", "y", "z"):
        raise ValueError(f"which must be one of 'x', 'y', 'z', got {which!r}")
    trace.require_vectors()
    vectors = {"x": trace.xs, "y": trace.ys, "z": trace.zs}[which]
    dd = as_vector(d, vectors.shape[1])
    return ScalarSeq(values=vectors @ dd, start=0, label=f"<{which}_k, d>")


def momentum_identity_residual(trace: Trace, d) -> float:
    """Max residual of the scalar momentum identity along direction d.

    With h_k = <x_k, d>, the combination h_{k+1} + (t_k - 1)(h_{k+1} - h_k)
    must equal <z_{k+1}, d> for every k; the identity is linear in d.
    """
    trace.require_vectors()
    dd = as_vector(d, trace.xs.shape[1])
    h = trace.xs @ dd
    t = trace.ts[:-1]
    g = h[1:] + (t - 1.0) * (h[1:] - h[:-1])
    return float(np.max(np.abs(g - trace.zs[1:] @ dd)))


def orthonormal_span_basis(vectors: Sequence, drop_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of span(vectors), rows orthonormal.

    Classical Gram-Schmidt with a second re-orthogonalization pass.
    Vectors whose residual after orthogonalization is below
    ``drop_tol * max(1, ||v||)`` are dropped as linearly dependent; an
    input without a single independent vector is an error.
    """
    if len(vectors) == 0:
        raise ValueError("need at least one spanning vector")
    rows = [as_vector(v) for v in vectors]
    dim = rows[0].size
    basis: list = []
    for v in rows:
        if v.size != dim:
            raise ValueError("spanning vectors must share a dimension")
        r = v.copy()
        for _ in range(2):  # re-orthogonalize to recover CGS accuracy loss
            for b in basis:
                r -= (r @ b) * b
        norm = float(np.linalg.norm(r))
        if norm > drop_tol * max(1.0, float(np.linalg.norm(v))):
            basis.append(r / norm)
    if not basis:
        raise ValueError("spanning set has no vector above the rank tolerance")
    return np.array(basis)


def span_projection(vectors: Sequence, xs: Sequence) -> list:
    """Orthogonal projection of each x onto span(vectors)."""
    basis = orthonormal_span_basis(vectors)
    return [basis.T @ (basis @ as_vector(x, basis.shape[1])) for x in xs]


@dataclass(frozen=True)
class ClusterProductReport:
    """Verdicts for <x_k, w1 - w2> over candidate cluster-point pairs."""

    entries: list = field(default_factory=list)  # (label, ConvergenceVerdict)

    @property
    def consistent(self) -> bool:
        return all(v.converged for _, v in self.entries)


def cluster_inner_product_check(
    trace: Trace,
    cluster_pairs: Sequence,
    window: int = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
) -> ClusterProductReport:
    """Verdict on <x_k, w1 - w2> for each supplied pair of cluster points.

    All verdicts converged means the trace is consistent with iterate
    convergence in every probed direction.
    """
    entries = []
    for i, (w1, w2) in enumerate(cluster_pairs):
        d = as_vector(w1) - as_vector(w2)
        seq = inner_product_seq(trace, "x", d)
        entries.append((f"pair{i}", verdict(seq, window=window, tol=tol)))
    return ClusterProductReport(entries=entries)


def xi_difference(trace: Trace, i: int = 0, j: int = 1) -> ScalarSeq:
    """The sequence xi_k(s_i) - xi_k(s_j) from k = 1 (gap terms cancel)."""
    if trace.xi is None:
        raise ValueError("trace has no xi columns (optimal value unknown or no s_refs)")
    cols = trace.xi.shape[1]
    if not (0 <= i < cols and 0 <= j < cols):
        raise IndexError(f"xi column out of range 0..{cols - 1}")
    return ScalarSeq(values=trace.xi[1:, i] - trace.xi[1:, j], start=1, label=f"xi[s{i}]-xi[s{j}]")

"""The labeling engine: distance -> likelihood -> similarity -> replicator.

An assignment matrix W holds one strictly positive probability row per
pixel.  Each iteration lifts the (mean-centered, negated) distance rows
onto the simplex at the current assignment (likelihood), geometrically
averages likelihood rows over spatial windows (similarity), and applies
the multiplicative replicator update, which drives every row toward a
unit vector.  Iteration stops once the average row entropy falls below
a threshold, i.e. the labeling is near-integral.

One iteration is a pure function of the previous matrix (Jacobi style:
all rows are computed from the same snapshot), so rows may be computed
concurrently and results are independent of the worker count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import backend, means
from .grid import GridGraph

__all__ = [
    "FlowConfig",
    "FlowResult",
    "TraceRow",
    "init_uniform",
    "likelihood",
    "similarity",
    "replicator_step",
    "normalize_rows",
    "average_entropy",
    "objective",
    "labels",
    "run_flow",
]

EPSILON_FLOOR = 1e-10


@dataclass(frozen=True)
class FlowConfig:
    """Parameters of one flow run.

    rho is the distance scale used by whoever builds the distance
    matrix; it is carried here so a config fully describes a run.
    mean_mode selects the similarity averaging: "approximate" is the
    closed-form geometric mean (production), "exact" the iterative
    Riemannian mean (slow, reference only).  bypass_averaging sets
    S = L, used when neighboring pixels are expected to take different
    labels.
    """

    rho: float = 1.0
    entropy_tol: float = 1e-3
    max_iterations: int = 1000
    epsilon_floor: float = EPSILON_FLOOR
    mean_mode: str = "approximate"
    bypass_averaging: bool = False

    def __post_init__(self):
        if self.rho <= 0.0 or self.entropy_tol <= 0.0 or self.epsilon_floor <= 0.0:
            raise ValueError("rho, entropy_tol and epsilon_floor must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if self.mean_mode not in ("approximate", "exact"):
            raise ValueError("mean_mode must be 'approximate' or 'exact'")


class TraceRow(NamedTuple):
    iteration: int
    entropy: float
    objective: float


@dataclass
class FlowResult:
    assignment: np.ndarray
    trace: list[TraceRow]
    converged: bool
    iterations: int


def init_uniform(m: int, n: int) -> np.ndarray:
    """Uninformative start: every row is the barycenter (1/n, ..., 1/n)."""
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    return np.full((m, n), 1.0 / n)


def _check_shapes(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def likelihood(W: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Lift the distance rows onto the simplex at the current assignment.

    Per row: center the distances, U_i = D_i - mean(D_i), then
    L_i = W_i * exp(-U_i) / <W_i, exp(-U_i)>.  A constant distance row
    (an uninformative datum) leaves the assignment row unchanged.
    """
    W = np.ascontiguousarray(W, dtype=float)
    D = np.ascontiguousarray(D, dtype=float)
    _check_shapes(W, D)
    negu = D.mean(axis=1, keepdims=True) - D
    out = np.empty_like(W)
    backend.run_rows(backend.kernels.lift_rows, W.shape[0], W, negu, out)
    return out


def similarity(L: np.ndarray, g: GridGraph, mean_mode: str = "approximate") -> np.ndarray:
    """Average likelihood rows over each pixel's window.

    approximate mode: normalized componentwise geometric mean, computed
    as the softmax of the windowed mean of log L (the production path).
    exact mode: iterative Riemannian mean per pixel; may raise
    means.MeanConvergenceError.
    """
    L = np.ascontiguousarray(L, dtype=float)
    if L.shape[0] != g.n_nodes:
        raise ValueError(f"matrix has {L.shape[0]} rows for a {g.n_nodes}-node grid")
    if g.window_radius == 0:
        return L.copy()
    if mean_mode == "approximate":
        logl = np.log(L)
        M = np.empty_like(L)
        backend.run_rows(
            backend.kernels.window_log_mean,
            g.height,
            logl,
            g.height,
            g.width,
            g.window_radius,
            M,
        )
        out = np.empty_like(L)
        backend.run_rows(backend.kernels.softmax_rows, L.shape[0], M, out)
        return out
    if mean_mode == "exact":
        out = np.empty_like(L)
        for i in range(g.n_nodes):
            out[i] = means.karcher_mean(L[g.neighborhood(i)])
        return out
    raise ValueError("mean_mode must be 'approximate' or 'exact'")


def replicator_step(
    W: np.ndarray, S: np.ndarray, epsilon_floor: float = EPSILON_FLOOR
) -> np.ndarray:
    """Multiplicative update W_i <- W_i * S_i / <W_i, S_i>, row-renormalized.

    Rows whose smallest entry falls below epsilon_floor are rectified as
    in :func:`normalize_rows`; pass epsilon_floor=0 to skip that.
    Matrices with unit-vector-like rows are (near) fixed points.
    """
    W = np.ascontiguousarray(W, dtype=float)
    S = np.ascontiguousarray(S, dtype=float)
    _check_shapes(W, S)
    out = np.empty_like(W)
    backend.run_rows(
        backend.kernels.replicator_rows, W.shape[0], W, S, float(epsilon_floor), out
    )
    return out


def normalize_rows(W: np.ndarray, epsilon_floor: float = EPSILON_FLOOR) -> np.ndarray:
    """Rectify rows with entries below the floor.

    For each row with min entry < eps: shift by (eps - min) and
    renormalize to unit sum; other rows are returned untouched.  The
    floor plays the role of zero, keeping rows strictly inside the
    simplex as they approach a vertex.
    """
    W = np.ascontiguousarray(W, dtype=float)
    out = np.empty_like(W)
    backend.run_rows(backend.kernels.floor_rows, W.shape[0], W, float(epsilon_floor), out)
    return out


def average_entropy(W: np.ndarray) -> float:
    """Mean Shannon entropy of the rows (natural log), in [0, log n]."""
    W = np.asarray(W, dtype=float)
    return float(-(W * np.log(W)).sum() / W.shape[0])


def objective(W: np.ndarray, S: np.ndarray) -> float:
    """Correlation <S, W> (Frobenius inner product); supremum m at labelings."""
    W = np.asarray(W, dtype=float)
    S = np.asarray(S, dtype=float)
    _check_shapes(W, S)
    return float(np.sum(S * W))


def labels(W: np.ndarray) -> np.ndarray:
    """Per-row argmax; ties resolve to the smallest index."""
    return np.argmax(np.asarray(W), axis=1)


def run_flow(
    D_source,
    g: GridGraph,
    cfg: FlowConfig = FlowConfig(),
    trace_sink: Callable[[TraceRow, np.ndarray], None] | None = None,
    n_labels: int | None = None,
) -> FlowResult:
    """Iterate the assignment flow from the uniform start to a labeling.

    D_source is either a fixed (m, n) distance matrix (already scaled by
    1/rho) or a callable W -> D for assignment-dependent distances; in
    the latter case n_labels must be given.  Each iteration recomputes D
    (for callables), the likelihood and the similarity from the same
    snapshot of W, records (iteration, entropy, objective), and stops as
    soon as the average entropy of W is at most cfg.entropy_tol.  The
    trace has iterations + 1 rows, the first describing the uniform
    initialization.  trace_sink, when given, additionally receives every
    trace row together with the current assignment (read-only).

    A run that hits max_iterations returns converged=False with the last
    iterate.
    """
    if callable(D_source):
        if n_labels is None:
            raise ValueError("n_labels is required when D_source is a callable")
        n = int(n_labels)
    else:
        D_source = np.ascontiguousarray(D_source, dtype=float)
        n = D_source.shape[1]
        if D_source.shape[0] != g.n_nodes:
            raise ValueError(
                f"distance matrix has {D_source.shape[0]} rows "
                f"for a {g.n_nodes}-node grid"
            )
    if n > 1 and cfg.entropy_tol >= np.log(n):
        raise ValueError("entropy_tol must be below log(n_labels)")

    m = g.n_nodes
    W = init_uniform(m, n)
    trace: list[TraceRow] = []
    converged = False
    k = 0
    while True:
        D = D_source(W) if callable(D_source) else D_source
        L = likelihood(W, D)
        S = L if cfg.bypass_averaging else similarity(L, g, cfg.mean_mode)
        row = TraceRow(k, average_entropy(W), objective(W, S))
        trace.append(row)
        if trace_sink is not None:
            trace_sink(row, W)
        if row.entropy <= cfg.entropy_tol:
            converged = True
            break
        if k >= cfg.max_iterations:
            break
        W = replicator_step(W, S, cfg.epsilon_floor)
        k += 1
    return FlowResult(W, trace, converged, k)

"""assignflow: image labeling by replicator dynamics on the assignment manifold.

Data are assigned to prior features by evolving a row-stochastic
assignment matrix under spatially coupled multiplicative updates with
geometric averaging, terminating at a near-integral labeling.
"""

from .backend import BACKEND_NAME, HAVE_COMPILED
from .core import (
    FlowConfig,
    FlowResult,
    average_entropy,
    init_uniform,
    labels,
    likelihood,
    normalize_rows,
    objective,
    replicator_step,
    run_flow,
    similarity,
)
from .features import FeatureImage, PriorSet
from .grid import GridGraph, PatchSupport, gaussian_patch_weights
from .means import MeanConfig, MeanConvergenceError, geometric_mean_approx, karcher_mean

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "HAVE_COMPILED",
    "FlowConfig",
    "FlowResult",
    "FeatureImage",
    "PriorSet",
    "GridGraph",
    "PatchSupport",
    "MeanConfig",
    "MeanConvergenceError",
    "average_entropy",
    "gaussian_patch_weights",
    "geometric_mean_approx",
    "init_uniform",
    "karcher_mean",
    "labels",
    "likelihood",
    "normalize_rows",
    "objective",
    "replicator_step",
    "run_flow",
    "similarity",
    "__version__",
]

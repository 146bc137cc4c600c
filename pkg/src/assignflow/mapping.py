"""Synthesis of outputs from an optimal assignment.

The assignment matrix is evaluated as-is, without rounding: the
synthesized value at a pixel is the convex combination of prior
features weighted by its assignment row (and, for patch priors, a
second convex combination over the patches covering the pixel).  The
residual f - u completes an additive decomposition of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridGraph, PatchSupport
from .features import FeatureImage, PriorSet

__all__ = ["LabeledOutput", "vector_assignment", "patch_assignment", "decompose"]


@dataclass(frozen=True)
class LabeledOutput:
    """Synthesized image u, per-pixel label map, and residual f - u."""

    assigned: np.ndarray
    label_map: np.ndarray
    residual: np.ndarray


def vector_assignment(W: np.ndarray, priors: PriorSet) -> np.ndarray:
    """Expected prior vector per pixel, u_i = sum_j W_ij f*_j."""
    if priors.is_patches:
        raise ValueError("use patch_assignment for patch priors")
    W = np.asarray(W, dtype=float)
    if W.shape[1] != priors.n_items:
        raise ValueError(
            f"assignment has {W.shape[1]} columns for {priors.n_items} priors"
        )
    return W @ priors.items


def patch_assignment(
    W: np.ndarray, priors: PriorSet, g: GridGraph, support: PatchSupport
) -> np.ndarray:
    """Fuse the expected patches of all patches covering each pixel.

    Every center j predicts the patch E_j = sum_k W_jk f*_k; the value
    at pixel i is the weighted average of the predictions E_j[o] of all
    centers j = i - o whose (clipped, renormalized) support reaches i,
    with the Gaussian support weights.  For interior pixels the weights
    already sum to one, so the leading normalization is a no-op there.

    Assignments over prior classes (W with one column per class) are
    expanded by spreading each class weight uniformly over its members.
    """
    W = np.asarray(W, dtype=float)
    if priors.offsets is None or support.offsets.shape != priors.offsets.shape or np.any(
        support.offsets != priors.offsets
    ):
        raise ValueError("patch support does not match the prior dictionary")
    if W.shape[1] == priors.n_items:
        E = W @ priors.items  # (m, k) expected patch per center
    elif priors.class_of is not None and W.shape[1] == priors.n_classes:
        member_share = np.zeros((priors.n_classes, priors.n_items))
        for c in range(priors.n_classes):
            members = priors.class_members(c)
            member_share[c, members] = 1.0 / members.size
        E = W @ member_share @ priors.items
    else:
        raise ValueError(
            f"assignment has {W.shape[1]} columns for {priors.n_items} priors"
            f" ({priors.n_classes} classes)"
        )

    h, w = g.height, g.width
    if W.shape[0] != h * w:
        raise ValueError("assignment rows do not match the grid")

    # Per-center weight normalizer over the clipped support (1 inside).
    ys, xs = np.divmod(np.arange(h * w), w)
    norm = np.zeros(h * w)
    for a, (dy, dx) in enumerate(support.offsets):
        ok = (ys + dy >= 0) & (ys + dy < h) & (xs + dx >= 0) & (xs + dx < w)
        norm[ok] += support.weights[a]

    num = np.zeros(h * w)
    den = np.zeros(h * w)
    Eg = E.reshape(h, w, -1)
    ng = norm.reshape(h, w)
    for a, (dy, dx) in enumerate(support.offsets):
        # contribution of centers at (y-dy, x-dx) to pixels (y, x)
        ty0, ty1 = max(0, dy), min(h, h + dy)
        tx0, tx1 = max(0, dx), min(w, w + dx)
        if ty0 >= ty1 or tx0 >= tx1:
            continue
        src_y = slice(ty0 - dy, ty1 - dy)
        src_x = slice(tx0 - dx, tx1 - dx)
        wgt = support.weights[a] / ng[src_y, src_x]
        num.reshape(h, w)[ty0:ty1, tx0:tx1] += wgt * Eg[src_y, src_x, a]
        den.reshape(h, w)[ty0:ty1, tx0:tx1] += wgt
    return num / den


def decompose(f: FeatureImage, u: np.ndarray) -> np.ndarray:
    """Residual v = f - u pointwise; zero at missing pixels."""
    flat = f.flat()
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape != flat.shape:
        raise ValueError(f"shape mismatch: image {flat.shape} vs u {u.shape}")
    v = flat - u
    mask = f.flat_mask()
    if mask is not None:
        v[mask] = 0.0
    return v

"""Bundled synthetic instance generators.

The experiment scenarios are generated, not shipped: a block mosaic
with vertex-encoded labels and label noise, a three-wedge junction with
a masked disk for inpainting, uniform RGB noise for self-assignment,
and small two-level patch dictionaries (step edges; oriented ridges
with orientation classes).  All generators are deterministic in their
seed.
"""

from __future__ import annotations

import colorsys

import numpy as np

from .features import FeatureImage, PriorSet

__all__ = [
    "block_label_field",
    "randomize_labels",
    "vertex_instance",
    "color_palette",
    "color_instance",
    "triple_point_instance",
    "uniform_noise_image",
    "step_edge_dictionary",
    "step_edge_image",
    "oriented_ridge_dictionary",
    "ridge_image",
]


def block_label_field(
    height: int, width: int, n_labels: int = 31, blocks_per_side: int = 6
) -> np.ndarray:
    """Rectangular mosaic: blocks_per_side^2 tiles cycling through labels."""
    ys = np.arange(height) * blocks_per_side // height
    xs = np.arange(width) * blocks_per_side // width
    return (ys[:, None] * blocks_per_side + xs[None, :]) % n_labels


def randomize_labels(
    labels: np.ndarray, fraction: float, n_labels: int, seed: int
) -> np.ndarray:
    """Replace a fraction of the entries with uniformly random labels."""
    rng = np.random.default_rng(seed)
    out = labels.copy()
    hit = rng.random(labels.shape) < fraction
    out[hit] = rng.integers(0, n_labels, size=int(hit.sum()))
    return out


def vertex_instance(
    height: int = 64,
    width: int = 64,
    n_labels: int = 31,
    noise_fraction: float = 0.2,
    seed: int = 1,
):
    """Label mosaic with vertex-encoded features and label noise.

    Every label is encoded as a unit vector of length n_labels, so
    under the plain l1 distance all distinct labels are equidistant and
    the distances carry no color bias (use
    :func:`vertex_distance_matrix` for that convention).  Returns
    (feature image, priors, true labels, noisy labels).
    """
    truth = block_label_field(height, width, n_labels)
    noisy = randomize_labels(truth, noise_fraction, n_labels, seed)
    feats = np.eye(n_labels)[noisy]
    priors = PriorSet(np.eye(n_labels))
    return FeatureImage(feats), priors, truth, noisy


def vertex_distance_matrix(noisy_labels: np.ndarray, n_labels: int, rho: float) -> np.ndarray:
    """Plain l1 distances between vertex encodings, D_ij = |e_c_i - e_j|_1 / rho.

    Distinct labels all sit at distance 2, matching labels at 0.
    """
    onehot = np.eye(n_labels)[noisy_labels.ravel()]
    return 2.0 * (1.0 - onehot) / rho


def color_palette(n_colors: int) -> np.ndarray:
    """Distinct 8-bit RGB colors on an HSV wheel, (n, 3) uint8."""
    out = np.empty((n_colors, 3), dtype=np.uint8)
    for k in range(n_colors):
        h = k / n_colors
        s = 0.85 if k % 2 == 0 else 0.55
        v = 0.95 if (k // 2) % 2 == 0 else 0.65
        rgb = colorsys.hsv_to_rgb(h, s, v)
        out[k] = np.round(np.array(rgb) * 255.0)
    if len({tuple(c) for c in out}) != n_colors:
        raise ValueError(f"palette of {n_colors} colors is not distinct")
    return out


def color_instance(
    height: int = 64,
    width: int = 64,
    n_labels: int = 31,
    noise_fraction: float = 0.2,
    seed: int = 0,
):
    """RGB variant of :func:`vertex_instance` for the file-based pipeline.

    Returns (clean uint8 image, noisy uint8 image, palette, true labels).
    """
    truth = block_label_field(height, width, n_labels)
    noisy = randomize_labels(truth, noise_fraction, n_labels, seed)
    palette = color_palette(n_labels)
    return palette[truth], palette[noisy], palette, truth


def triple_point_instance(size: int = 48, disk_radius: float = 10.0):
    """Three wedges meeting at the center, with a masked disk around it.

    Returns (feature image with mask, priors, wedge labels, mask).  The
    wedges carry the pure colors red, green and blue; inside the disk
    the data are missing and must be filled by the labeling.
    """
    c = (size - 1) / 2.0
    ys, xs = np.mgrid[0:size, 0:size]
    angle = np.arctan2(ys - c, xs - c)
    wedge = ((angle + np.pi) // (2.0 * np.pi / 3.0)).astype(int) % 3
    colors = np.eye(3)
    img = colors[wedge]
    mask = (ys - c) ** 2 + (xs - c) ** 2 <= disk_radius**2
    return FeatureImage(img, mask=mask), PriorSet(colors), wedge, mask


def uniform_noise_image(height: int = 64, width: int = 64, seed: int = 0) -> np.ndarray:
    """Uniform RGB noise in [0, 1], (H, W, 3)."""
    rng = np.random.default_rng(seed)
    return rng.random((height, width, 3))


def _patch_offsets(patch_radius: int) -> np.ndarray:
    dy, dx = np.mgrid[-patch_radius : patch_radius + 1, -patch_radius : patch_radius + 1]
    return np.stack([dy.ravel(), dx.ravel()], axis=1)


def step_edge_dictionary(
    patch_radius: int = 1, low: float = 0.2, high: float = 0.8
) -> PriorSet:
    """Two-level step-edge templates: all translations of a vertical and a
    horizontal edge through the patch (includes the two constants)."""
    offsets = _patch_offsets(patch_radius)
    items = []
    for axis in (1, 0):  # vertical then horizontal edges
        for s in range(-patch_radius, patch_radius + 2):
            items.append(np.where(offsets[:, axis] >= s, high, low))
            items.append(np.where(offsets[:, axis] >= s, low, high))
    uniq = []
    for it in items:
        if not any(np.array_equal(it, u) for u in uniq):
            uniq.append(it)
    return PriorSet(np.array(uniq), offsets=offsets)


def step_edge_image(
    height: int = 24,
    width: int = 24,
    low: float = 0.2,
    high: float = 0.8,
    noise: float = 0.05,
    seed: int = 0,
) -> np.ndarray:
    """Densely striped two-level image: vertical stripes on the left half,
    horizontal stripes on the right, so every patch sees a transition."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width]
    vertical = (xs // 2) % 2 == 0
    horizontal = (ys // 2) % 2 == 0
    img = np.where(np.where(xs < width // 2, vertical, horizontal), high, low)
    return np.clip(img + noise * rng.standard_normal(img.shape), 0.0, 1.0)


def oriented_ridge_dictionary(
    patch_radius: int = 1, n_orientations: int = 12, f_dark: float = 0.25, f_bright: float = 0.75
) -> PriorSet:
    """Two-level transition patches grouped into orientation classes.

    For each orientation, the class members are the translations of a
    half-plane transition from f_dark to f_bright; one constant
    (all-ones) template forms the final class, whose level adapts to
    the data at comparison time.
    """
    offsets = _patch_offsets(patch_radius)
    items, classes = [], []
    shifts = np.arange(-patch_radius, patch_radius + 1)
    for k in range(n_orientations):
        theta = np.pi * k / n_orientations
        proj = offsets[:, 1] * np.cos(theta) + offsets[:, 0] * np.sin(theta)
        members = set()
        for s in shifts:
            tmpl = np.where(proj >= s - 0.25, f_bright, f_dark)
            members.add(tuple(tmpl))
        for tmpl in sorted(members):
            items.append(np.array(tmpl))
            classes.append(k)
    items.append(np.ones(offsets.shape[0]))
    classes.append(n_orientations)
    return PriorSet(np.array(items), offsets=offsets, class_of=np.array(classes))


def ridge_image(
    height: int = 32,
    width: int = 32,
    period: float = 6.0,
    f_dark: float = 0.25,
    f_bright: float = 0.75,
    noise: float = 0.03,
    seed: int = 0,
) -> np.ndarray:
    """Two-level ridge pattern whose orientation differs between halves."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:height, 0:width]
    left = np.sin(2.0 * np.pi * xs / period)
    right = np.sin(2.0 * np.pi * (xs + ys) / (period * np.sqrt(2.0)))
    wave = np.where(xs < width // 2, left, right)
    img = np.where(wave >= 0.0, f_bright, f_dark)
    return np.clip(img + noise * rng.standard_normal(img.shape), 0.0, 1.0)

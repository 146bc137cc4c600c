"""Feature spaces, prior sets and the distance functions between them.

Data enter the labeling engine only through an m x n matrix of scaled
distances between per-pixel features and n prior features.  Priors are
either plain vectors (colors, feature descriptors) or square grayscale
patches; patch priors may be grouped into equivalence classes, in which
case the per-class distance is the minimum over class members and
labeling runs over classes.

Pixels flagged as missing (inpainting) get a constant distance row:
by the shift invariance of the likelihood lift a constant row carries
no information, so the surrounding labels take over.

Distances may also depend on the current assignment; the rectangle
scenario below is the bundled example (coverage reward plus a pairwise
intersection penalty, with a constant-cost "none" label).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import GridGraph
from . import pnm

__all__ = [
    "PriorSet",
    "FeatureImage",
    "RectangleScenario",
    "scaled_l1_distance",
    "build_distance_matrix",
    "pixel_patches",
    "patch_l1_distance",
    "two_value_adapted_distance",
    "fingerprint_constant_distance",
    "class_distance",
    "patch_distance_matrix",
    "rectangle_adaptive_distance",
    "generate_rectangle_scenario",
    "color_cube_priors",
    "save_priors_csv",
    "load_priors_csv",
    "save_patch_priors_json",
    "load_patch_priors_json",
    "load_mask_pgm",
    "coarse_median_background",
]


@dataclass(frozen=True)
class PriorSet:
    """Ordered prior features: (n, d) vectors or (n, k) patch values.

    For patches, offsets holds the k (dy, dx) positions shared by all
    items.  class_of optionally maps each item to an equivalence class;
    class indices must be contiguous from 0.
    """

    items: np.ndarray
    offsets: np.ndarray | None = None
    class_of: np.ndarray | None = None

    def __post_init__(self):
        items = np.atleast_2d(np.asarray(self.items, dtype=float))
        object.__setattr__(self, "items", items)
        if items.shape[0] < 1:
            raise ValueError("prior set must contain at least one item")
        if self.offsets is not None:
            off = np.asarray(self.offsets, dtype=int)
            if off.shape != (items.shape[1], 2):
                raise ValueError(
                    f"offsets shape {off.shape} does not match items {items.shape}"
                )
            object.__setattr__(self, "offsets", off)
        if self.class_of is not None:
            cls = np.asarray(self.class_of, dtype=int)
            if cls.shape != (items.shape[0],):
                raise ValueError("class_of must assign a class to every item")
            if sorted(set(cls.tolist())) != list(range(cls.max() + 1)):
                raise ValueError("class indices must be contiguous from 0")
            object.__setattr__(self, "class_of", cls)

    @property
    def n_items(self) -> int:
        return self.items.shape[0]

    @property
    def is_patches(self) -> bool:
        return self.offsets is not None

    @property
    def n_classes(self) -> int:
        if self.class_of is None:
            return self.n_items
        return int(self.class_of.max()) + 1

    def class_members(self, class_id: int) -> np.ndarray:
        if self.class_of is None:
            raise ValueError("prior set has no class grouping")
        members = np.flatnonzero(self.class_of == class_id)
        if members.size == 0:
            raise ValueError(f"class {class_id} is empty")
        return members


@dataclass(frozen=True)
class FeatureImage:
    """Per-pixel feature vectors on a grid, with an optional missing mask."""

    values: np.ndarray  # (H, W, d)
    mask: np.ndarray | None = None  # (H, W) bool, True = missing datum

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3:
            raise ValueError(f"expected (H, W, d) values, got shape {v.shape}")
        object.__setattr__(self, "values", v)
        if self.mask is not None:
            mk = np.asarray(self.mask, dtype=bool)
            if mk.shape != v.shape[:2]:
                raise ValueError("mask shape must match the image")
            object.__setattr__(self, "mask", mk)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1, self.dim)

    def flat_mask(self) -> np.ndarray | None:
        return None if self.mask is None else self.mask.ravel()


def scaled_l1_distance(f, f_star) -> float:
    """Dimension-normalized l1 distance (1/d) * |f - f*|_1."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(f_star, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: {f.shape} vs {g.shape}")
    return float(np.abs(f - g).mean())


def build_distance_matrix(
    img: FeatureImage, priors: PriorSet, metric=None, rho: float = 1.0
) -> np.ndarray:
    """Distance matrix D_ij = d(f_i, f*_j) / rho for vector priors.

    metric=None uses the dimension-normalized l1 distance, vectorized.
    Rows of pixels flagged missing are set to zero (constant rows are
    uninformative under the likelihood lift).
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if priors.is_patches:
        raise ValueError("use patch_distance_matrix for patch priors")
    feats = img.flat()
    P = priors.items
    if feats.shape[1] != P.shape[1]:
        raise ValueError(
            f"feature dim {feats.shape[1]} does not match priors dim {P.shape[1]}"
        )
    if metric is None:
        D = np.abs(feats[:, None, :] - P[None, :, :]).mean(axis=2)
    else:
        D = np.empty((feats.shape[0], P.shape[0]))
        for i in range(feats.shape[0]):
            for j in range(P.shape[0]):
                D[i, j] = metric(feats[i], P[j])
    mask = img.flat_mask()
    if mask is not None:
        D[mask] = 0.0
    return D / rho


# ---------------------------------------------------------------------------
# patch distances


def pixel_patches(gray: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-pixel patch values, (m, k); offsets leaving the image are NaN."""
    gray = np.asarray(gray, dtype=float)
    h, w = gray.shape
    m = h * w
    k = offsets.shape[0]
    ys, xs = np.divmod(np.arange(m), w)
    out = np.full((m, k), np.nan)
    for a, (dy, dx) in enumerate(offsets):
        yy = ys + dy
        xx = xs + dx
        ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        out[ok, a] = gray[yy[ok], xx[ok]]
    return out


def patch_l1_distance(img_patch, prior_patch) -> float:
    """Mean absolute deviation over the clipped support.

    NaN entries of img_patch mark offsets clipped at the image border;
    they are excluded and the normalization uses the clipped size.
    """
    a = np.asarray(img_patch, dtype=float).ravel()
    b = np.asarray(prior_patch, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"support mismatch: {a.shape} vs {b.shape}")
    valid = ~np.isnan(a)
    return float(np.abs(a[valid] - b[valid]).mean())


def _median_split(values: np.ndarray) -> tuple[float, float]:
    """Low/high levels of a patch: medians of the two median-split halves.

    All-equal patches give low = high = that value; if no entry lies
    strictly below the median the low level falls back to the median.
    """
    med = float(np.median(values))
    lower = values[values < med]
    upper = values[values >= med]
    high = float(np.median(upper)) if upper.size else med
    low = float(np.median(lower)) if lower.size else med
    return low, high


def _binary_slots(template: np.ndarray) -> np.ndarray:
    """Low/high slot indicators of a two-valued template; constants are low."""
    span = float(template.max() - template.min())
    if span == 0.0:
        return np.zeros_like(template)
    return (template - template.min()) / span


def two_value_adapted_distance(img_patch, binary_template) -> float:
    """Distance to a two-level template after adapting its levels to the data.

    The template marks each offset as a low or high slot (any two
    distinct values work); the levels substituted are the medians of the
    patch values below / at-or-above the patch median.  Returns the mean
    absolute deviation to the adapted template over the clipped support.
    """
    a = np.asarray(img_patch, dtype=float).ravel()
    t = np.asarray(binary_template, dtype=float).ravel()
    if a.shape != t.shape:
        raise ValueError(f"support mismatch: {a.shape} vs {t.shape}")
    valid = ~np.isnan(a)
    vals = a[valid]
    low, high = _median_split(vals)
    adapted = low + (high - low) * _binary_slots(t)[valid]
    return float(np.abs(vals - adapted).mean())


def fingerprint_constant_distance(img_patch, f_dark: float, f_bright: float) -> float:
    """Distance to a constant patch at the dark or bright reference level.

    The level is chosen by thresholding the patch median at the midpoint
    of (f_dark, f_bright).
    """
    if not f_dark < f_bright:
        raise ValueError("f_dark must be below f_bright")
    a = np.asarray(img_patch, dtype=float).ravel()
    vals = a[~np.isnan(a)]
    level = f_dark if np.median(vals) <= 0.5 * (f_dark + f_bright) else f_bright
    return float(np.abs(vals - level).mean())


def class_distance(img_patch, priors: PriorSet, class_id: int, dist=patch_l1_distance) -> float:
    """Minimum distance from a patch to any member of a prior class."""
    members = priors.class_members(class_id)
    return min(dist(img_patch, priors.items[j]) for j in members)


def patch_distance_matrix(
    img: FeatureImage,
    priors: PriorSet,
    rho: float = 1.0,
    adapt: str = "none",
    f_dark: float | None = None,
    f_bright: float | None = None,
    reduce_classes: bool = True,
) -> np.ndarray:
    """Distance matrix between per-pixel patches and patch priors.

    adapt selects the comparison rule:
       "none"        plain clipped-support l1 for every template;
       "two-value"   every template is binary and its two levels are
                     re-fitted to each data patch (median split);
       "fingerprint" constant templates use the dark/bright level rule
                     (f_dark, f_bright required), all others plain l1.

    When the prior set defines classes and reduce_classes is set, the
    returned matrix has one column per class holding the minimum over
    the class members.  Missing pixels get zero rows.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if not priors.is_patches:
        raise ValueError("prior set does not hold patches")
    if img.dim != 1:
        raise ValueError("patch distances expect scalar-valued images")
    if adapt not in ("none", "two-value", "fingerprint"):
        raise ValueError(f"unknown adaptation mode {adapt!r}")

    P = pixel_patches(img.values[:, :, 0], priors.offsets)  # (m, k)
    T = priors.items  # (n, k)
    valid = ~np.isnan(P)
    counts = valid.sum(axis=1)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if adapt == "two-value":
            med = np.nanmedian(P, axis=1, keepdims=True)
            low = np.nanmedian(np.where(P < med, P, np.nan), axis=1)
            high = np.nanmedian(np.where(P >= med, P, np.nan), axis=1)
            low = np.where(np.isnan(low), med[:, 0], low)
            high = np.where(np.isnan(high), med[:, 0], high)
            slots = np.array([_binary_slots(t) for t in T])
            adapted = low[:, None, None] + (high - low)[:, None, None] * slots[None, :, :]
            diff = np.abs(P[:, None, :] - adapted)
        elif adapt == "fingerprint":
            if f_dark is None or f_bright is None:
                raise ValueError("fingerprint adaptation needs f_dark and f_bright")
            if not f_dark < f_bright:
                raise ValueError("f_dark must be below f_bright")
            med = np.nanmedian(P, axis=1)
            level = np.where(med <= 0.5 * (f_dark + f_bright), f_dark, f_bright)
            constant = np.ptp(T, axis=1) == 0.0
            target = np.where(
                constant[None, :, None],
                level[:, None, None] * T[None, :, :],
                T[None, :, :],
            )
            diff = np.abs(P[:, None, :] - target)
        else:
            diff = np.abs(P[:, None, :] - T[None, :, :])
        D = np.nansum(np.where(valid[:, None, :], diff, np.nan), axis=2)
    D /= counts[:, None]

    if priors.class_of is not None and reduce_classes:
        Dc = np.empty((D.shape[0], priors.n_classes))
        for c in range(priors.n_classes):
            Dc[:, c] = D[:, priors.class_members(c)].min(axis=1)
        D = Dc

    mask = img.flat_mask()
    if mask is not None:
        D[mask] = 0.0
    return D / rho


# ---------------------------------------------------------------------------
# rectangle scenario (assignment-dependent distances)


@dataclass(frozen=True)
class RectangleScenario:
    """Candidate rectangles on a centroid grid with intersection structure.

    Candidates at every grid location share one size and n_orientations
    equally spaced orientations; label n_orientations is the extra
    "none" label.  coverage[i, k] is the fraction of sampled points
    inside candidate k at location i; intersect[(i, j)][k, l] flags
    whether candidate k at i overlaps candidate l at the neighboring
    location j.  lam weights the intersection penalty, sigma is the
    constant cost of the none label, rho the distance scale.
    """

    grid: GridGraph
    centers: np.ndarray  # (m, 2) x/y centroid coordinates
    angles: np.ndarray  # (n_orientations,)
    rect_size: tuple[float, float]
    coverage: np.ndarray  # (m, n_orientations)
    intersect: dict = field(repr=False, default_factory=dict)
    points: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 2)))
    foreground: tuple = ()  # ground-truth (location, orientation) pairs
    lam: float = 0.2
    sigma: float = 0.03
    rho: float = 0.02

    @property
    def n_orientations(self) -> int:
        return self.angles.shape[0]

    @property
    def n_labels(self) -> int:
        return self.n_orientations + 1

    def corners(self, location: int, orientation: int) -> np.ndarray:
        """Corner coordinates (4, 2) of one candidate rectangle."""
        return _rect_corners(
            self.centers[location], self.angles[orientation], self.rect_size
        )


def _rect_corners(center, angle, size) -> np.ndarray:
    hl, hw = size[0] / 2.0, size[1] / 2.0
    local = np.array([[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw]])
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.asarray(center)


def _rects_intersect(corners_a: np.ndarray, corners_b: np.ndarray) -> bool:
    """Separating-axis test for two convex quadrilaterals."""
    for quad in (corners_a, corners_b):
        for e in range(4):
            edge = quad[(e + 1) % 4] - quad[e]
            axis = np.array([-edge[1], edge[0]])
            pa = corners_a @ axis
            pb = corners_b @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def _points_inside(points, center, angle, size) -> np.ndarray:
    if points.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    c, s = np.cos(angle), np.sin(angle)
    rel = points - np.asarray(center)
    x = rel[:, 0] * c + rel[:, 1] * s
    y = -rel[:, 0] * s + rel[:, 1] * c
    return (np.abs(x) <= size[0] / 2.0) & (np.abs(y) <= size[1] / 2.0)


def generate_rectangle_scenario(
    seed: int,
    grid_shape: tuple[int, int] = (10, 10),
    n_orientations: int = 6,
    spacing: float = 1.0,
    rect_size: tuple[float, float] = (1.8, 0.6),
    fg_count: int = 14,
    bg_count: int = 30,
    fg_points: int = 100,
    bg_points: int = 20,
    lam: float = 0.2,
    sigma: float = 0.03,
    rho: float = 0.02,
) -> RectangleScenario:
    """Sample a point pattern from hidden rectangles and build the scenario.

    Foreground rectangles are drawn without mutual intersections (greedy
    rejection), background rectangles freely; points are sampled
    uniformly inside each at the two densities.  The returned scenario
    holds coverage fractions over all candidates and the intersection
    indicator matrices for every 8-neighbor location pair.  Everything
    is deterministic in the seed.
    """
    rng = np.random.default_rng(seed)
    gy, gx = grid_shape
    grid = GridGraph(gy, gx, window_radius=1)
    rows, cols = np.divmod(np.arange(grid.n_nodes), gx)
    centers = np.stack([(cols + 0.5) * spacing, (rows + 0.5) * spacing], axis=1)
    angles = np.pi * np.arange(n_orientations) / n_orientations

    all_corners = {
        (i, k): _rect_corners(centers[i], angles[k], rect_size)
        for i in range(grid.n_nodes)
        for k in range(n_orientations)
    }

    candidates = [(i, k) for i in range(grid.n_nodes) for k in range(n_orientations)]
    order = rng.permutation(len(candidates))
    foreground: list[tuple[int, int]] = []
    used_locations: set[int] = set()
    for idx in order:
        if len(foreground) == fg_count:
            break
        i, k = candidates[idx]
        if i in used_locations:
            continue
        if any(
            _rects_intersect(all_corners[(i, k)], all_corners[fg]) for fg in foreground
        ):
            continue
        foreground.append((i, k))
        used_locations.add(i)

    taken = set(foreground)
    remaining = [c for c in candidates if c not in taken]
    bg_idx = rng.choice(len(remaining), size=min(bg_count, len(remaining)), replace=False)
    background = [remaining[int(b)] for b in bg_idx]

    chunks = []
    for (i, k), count in [(fg, fg_points) for fg in foreground] + [
        (bg, bg_points) for bg in background
    ]:
        local = rng.uniform(-0.5, 0.5, size=(count, 2)) * np.array(rect_size)
        c, s = np.cos(angles[k]), np.sin(angles[k])
        rot = np.array([[c, -s], [s, c]])
        chunks.append(local @ rot.T + centers[i])
    points = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, 2))

    coverage = np.zeros((grid.n_nodes, n_orientations))
    if points.shape[0] > 0:
        for (i, k), corners in all_corners.items():
            inside = _points_inside(points, centers[i], angles[k], rect_size)
            coverage[i, k] = inside.sum() / points.shape[0]

    intersect: dict[tuple[int, int], np.ndarray] = {}
    for i in range(grid.n_nodes):
        for j in grid.neighbors(i):
            j = int(j)
            if (j, i) in intersect:
                intersect[(i, j)] = intersect[(j, i)].T.copy()
                continue
            R = np.zeros((n_orientations, n_orientations), dtype=np.uint8)
            for k in range(n_orientations):
                for l in range(n_orientations):
                    if _rects_intersect(all_corners[(i, k)], all_corners[(j, l)]):
                        R[k, l] = 1
            intersect[(i, j)] = R

    return RectangleScenario(
        grid=grid,
        centers=centers,
        angles=angles,
        rect_size=rect_size,
        coverage=coverage,
        intersect=intersect,
        points=points,
        foreground=tuple(foreground),
        lam=lam,
        sigma=sigma,
        rho=rho,
    )


def rectangle_adaptive_distance(scn: RectangleScenario, W: np.ndarray) -> np.ndarray:
    """Assignment-dependent distances: coverage reward plus overlap penalty.

    D_i = (1/rho) * [ -p_i + (lam/|N(i)|) * sum_j R_ij W_j  ;  sigma ]
    where the sum runs over the 8-neighborhood and W_j is restricted to
    the rectangle labels.  The last column is the constant cost of the
    none label.
    """
    W = np.asarray(W, dtype=float)
    m = scn.grid.n_nodes
    n = scn.n_orientations
    if W.shape != (m, n + 1):
        raise ValueError(f"expected assignment shape {(m, n + 1)}, got {W.shape}")
    D = np.empty((m, n + 1))
    for i in range(m):
        nbrs = scn.grid.neighbors(i)
        D[i, :n] = -scn.coverage[i]
        if len(nbrs) > 0:
            pen = np.zeros(n)
            for j in nbrs:
                pen += scn.intersect[(i, int(j))] @ W[int(j), :n]
            D[i, :n] += scn.lam / len(nbrs) * pen
        D[i, n] = scn.sigma
    return D / scn.rho


def selected_intersections(scn: RectangleScenario, label: np.ndarray) -> int:
    """Count adjacent location pairs whose selected rectangles overlap.

    label holds one label per location; the none label never conflicts.
    Each unordered pair is counted once.
    """
    n = scn.n_orientations
    count = 0
    for i in range(scn.grid.n_nodes):
        if label[i] >= n:
            continue
        for j in scn.grid.neighbors(i):
            j = int(j)
            if j <= i or label[j] >= n:
                continue
            if scn.intersect[(i, j)][label[i], label[j]]:
                count += 1
    return count


def color_cube_priors(steps: int) -> PriorSet:
    """Uniform discretization of the RGB cube [0,1]^3 with steps^3 vectors.

    Axis values are k/(steps-1); for even steps the cube center (grey)
    is absent by construction.
    """
    if steps < 2:
        raise ValueError("need at least two steps per axis")
    vals = np.arange(steps) / (steps - 1)
    grid = np.stack(np.meshgrid(vals, vals, vals, indexing="ij"), axis=-1)
    return PriorSet(grid.reshape(-1, 3))


# ---------------------------------------------------------------------------
# serialization


def save_priors_csv(path, priors: PriorSet) -> None:
    """One feature vector per line, comma-separated."""
    if priors.is_patches:
        raise ValueError("CSV stores vector priors; use JSON for patches")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in priors.items:
            writer.writerow([repr(float(x)) for x in row])


def load_priors_csv(path) -> PriorSet:
    rows = []
    with open(path, newline="") as fh:
        for line in csv.reader(fh):
            if not line:
                continue
            rows.append([float(x) for x in line])
    if not rows:
        raise ValueError(f"no prior vectors in {path}")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ValueError("prior vectors have inconsistent dimensions")
    return PriorSet(np.array(rows))


def save_patch_priors_json(path, priors: PriorSet) -> None:
    """Patch dictionary with shared offsets and optional class labels."""
    if not priors.is_patches:
        raise ValueError("prior set does not hold patches")
    doc = {
        "offsets": priors.offsets.tolist(),
        "items": [
            {
                "values": priors.items[i].tolist(),
                **(
                    {"class": int(priors.class_of[i])}
                    if priors.class_of is not None
                    else {}
                ),
            }
            for i in range(priors.n_items)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_patch_priors_json(path) -> PriorSet:
    with open(path) as fh:
        doc = json.load(fh)
    offsets = np.asarray(doc["offsets"], dtype=int)
    values = np.array([item["values"] for item in doc["items"]], dtype=float)
    classes = None
    if doc["items"] and "class" in doc["items"][0]:
        classes = np.array([item["class"] for item in doc["items"]], dtype=int)
    return PriorSet(values, offsets=offsets, class_of=classes)


def load_mask_pgm(path) -> np.ndarray:
    """Missing-pixel mask from a PGM: value 0 marks missing pixels."""
    img = pnm.read_pnm(path)
    if img.ndim != 2:
        raise ValueError("mask must be a grayscale PGM")
    return img == 0


def coarse_median_background(gray: np.ndarray, tiles: int = 16) -> np.ndarray:
    """Smooth background estimate: tile medians, bilinearly interpolated.

    Partitions the image into a tiles x tiles grid, takes the median of
    each tile and interpolates the tile-center values back to full
    resolution.  Subtracting the result removes slowly varying
    illumination before two-level patch comparisons.
    """
    gray = np.asarray(gray, dtype=float)
    if gray.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    h, w = gray.shape
    ty = min(tiles, h)
    tx = min(tiles, w)
    edges_y = np.linspace(0, h, ty + 1).astype(int)
    edges_x = np.linspace(0, w, tx + 1).astype(int)
    med = np.empty((ty, tx))
    for a in range(ty):
        for b in range(tx):
            med[a, b] = np.median(gray[edges_y[a] : edges_y[a + 1], edges_x[b] : edges_x[b + 1]])
    centers_y = (edges_y[:-1] + edges_y[1:] - 1) / 2.0
    centers_x = (edges_x[:-1] + edges_x[1:] - 1) / 2.0
    # separable bilinear interpolation with edge clamping
    rows = np.empty((h, tx))
    for b in range(tx):
        rows[:, b] = np.interp(np.arange(h), centers_y, med[:, b])
    out = np.empty((h, w))
    for y in range(h):
        out[y] = np.interp(np.arange(w), centers_x, rows[y])
    return out

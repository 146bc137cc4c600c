"""2-D grid graph with window neighborhoods and Gaussian patch supports.

Pixels are indexed row-major.  A neighborhood of radius r is the
(2r+1) x (2r+1) window around a pixel, clipped at the image border and
always containing the pixel itself.  Patch supports carry Gaussian
weights that decay toward the patch border; near the image border the
weights are renormalized over the surviving offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GridGraph", "PatchSupport", "gaussian_patch_weights", "boundary_renormalize"]


@dataclass(frozen=True)
class GridGraph:
    """Regular pixel grid with square window neighborhoods.

    window_radius r gives windows of side 2r+1; r = 0 makes every
    neighborhood the singleton {i}.
    """

    height: int
    width: int
    window_radius: int = 0

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("grid dimensions must be positive")
        if self.window_radius < 0:
            raise ValueError("window radius must be nonnegative")

    @property
    def n_nodes(self) -> int:
        return self.height * self.width

    def coords(self, i: int) -> tuple[int, int]:
        """(row, col) of node i."""
        self._check_index(i)
        return divmod(i, self.width)

    def index(self, y: int, x: int) -> int:
        return y * self.width + x

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n_nodes:
            raise IndexError(f"node {i} out of range [0, {self.n_nodes})")

    def neighborhood(self, i: int) -> np.ndarray:
        """Window around node i including i itself, clipped, row-major sorted."""
        y, x = self.coords(i)
        r = self.window_radius
        y0, y1 = max(0, y - r), min(self.height - 1, y + r)
        x0, x1 = max(0, x - r), min(self.width - 1, x + r)
        ys = np.arange(y0, y1 + 1)
        xs = np.arange(x0, x1 + 1)
        return (ys[:, None] * self.width + xs[None, :]).ravel()

    def neighbors(self, i: int) -> np.ndarray:
        """Window around node i without i itself."""
        out = self.neighborhood(i)
        return out[out != i]


@dataclass(frozen=True)
class PatchSupport:
    """Square patch support with per-offset Gaussian weights.

    offsets are (dy, dx) pairs in row-major order; weights are positive,
    symmetric under offset negation, maximal at the center and sum to 1.
    """

    patch_radius: int
    offsets: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.offsets.shape[0]


def gaussian_patch_weights(patch_radius: int) -> PatchSupport:
    """Gaussian support of radius r with scale sigma = (r + 0.5) / 2.

    The scale follows the patch size so the kernel is near zero at the
    patch border; radius 0 degenerates to the single weight 1.
    """
    if patch_radius < 0:
        raise ValueError("patch radius must be nonnegative")
    r = patch_radius
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    offsets = np.stack([dy.ravel(), dx.ravel()], axis=1)
    if r == 0:
        return PatchSupport(0, offsets, np.array([1.0]))
    sigma = (r + 0.5) / 2.0
    dist2 = (offsets[:, 0] ** 2 + offsets[:, 1] ** 2).astype(float)
    w = np.exp(-dist2 / (2.0 * sigma * sigma))
    return PatchSupport(r, offsets, w / w.sum())


def boundary_renormalize(support: PatchSupport, i: int, g: GridGraph) -> tuple[np.ndarray, np.ndarray]:
    """Clip the support of the patch centered at node i and renormalize.

    Returns (kept_offset_indices, renormalized_weights); for interior
    pixels this is all offsets with the original weights.
    """
    y, x = g.coords(i)
    yy = y + support.offsets[:, 0]
    xx = x + support.offsets[:, 1]
    keep = (yy >= 0) & (yy < g.height) & (xx >= 0) & (xx < g.width)
    idx = np.flatnonzero(keep)
    w = support.weights[idx]
    return idx, w / w.sum()

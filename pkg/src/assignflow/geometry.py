"""Riemannian geometry of the open probability simplex.

The relative interior of the probability simplex, equipped with the
Fisher-Rao metric ``<u, v>_p = sum_i u_i v_i / p_i``, is isometric to an
open subset of the sphere of radius 2 via the square-root map
``p -> 2 sqrt(p)``.  Everything here (distance, geodesics, exponential
map and its inverse) is derived from that isometry and evaluated in
closed form.

Alongside the exact exponential map the module provides the "lifting"
map ``p -> p * e^u / <p, e^u>``, a first-order surrogate that is defined
on the whole tangent space and reduces to the softmax function at the
barycenter.  The lifting map and its inverse are the workhorses of the
assignment flow; the exact maps serve as reference.

All functions are pure and operate on 1-D float arrays.  Points of the
simplex are expected to be strictly positive with unit sum; tangent
vectors sum to zero.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "TAYLOR_EPS",
    "fisher_rao_inner",
    "sphere_map",
    "sphere_map_inv",
    "riemannian_distance",
    "riemannian_gradient",
    "geodesic",
    "exp_map",
    "inverse_exp_map",
    "lifting_map",
    "inverse_lifting_map",
    "lift_velocity",
]

# Switch to the series expansion of the inverse exponential map once
# 1 - <sqrt(p), sqrt(q)> drops below this value.
TAYLOR_EPS = 1e-3


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {v.shape}")
    return v


def _check_same_dim(*vectors: np.ndarray) -> None:
    sizes = {v.shape[0] for v in vectors}
    if len(sizes) > 1:
        raise ValueError(f"dimension mismatch: {sorted(sizes)}")


def fisher_rao_inner(p, u, v) -> float:
    """Fisher-Rao inner product ``sum_i u_i v_i / p_i`` at base point p.

    Args:
        p: base point, strictly positive probability vector.
        u, v: tangent vectors at p.

    Returns:
        The metric value; positive for ``u = v != 0``.
    """
    p = _as_vector(p, "p")
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    _check_same_dim(p, u, v)
    if np.any(p <= 0.0):
        raise ValueError("base point must be strictly positive")
    return float(np.dot(u / p, v))


def sphere_map(p) -> np.ndarray:
    """Map a simplex point onto the radius-2 sphere, ``p -> 2 sqrt(p)``."""
    p = _as_vector(p, "p")
    if np.any(p < 0.0):
        raise ValueError("simplex point must be nonnegative")
    return 2.0 * np.sqrt(p)


def sphere_map_inv(s) -> np.ndarray:
    """Inverse of :func:`sphere_map`, ``s -> s**2 / 4``.

    Raises:
        ValueError: if any entry of s is not strictly positive.
    """
    s = _as_vector(s, "s")
    if np.any(s <= 0.0):
        raise ValueError("sphere point must be strictly positive to map back")
    return s * s / 4.0


def riemannian_distance(p, q) -> float:
    """Fisher-Rao (geodesic) distance ``2 arccos(sum_i sqrt(p_i q_i))``.

    The closed-form expression extends to the closed simplex; vectors
    with disjoint supports are at distance pi.  The arccos argument is
    clamped against roundoff and the result lies in [0, pi].
    """
    p = _as_vector(p, "p")
    q = _as_vector(q, "q")
    _check_same_dim(p, q)
    bc = float(np.sum(np.sqrt(p * q)))
    bc = min(1.0, max(-1.0, bc))
    return float(np.clip(2.0 * np.arccos(bc), 0.0, np.pi))


def riemannian_gradient(p, euclid_grad) -> np.ndarray:
    """Riemannian gradient ``p * (g - <p, g> 1)`` from a Euclidean gradient g.

    The result is tangent (sums to zero) and satisfies
    ``fisher_rao_inner(p, out, v) == <g, v>`` for every tangent v.
    """
    p = _as_vector(p, "p")
    g = _as_vector(euclid_grad, "euclid_grad")
    _check_same_dim(p, g)
    return p * (g - np.dot(p, g))


def geodesic(p, v, t: float) -> np.ndarray:
    """Point at parameter t of the geodesic through p with velocity v.

    Closed form obtained by running the great circle on the radius-2
    sphere and mapping back.  With ``w = v / sqrt(p)``:

        gamma(t) = (p + w**2/|w|**2)/2
                 + (p - w**2/|w|**2)/2 * cos(|w| t)
                 + (w/|w|) * sqrt(p) * sin(|w| t)

    ``gamma(0) = p`` and ``gamma'(0) = v``.  The curve has constant
    Fisher-Rao speed ``|w| = sqrt(fisher_rao_inner(p, v, v))``.

    Raises:
        ValueError: if the evaluated point has an entry <= 0.  There is
            no pre-validation; note that the closed form is a squared
            sphere coordinate, so overshooting the simplex boundary
            reflects the curve rather than producing negative entries,
            and the check fires on exact boundary contact only.
    """
    p = _as_vector(p, "p")
    v = _as_vector(v, "v")
    _check_same_dim(p, v)
    if np.any(p <= 0.0):
        raise ValueError("base point must be strictly positive")
    sqrt_p = np.sqrt(p)
    w = v / sqrt_p
    norm_w = float(np.linalg.norm(w))
    if norm_w == 0.0:
        return p.copy()
    ratio = (w * w) / (norm_w * norm_w)
    angle = norm_w * t
    out = (
        0.5 * (p + ratio)
        + 0.5 * (p - ratio) * np.cos(angle)
        + (w / norm_w) * sqrt_p * np.sin(angle)
    )
    if np.any(out <= 0.0):
        raise ValueError(
            "geodesic left the open simplex (velocity outside the domain "
            "of the exponential map for this t)"
        )
    return out


def exp_map(p, v) -> np.ndarray:
    """Exponential map, ``Exp_p(v) = geodesic(p, v, 1)``; ``Exp_p(0) = p``."""
    return geodesic(p, v, 1.0)


def inverse_exp_map(p, q) -> np.ndarray:
    """Tangent vector v at p with ``exp_map(p, v) = q`` (log map).

    With ``b = <sqrt(p), sqrt(q)>`` and ``d = 2 arccos(b)``:

        v = d / sqrt(1 - b**2) * (sqrt(p q) - b p).

    For nearly identical arguments the prefactor is 0/0; once
    ``eps = 1 - b < TAYLOR_EPS`` the series replacement

        (9 eps**2 + 40 eps + 480) / (240 sqrt(1 - eps/2)) * (sqrt(p q) - (1-eps) p)

    is used instead.

    Raises:
        ValueError: for antipodal supports (``b == 0``), where no
            connecting geodesic exists inside the simplex closure.
    """
    p = _as_vector(p, "p")
    q = _as_vector(q, "q")
    _check_same_dim(p, q)
    sqrt_pq = np.sqrt(p * q)
    b = min(1.0, float(np.sum(sqrt_pq)))
    if b == 0.0:
        raise ValueError("points have disjoint supports; log map undefined")
    eps = 1.0 - b
    if eps < TAYLOR_EPS:
        coeff = (9.0 * eps * eps + 40.0 * eps + 480.0) / (
            240.0 * np.sqrt(1.0 - 0.5 * eps)
        )
        return coeff * (sqrt_pq - (1.0 - eps) * p)
    d = 2.0 * np.arccos(b)
    return d / np.sqrt(1.0 - b * b) * (sqrt_pq - b * p)


def lifting_map(p, u) -> np.ndarray:
    """Multiplicative lift ``p * e^u / <p, e^u>``.

    Defined for every real vector u, unlike the exponential map.  Adding
    a constant to u does not change the value; the maximum of u is
    subtracted before exponentiating so large inputs cannot overflow.
    At the barycenter this is exactly the softmax of u.
    """
    p = _as_vector(p, "p")
    u = _as_vector(u, "u")
    _check_same_dim(p, u)
    e = np.exp(u - np.max(u))
    pe = p * e
    return pe / pe.sum()


def inverse_lifting_map(p, q) -> np.ndarray:
    """Mean-free vector u with ``lifting_map(p, u) = q``.

    Computed as the centered log-ratio ``(I - 11^T/n)(log q - log p)``.
    """
    p = _as_vector(p, "p")
    q = _as_vector(q, "q")
    _check_same_dim(p, q)
    r = np.log(q) - np.log(p)
    return r - r.mean()


def lift_velocity(p, u) -> np.ndarray:
    """Initial velocity ``(Diag(p) - p p^T) u`` of the curve t -> lifting_map(p, u t).

    The geodesic with this velocity agrees with the lifted curve to
    first order; the mismatch decays as O(t^2).
    """
    p = _as_vector(p, "p")
    u = _as_vector(u, "u")
    _check_same_dim(p, u)
    return p * u - np.dot(p, u) * p

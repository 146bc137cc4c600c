"""Pure-NumPy flow kernels, the fallback for the compiled extension.

Every function writes rows [r0, r1) of a preallocated output and reads
the full input arrays, so row ranges can be farmed out to threads with
bit-identical results for any partition.  Per-pixel reduction order is
fixed (window offsets run row-major) and matches the compiled kernels.
"""

from __future__ import annotations

import numpy as np


def lift_rows(base, negu, out, r0, r1):
    """out_i = base_i * exp(negu_i) / <base_i, exp(negu_i)>, max-shifted."""
    u = negu[r0:r1]
    e = np.exp(u - u.max(axis=1, keepdims=True))
    pe = base[r0:r1] * e
    out[r0:r1] = pe / pe.sum(axis=1, keepdims=True)


def softmax_rows(m, out, r0, r1):
    """Row-wise softmax with max shift."""
    u = m[r0:r1]
    e = np.exp(u - u.max(axis=1, keepdims=True))
    out[r0:r1] = e / e.sum(axis=1, keepdims=True)


def window_log_mean(logl, height, width, radius, out, gr0, gr1):
    """Mean of logl rows over the clipped (2r+1)^2 window of each pixel.

    logl and out are (height*width, n); gr0/gr1 bound the grid rows to
    compute.  Offsets are accumulated in row-major order.
    """
    n = logl.shape[1]
    src = logl.reshape(height, width, n)
    dst = out.reshape(height, width, n)[gr0:gr1]
    dst[...] = 0.0
    cnt = np.zeros((gr1 - gr0, width, 1))
    for dy in range(-radius, radius + 1):
        ty0 = max(gr0, -dy)
        ty1 = min(gr1, height - dy)
        if ty0 >= ty1:
            continue
        for dx in range(-radius, radius + 1):
            tx0 = max(0, -dx)
            tx1 = min(width, width - dx)
            if tx0 >= tx1:
                continue
            dst[ty0 - gr0 : ty1 - gr0, tx0:tx1] += src[
                ty0 + dy : ty1 + dy, tx0 + dx : tx1 + dx
            ]
            cnt[ty0 - gr0 : ty1 - gr0, tx0:tx1] += 1.0
    dst /= cnt


def replicator_rows(w, s, eps, out, r0, r1):
    """Multiplicative update w*s/<w,s>, renormalized, then eps-floored.

    eps <= 0 skips the floor rectification.
    """
    ws = w[r0:r1] * s[r0:r1]
    tmp = ws / ws.sum(axis=1, keepdims=True)
    tmp /= tmp.sum(axis=1, keepdims=True)
    if eps > 0.0:
        mn = tmp.min(axis=1, keepdims=True)
        need = mn < eps
        if np.any(need):
            shifted = tmp - mn + eps
            shifted /= shifted.sum(axis=1, keepdims=True)
            tmp = np.where(need, shifted, tmp)
    out[r0:r1] = tmp


def floor_rows(w, eps, out, r0, r1):
    """Shift-and-renormalize rows whose smallest entry is below eps."""
    tmp = w[r0:r1].copy()
    mn = tmp.min(axis=1, keepdims=True)
    need = mn < eps
    if np.any(need):
        shifted = tmp - mn + eps
        shifted /= shifted.sum(axis=1, keepdims=True)
        tmp = np.where(need, shifted, tmp)
    out[r0:r1] = tmp

"""Hot numeric kernels for stroke geometry.

Each kernel ships in two flavors: a numba ``@njit`` build (default) and a
pure numpy/Python path. Set ``MODELSYNC_NO_NUMBA=1`` to force the fallback;
``benchmarks/resample_bench.py`` compares the two. The decimation scan is
data-dependent (each keep decision depends on the previously kept point), so
it cannot be vectorized and is where the JIT pays off.
"""

from __future__ import annotations

import math
import os

import numpy as np

# Relative slack so gaps that land on the split threshold through float
# rounding do not re-split; keeps resampling exactly idempotent.
_SPLIT_SLACK = 1e-9


def _decimate_mask_loop(xs, ys, eps):
    n = xs.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    keep[0] = True
    eps_sq = eps * eps
    last = 0
    for i in range(1, n):
        dx = xs[i] - xs[last]
        dy = ys[i] - ys[last]
        if dx * dx + dy * dy >= eps_sq:
            keep[i] = True
            last = i
    keep[n - 1] = True
    return keep


def _densify_loop(xs, ys, max_gap):
    m = xs.shape[0]
    total = 1
    for i in range(1, m):
        d = math.sqrt((xs[i] - xs[i - 1]) ** 2 + (ys[i] - ys[i - 1]) ** 2)
        total += max(1, int(math.ceil(d / max_gap - _SPLIT_SLACK)))
    out = np.empty((total, 2), dtype=np.float64)
    out[0, 0] = xs[0]
    out[0, 1] = ys[0]
    j = 1
    for i in range(1, m):
        d = math.sqrt((xs[i] - xs[i - 1]) ** 2 + (ys[i] - ys[i - 1]) ** 2)
        segments = max(1, int(math.ceil(d / max_gap - _SPLIT_SLACK)))
        for s in range(1, segments + 1):
            if s == segments:
                out[j, 0] = xs[i]
                out[j, 1] = ys[i]
            else:
                t = s / segments
                out[j, 0] = xs[i - 1] + t * (xs[i] - xs[i - 1])
                out[j, 1] = ys[i - 1] + t * (ys[i] - ys[i - 1])
            j += 1
    return out


def _topmost_hit_loop(px, py, rx, ry, rw, rh):
    hit = -1
    for i in range(rx.shape[0]):
        if rx[i] <= px <= rx[i] + rw[i] and ry[i] <= py <= ry[i] + rh[i]:
            hit = i
    return hit


def _densify_numpy(xs, ys, max_gap):
    """Vectorized fallback: per-segment subdivision via repeat arithmetic."""
    dx = np.diff(xs)
    dy = np.diff(ys)
    dist = np.hypot(dx, dy)
    segments = np.maximum(1, np.ceil(dist / max_gap - _SPLIT_SLACK).astype(np.int64))
    steps = np.concatenate([np.arange(1, k + 1) for k in segments]) if len(segments) else np.array([])
    seg_index = np.repeat(np.arange(len(segments)), segments)
    t = steps / segments[seg_index]
    out_x = xs[seg_index] + t * dx[seg_index]
    out_y = ys[seg_index] + t * dy[seg_index]
    ends = np.cumsum(segments) - 1
    out_x[ends] = xs[1:]
    out_y[ends] = ys[1:]
    out = np.empty((1 + len(out_x), 2), dtype=np.float64)
    out[0, 0] = xs[0]
    out[0, 1] = ys[0]
    out[1:, 0] = out_x
    out[1:, 1] = out_y
    return out


def _topmost_hit_numpy(px, py, rx, ry, rw, rh):
    inside = (rx <= px) & (px <= rx + rw) & (ry <= py) & (py <= ry + rh)
    hits = np.flatnonzero(inside)
    return int(hits[-1]) if len(hits) else -1


NUMBA_ENABLED = os.environ.get("MODELSYNC_NO_NUMBA", "") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    decimate_mask = njit(cache=True)(_decimate_mask_loop)
    densify = njit(cache=True)(_densify_loop)
    topmost_hit = njit(cache=True)(_topmost_hit_loop)
else:
    decimate_mask = _decimate_mask_loop
    densify = _densify_numpy
    topmost_hit = _topmost_hit_numpy


def warmup() -> None:
    """Trigger JIT compilation outside any timed or latency-sensitive path."""
    xs = np.array([0.0, 5.0, 30.0])
    ys = np.array([0.0, 0.0, 0.0])
    decimate_mask(xs, ys, 2.0)
    densify(xs, ys, 10.0)
    topmost_hit(1.0, 1.0, xs, ys, xs + 10, ys + 10)

"""Per-pixel hot kernels: numba fast path with a pure-numpy fallback.

The numba backend is used when importable unless the environment variable
``DEPTHGATE_NUMBA`` is set to ``0``/``false``/``off``/``no``. Both backends
are kept importable side by side so they can be compared (see
``benchmarks/bench_kernels.py``); the numpy versions are the reference
implementations.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_enabled() -> bool:
    flag = os.environ.get("DEPTHGATE_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


# -- pure-numpy reference implementations -----------------------------------


def roi_fg_counts_np(depth: np.ndarray, threshold_mm: int, rects: np.ndarray) -> np.ndarray:
    """Foreground pixel count (0 < depth <= threshold) inside each rect.

    ``rects`` is an (n, 4) int array of (x, y, w, h). Only pixels inside the
    rects are ever read.
    """
    counts = np.zeros(rects.shape[0], dtype=np.int64)
    for i in range(rects.shape[0]):
        x, y, w, h = rects[i]
        win = depth[y : y + h, x : x + w]
        counts[i] = np.count_nonzero((win > 0) & (win <= threshold_mm))
    return counts


def grayscale_np(depth: np.ndarray, threshold_mm: int) -> np.ndarray:
    """8-bit render: background 0, foreground floor(255*(1 - d/thr) + 0.5)."""
    fg = (depth > 0) & (depth <= threshold_mm)
    g = np.floor(255.0 * (1.0 - depth.astype(np.float64) / float(threshold_mm)) + 0.5)
    return np.where(fg, g, 0.0).astype(np.uint8)


def fill_disc_np(depth: np.ndarray, cx: float, cy: float, radius: float, value: int) -> None:
    """Overwrite pixels with center distance <= radius, clipped to the frame."""
    h, w = depth.shape
    x0 = max(int(np.floor(cx - radius)), 0)
    x1 = min(int(np.ceil(cx + radius)) + 1, w)
    y0 = max(int(np.floor(cy - radius)), 0)
    y1 = min(int(np.ceil(cy + radius)) + 1, h)
    if x0 >= x1 or y0 >= y1:
        return
    ys = np.arange(y0, y1, dtype=np.float64)[:, None]
    xs = np.arange(x0, x1, dtype=np.float64)[None, :]
    mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius
    depth[y0:y1, x0:x1][mask] = value


# -- numba fast path ---------------------------------------------------------

NUMBA_BACKEND = False
if _numba_enabled():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:

        @njit(cache=True, nogil=True)
        def _roi_fg_counts_nb(depth, threshold_mm, rects):
            counts = np.zeros(rects.shape[0], dtype=np.int64)
            for i in range(rects.shape[0]):
                x = rects[i, 0]
                y = rects[i, 1]
                w = rects[i, 2]
                h = rects[i, 3]
                n = 0
                for r in range(y, y + h):
                    # branchless row sweep in 32-bit lanes so llvm vectorizes
                    m = np.int32(0)
                    for c in range(x, x + w):
                        d = depth[r, c]
                        m += np.int32((d > 0) & (d <= threshold_mm))
                    n += m
                counts[i] = n
            return counts

        @njit(cache=True, nogil=True)
        def _grayscale_nb(depth, threshold_mm):
            h, w = depth.shape
            out = np.zeros((h, w), dtype=np.uint8)
            thr = float(threshold_mm)
            for r in range(h):
                for c in range(w):
                    d = depth[r, c]
                    if 0 < d <= threshold_mm:
                        out[r, c] = np.uint8(int(255.0 * (1.0 - d / thr) + 0.5))
            return out

        @njit(cache=True, nogil=True)
        def _fill_disc_nb(depth, cx, cy, radius, value):
            h, w = depth.shape
            x0 = max(int(np.floor(cx - radius)), 0)
            x1 = min(int(np.ceil(cx + radius)) + 1, w)
            y0 = max(int(np.floor(cy - radius)), 0)
            y1 = min(int(np.ceil(cy + radius)) + 1, h)
            r2 = radius * radius
            for r in range(y0, y1):
                dy = r - cy
                for c in range(x0, x1):
                    dx = c - cx
                    if dx * dx + dy * dy <= r2:
                        depth[r, c] = value

        NUMBA_BACKEND = True


if NUMBA_BACKEND:
    roi_fg_counts = _roi_fg_counts_nb
    grayscale = _grayscale_nb
    fill_disc = _fill_disc_nb
else:
    roi_fg_counts = roi_fg_counts_np
    grayscale = grayscale_np
    fill_disc = fill_disc_np


def backend_name() -> str:
    return "numba" if NUMBA_BACKEND else "numpy"

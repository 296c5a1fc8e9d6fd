"""Compare the numba and numpy kernel backends on identical workloads.

Run without arguments to benchmark both backends (each in a fresh process so
the DEPTHGATE_NUMBA flag is honored exactly as it is in production) and print
a side-by-side table:

    python3 benchmarks/bench_kernels.py
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

DIMS = (640, 480)
KERNEL_REPEATS = 200
ENGINE_FRAMES = 600


def _bench_kernels():
    from depthgate import kernels
    from depthgate.pipeline import default_layout

    w, h = DIMS
    rng = np.random.default_rng(42)
    depth = rng.integers(0, 3000, size=(h, w), dtype=np.uint16)
    rects = default_layout(w, h).rects_array()

    kernels.roi_fg_counts(depth, 1000, rects)  # warm the jit
    start = time.perf_counter()
    for _ in range(KERNEL_REPEATS):
        kernels.roi_fg_counts(depth, 1000, rects)
    roi_us = (time.perf_counter() - start) / KERNEL_REPEATS * 1e6

    kernels.grayscale(depth, 1000)
    start = time.perf_counter()
    for _ in range(KERNEL_REPEATS):
        kernels.grayscale(depth, 1000)
    gray_us = (time.perf_counter() - start) / KERNEL_REPEATS * 1e6

    return roi_us, gray_us


def _bench_engine():
    from depthgate.pipeline import SegmentationConfig, default_layout
    from depthgate.service import CountingEngine, run_offline
    from depthgate.synth import ScenarioKind, ScenarioSpec, auto_sized, generate

    layout = default_layout(*DIMS)
    spec = auto_sized(
        ScenarioSpec(kind=ScenarioKind.ENTRY, frame_count=1, speed_px_per_frame=6.0),
        layout, DIMS,
    )
    base, _ = generate(spec, layout, DIMS)
    frames = []
    while len(frames) < ENGINE_FRAMES:
        for f in base:
            i = len(frames)
            frames.append(
                type(f)(f.width, f.height, i, i * 33_333, f.depth))
            if len(frames) == ENGINE_FRAMES:
                break

    engine = CountingEngine(layout, SegmentationConfig())
    engine.process(frames[0])  # warm
    engine = CountingEngine(layout, SegmentationConfig())
    start = time.perf_counter()
    run_offline(frames, engine)
    return ENGINE_FRAMES / (time.perf_counter() - start)


def worker():
    from depthgate.kernels import backend_name

    roi_us, gray_us = _bench_kernels()
    fps = _bench_engine()
    print(json.dumps({
        "backend": backend_name(),
        "roi_counts_us": roi_us,
        "grayscale_us": gray_us,
        "engine_fps": fps,
    }))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        worker()
        return

    rows = []
    for flag in ("1", "0"):
        env = dict(os.environ, DEPTHGATE_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, __file__, "--worker"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows.append(json.loads(out.stdout))

    w, h = DIMS
    print(f"frame size {w}x{h}, {KERNEL_REPEATS} kernel repeats, "
          f"{ENGINE_FRAMES} engine frames\n")
    print(f"{'backend':<8} {'roi_counts':>12} {'grayscale':>12} {'end_to_end':>12}")
    for r in rows:
        print(f"{r['backend']:<8} {r['roi_counts_us']:>10.1f}us "
              f"{r['grayscale_us']:>10.1f}us {r['engine_fps']:>8.0f} fps")
    if len(rows) == 2 and rows[1]["engine_fps"] > 0:
        print(f"\nnumba end-to-end speedup: "
              f"{rows[0]['engine_fps'] / rows[1]['engine_fps']:.1f}x")


if __name__ == "__main__":
    main()

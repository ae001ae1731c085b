"""Time the jitted kernels against the pure-numpy fallback.

Usage:

    python benchmarks/bench_kernels.py [--repeats 20] [--end-to-end]

Per-kernel timings use realistic shapes for a 512x512 portrait at the
default stride. --end-to-end additionally runs the bundled 128x128 pair
through the full transfer once per backend (subprocesses, so the import
time flag takes effect).
"""

import argparse
import statistics
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from stylewarp import _kernels_numpy as knp
from stylewarp.backend import HAVE_NUMBA

ROOT = Path(__file__).resolve().parent.parent


def bench(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def make_inputs(rng):
    feats_c = rng.standard_normal((4096, 24)).astype(np.float32)  # 64x64 grid
    feats_s = rng.standard_normal((4096, 24)).astype(np.float32)
    corr = rng.uniform(-1, 1, (4096, 4096)).astype(np.float32)
    chw = rng.standard_normal((3, 512, 512)).astype(np.float32)
    img = rng.random((512, 512, 3)).astype(np.float32)
    luma = (
        0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]
    ).astype(np.float32)
    half = rng.standard_normal((3, 256, 256)).astype(np.float32)
    return {
        "zncc_matrix": (feats_c, feats_s),
        "row_softmax": (corr, 0.01),
        "haar_dwt2": (chw,),
        "haar_idwt2": (knp.haar_dwt2(chw),),
        "cell_stats": (img, luma, 8),
        "box_down2": (img,),
        "bilinear_up2": (half,),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument(
        "--end-to-end", action="store_true",
        help="also time a full transfer per backend",
    )
    args = ap.parse_args()

    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    from stylewarp import _kernels_numba as knb

    rng = np.random.default_rng(0)
    inputs = make_inputs(rng)

    # warm the JIT cache outside the timed region
    for name, call_args in inputs.items():
        getattr(knb, name)(*call_args)

    print(f"{'kernel':<14} {'numpy best':>12} {'numba best':>12} {'speedup':>8}")
    for name, call_args in inputs.items():
        t_np, _ = bench(getattr(knp, name), call_args, args.repeats)
        t_nb, _ = bench(getattr(knb, name), call_args, args.repeats)
        print(
            f"{name:<14} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
            f"{t_np / t_nb:>7.2f}x"
        )

    if args.end_to_end:
        data = ROOT / "tests" / "data"
        for backend in ("numpy", "numba"):
            t0 = time.perf_counter()
            subprocess.run(
                [
                    sys.executable, "-m", "stylewarp.cli", "transfer",
                    "--input", str(data / "input.png"),
                    "--reference", str(data / "reference.png"),
                    "--out", f"/tmp/bench_{backend}.png",
                ],
                check=True,
                env={"STYLEWARP_BACKEND": backend, "PATH": "/usr/bin:/bin"},
            )
            print(f"transfer ({backend}): {time.perf_counter() - t0:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled and pure-Python kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from privscribe import _kernels_py

try:
    from privscribe import _kernels_c
except ImportError:
    _kernels_c = None


def cases(rng: np.random.Generator) -> dict[str, tuple]:
    ref = rng.integers(0, 50, 200).tolist()
    hyp = rng.integers(0, 50, 220).tolist()
    frames = rng.standard_normal((200, 400))
    return {
        "edit_ops 200x220": ("edit_ops", (ref, hyp)),
        "count_inversions 1e5": ("count_inversions", (rng.permutation(100_000).astype(np.int64),)),
        "linear_assignment 60x60": ("linear_assignment", (rng.random((60, 60)),)),
        "autocorr_peaks 200x400": ("autocorr_peaks", (frames, 20, 160)),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'kernel':26s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label, (name, call_args) in cases(np.random.default_rng(0)).items():
        times = {}
        for b, mod in backends.items():
            fn = getattr(mod, name)
            times[b] = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat))
        row = f"{label:26s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()

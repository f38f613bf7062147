"""Time the numba kernels against their pure-numpy fallbacks.

The backend of speccalc._kernels is frozen at import, so this script
re-invokes itself in a worker subprocess per backend (SPECCALC_NO_NUMBA=1
selects the fallback), then prints a side-by-side table and checks that
the two implementations agree on every workload.

    python3 benchmarks/bench_kernels.py            # compare both backends
    python3 benchmarks/bench_kernels.py --repeats 9
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

WORKLOADS = (
    ("enum_mean_norm K=18 n=16 p=1", "enum"),
    ("mc_mean_norm  8192x48 n=128 p=1", "mc"),
    ("sliding_min   n=2^20 w=257", "slide"),
    ("lattice_abs_sum n=2^22 s=101 k=32", "lattice"),
)


def build_inputs():
    gen = np.random.default_rng(42)
    X_enum = gen.standard_normal((18, 16)) + 1j * gen.standard_normal((18, 16))
    X_mc = gen.standard_normal((48, 128)) + 1j * gen.standard_normal((48, 128))
    signs = gen.choice([-1.0, 1.0], size=(8192, 48))
    a_slide = gen.standard_normal(1 << 20)
    a_lattice = np.abs(gen.standard_normal(1 << 22))
    return X_enum, X_mc, signs, a_slide, a_lattice


def run_worker(repeats: int) -> dict:
    from speccalc import _kernels

    X_enum, X_mc, signs, a_slide, a_lattice = build_inputs()
    calls = {
        "enum": lambda: _kernels.enum_mean_norm(X_enum, 1.0),
        "mc": lambda: _kernels.mc_mean_norm(X_mc, 1.0, signs)[0],
        "slide": lambda: float(_kernels.sliding_min(a_slide, 257).sum()),
        "lattice": lambda: float(_kernels.lattice_abs_sum(a_lattice, 101, 32).sum()),
    }
    out = {"backend": _kernels.BACKEND, "ms": {}, "value": {}}
    for key, call in calls.items():
        out["value"][key] = call()  # warm-up, and the agreement probe
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            call()
            best = min(best, time.perf_counter() - t0)
        out["ms"][key] = best * 1e3
    return out


def spawn(no_numba: bool, repeats: int) -> dict:
    env = dict(os.environ, SPECCALC_NO_NUMBA="1" if no_numba else "0")
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker", "--repeats", str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        print(json.dumps(run_worker(args.repeats)))
        return 0

    fast = spawn(no_numba=False, repeats=args.repeats)
    slow = spawn(no_numba=True, repeats=args.repeats)
    if fast["backend"] == slow["backend"]:
        print(f"only the {fast['backend']} backend is available; timings below")

    width = max(len(name) for name, _ in WORKLOADS)
    print(f"{'workload':<{width}}  {fast['backend']:>10}  {slow['backend']:>10}  speedup")
    drift = 0.0
    for name, key in WORKLOADS:
        f, s = fast["ms"][key], slow["ms"][key]
        print(f"{name:<{width}}  {f:>8.2f}ms  {s:>8.2f}ms  {s / f:>6.1f}x")
        vf, vs = fast["value"][key], slow["value"][key]
        drift = max(drift, abs(vf - vs) / max(abs(vf), 1e-300))
    print(f"backend agreement: max relative deviation {drift:.2e}")
    return 0 if drift < 1e-9 else 1


if __name__ == "__main__":
    sys.exit(main())

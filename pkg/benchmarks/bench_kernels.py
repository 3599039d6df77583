"""Time the type-elimination kernel: numba loops against the numpy version.

    python benchmarks/bench_kernels.py --sizes 256 1024 4096 --repeat 3

Inputs are synthetic but shaped like real runs: N types over P closure bits,
a few roles, demand sets that are sparse subsets of the type bits.
"""
import argparse
import time

import numpy as np

from alcui import _kernels


def make_inputs(rng, n, p=96, roles=2, n_ex=12, density=0.2):
    bits = rng.random((n, p)) < 0.5
    tw = _kernels.pack_rows(bits)
    dem = np.stack([_kernels.pack_rows(bits & (rng.random((n, p)) < density)) for _ in range(roles)])
    ex_role = rng.integers(0, roles, n_ex)
    ex_idx = rng.choice(p, n_ex, replace=False)
    ex_body = rng.integers(0, p, n_ex)
    ex_pol = rng.random(n_ex) < 0.5
    alive = np.ones(n, dtype=bool)
    return tw, dem, ex_role, ex_idx, ex_body, ex_pol, alive


def best_of(fn, args, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or ALCUI_NO_NUMBA set): timing numpy only")
    else:
        # compile outside the timed region
        _kernels.eliminate_numba(*make_inputs(rng, 8))
    print(f"{'types':>7} {'numpy s':>10} {'numba s':>10} {'speedup':>8} {'alive':>6}")
    for n in a.sizes:
        args = make_inputs(rng, n)
        t_np, ref = best_of(_kernels.eliminate_numpy, args, a.repeat)
        if _kernels.HAVE_NUMBA:
            t_nb, got = best_of(_kernels.eliminate_numba, args, a.repeat)
            if not np.array_equal(ref, got):
                raise SystemExit(f"kernels disagree at n={n}")
            print(f"{n:>7} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x {int(ref.sum()):>6}")
        else:
            print(f"{n:>7} {t_np:>10.4f} {'-':>10} {'-':>8} {int(ref.sum()):>6}")


if __name__ == "__main__":
    main()

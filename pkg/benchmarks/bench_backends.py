"""Compare the numba and pure-numpy backends.

    python3 benchmarks/bench_backends.py [--horizon 20000] [--arms 50] [--repeat 3]

Times the LP selection kernel on random arm vectors and full policy runs
on a synthetic coupon-like instance. Compilation happens in a warm-up
call and is reported separately.
"""

import argparse
import time

import numpy as np

from linconts import Xoshiro256, get_kernels, run_policy, synth_coupon_like
from linconts._backend import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_lp(backend, n_arms, calls, repeat):
    kern = get_kernels(backend)
    rng = np.random.default_rng(0)
    mus = rng.random((calls, n_arms))
    r = 1.0 - rng.random(n_arms)

    def go():
        for mu in mus:
            kern.lp_select(mu, r, 0.25)

    return best_of(go, repeat) / calls


def bench_run(backend, policy, inst, horizon, repeat):
    return best_of(lambda: run_policy(policy, inst, horizon, seed=0, backend=backend), repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--horizon", type=int, default=20_000)
    ap.add_argument("--arms", type=int, default=50)
    ap.add_argument("--lp-calls", type=int, default=2_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    inst = synth_coupon_like(args.arms, Xoshiro256(0))

    print(f"N={args.arms}, T={args.horizon}, best of {args.repeat}")
    for b in backends:
        t0 = time.perf_counter()
        run_policy("linconts", inst, args.arms + 5, backend=b)
        run_policy("linconklucb", inst, args.arms + 5, backend=b)
        print(f"{b:>6} warm-up (compile): {time.perf_counter() - t0:.2f}s")

    rows = []
    for b in backends:
        lp = bench_lp(b, args.arms, args.lp_calls, args.repeat)
        ts = bench_run(b, "linconts", inst, args.horizon, args.repeat)
        kl = bench_run(b, "linconklucb", inst, args.horizon, args.repeat)
        rows.append((b, lp, ts, kl))

    print(f"{'backend':>8} {'lp_select':>12} {'linconts run':>14} {'klucb run':>12}")
    for b, lp, ts, kl in rows:
        print(f"{b:>8} {lp * 1e6:>10.1f}us {ts:>13.3f}s {kl:>11.3f}s")
    if len(rows) == 2:
        (_, lp1, ts1, kl1), (_, lp2, ts2, kl2) = rows
        print(f"{'speedup':>8} {lp2 / lp1:>11.1f}x {ts2 / ts1:>13.1f}x {kl2 / kl1:>11.1f}x")


if __name__ == "__main__":
    main()

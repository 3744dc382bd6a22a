"""Timings for the numba and numpy kernel builds on the three hot paths.

Usage: python benchmarks/bench_backends.py [--trials N] [--agents N]
       [--sweep-cap N] [--repeat N]

Each section reports best-of-``repeat`` wall time per backend and checks
that the two builds agree bitwise before trusting either number.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from quorumkit._kernels import available_backends, get_backend


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--agents", type=int, default=4000)
    parser.add_argument("--sweep-cap", type=int, default=4000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    names = available_backends()
    if "numba" not in names:
        print("numba build unavailable; install the 'accel' extra to compare")
    backends = {name: get_backend(name) for name in names}

    rng = np.random.default_rng(7)
    probs = rng.uniform(0.4, 0.95, size=args.agents)
    competences = np.array([0.8, 0.8, 0.6, 0.7, 0.9])
    base = backends["numpy"].poisson_binomial_pmf(np.full(31, 0.7))

    sections = {
        f"distribution build, {args.agents} agents": lambda b: b.poisson_binomial_pmf(
            probs
        ),
        f"margin sweep to cap {args.sweep_cap}": lambda b: b.sweep_margins(
            base, 0.51, args.sweep_cap, 2, 1, 2, 0.95
        ),
        f"simulation, {args.trials:,} trials x 5 agents": lambda b: b.simulate_counts(
            np.uint64(12345), 0, args.trials, competences, 0.5, 3
        ),
    }

    width = max(len(s) for s in sections)
    print(f"{'section'.ljust(width)}  " + "".join(f"{n:>12}" for n in backends))
    for label, run in sections.items():
        results = {}
        timings = {}
        for name, backend in backends.items():
            run(backend)  # warmup; lets numba compile outside the timer
            timings[name] = best_of(lambda: results.__setitem__(name, run(backend)),
                                    args.repeat)
        values = list(results.values())
        agree = all(np.array_equal(np.asarray(v), np.asarray(values[0])) for v in values)
        cells = "".join(f"{timings[n] * 1e3:>10.2f}ms" for n in backends)
        suffix = "" if agree else "  <-- BACKENDS DISAGREE"
        print(f"{label.ljust(width)}  {cells}{suffix}")


if __name__ == "__main__":
    main()

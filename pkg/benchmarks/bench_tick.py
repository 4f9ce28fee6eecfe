"""Compare the compiled tick kernel with the pure-Python implementation.

Each case builds the same seeded simulation under both backends, times
``--ticks`` calls to ``step`` and checks that the belief vectors agree
bit for bit.

Usage:
    python benchmarks/bench_tick.py --ticks 25 --repeat 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from argnet.engine import SimConfig, kernel_available, setup, step

CASES = [
    ("big-net N=50 complete", SimConfig(number_of_agents=50)),
    ("big-net N=500 complete", SimConfig(number_of_agents=500)),
    ("big-net N=500 small-world", SimConfig(number_of_agents=500, social_network="small-world")),
    ("small-net N=200 wheel recent", SimConfig(causal_structure="small-net", number_of_agents=200,
                                                social_network="wheel", share="recent", conviction_threshold=0.0)),
]


def time_backend(config: SimConfig, backend: str, ticks: int, repeat: int) -> tuple[float, np.ndarray]:
    """Best-of-``repeat`` seconds per tick, plus the final beliefs."""
    best = float("inf")
    beliefs = None
    for _ in range(repeat):
        sim = setup(config, backend=backend)
        start = time.perf_counter()
        for _ in range(ticks):
            step(sim)
        best = min(best, (time.perf_counter() - start) / ticks)
        beliefs = sim.belief_vector()
    return best, beliefs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ticks", type=int, default=25)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if not kernel_available():
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'case':32s} {'python ms/tick':>15s} {'compiled ms/tick':>17s} {'speedup':>8s}  identical")
    for name, config in CASES:
        slow, b_py = time_backend(config.with_changes(max_ticks=args.ticks), "python", args.ticks, args.repeat)
        fast, b_c = time_backend(config.with_changes(max_ticks=args.ticks), "compiled", args.ticks, args.repeat)
        same = np.array_equal(b_py, b_c)
        print(f"{name:32s} {slow * 1e3:15.3f} {fast * 1e3:17.3f} {slow / fast:7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

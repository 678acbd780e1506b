"""Time the compiled and pure-numpy trial kernels on the same noise.

    python3 benchmarks/bench_kernels.py [--trials 100 400] [--horizon 1000] [--repeat 5]

The numba kernel is warmed up (compiled) before timing. Each row also checks
that both backends chose identical arms.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from satbandit import BanditInstance, ObjectiveSpec, PolicySpec, SimulationConfig
from satbandit._accel import HAS_NUMBA
from satbandit.harness import kernel_params, prepare, trial_noise
from satbandit.kernels import run_trials_numba, run_trials_numpy

CASES = {
    "P1": ObjectiveSpec("P1"),
    "P2": ObjectiveSpec("P2", mean_threshold=2.5),
    "P3": ObjectiveSpec("P3", sufficiency=0.05),
    "P4": ObjectiveSpec("P4", mean_threshold=2.5, sufficiency=0.05),
}


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, nargs="+", default=[100, 400])
    ap.add_argument("--horizon", type=int, default=1000)
    ap.add_argument("--arms", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    means = np.arange(1, args.arms + 1, dtype=np.float64)
    inst = BanditInstance(means, np.ones(args.arms))
    print(f"{'case':<5}{'trials':>8}{'numba s':>11}{'numpy s':>11}{'speedup':>9}  same")
    for name, obj in CASES.items():
        if obj.mean_threshold is not None:
            obj = ObjectiveSpec(obj.problem, mean_threshold=float(means[-2] - 0.5),
                                sufficiency=obj.sufficiency)
        for trials in args.trials:
            cfg = SimulationConfig(inst, PolicySpec(obj), args.horizon, trials, 42)
            p = kernel_params(inst, prepare(inst, cfg.policy), args.horizon, None)
            Z = np.stack([trial_noise(42, k, args.horizon) for k in range(trials)])
            run_trials_numba(Z[:1], p)  # compile
            a = run_trials_numba(Z, p)
            b = run_trials_numpy(Z, p)
            tn = best_of(lambda: run_trials_numba(Z, p), args.repeat)
            tp = best_of(lambda: run_trials_numpy(Z, p), args.repeat)
            same = "yes" if np.array_equal(a.arms, b.arms) else "NO"
            print(f"{name:<5}{trials:>8}{tn:>11.4f}{tp:>11.4f}{tp / tn:>9.1f}  {same}")


if __name__ == "__main__":
    main()

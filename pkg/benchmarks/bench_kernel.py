"""Compare the compiled and pure-Python search kernels on tiny instances.

    python benchmarks/bench_kernel.py [--instances 20] [--repeat 3]
"""
import argparse
import statistics
import time

from opmap.generator import tiny_instance
from opmap.oracle import OracleLimits, available_kernels, exact_solve


def time_backend(backend, instances, objective, repeat):
    best = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        values = [exact_solve(inst, OracleLimits(objective=objective), backend).value for inst in instances]
        best.append(time.perf_counter() - t0)
    return min(best), values


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--objective", default="bw-sum")
    ap.add_argument("--min-nodes", type=int, default=6)
    args = ap.parse_args()

    # the largest tiny instances, where the search actually costs something
    pool = (tiny_instance(s) for s in range(100_000))
    instances = []
    for inst in pool:
        if inst.node_count >= args.min_nodes and len(inst.platform.processors) >= 3:
            instances.append(inst)
        if len(instances) == args.instances:
            break
    kernels = available_kernels()
    if "cython" not in kernels:
        print("compiled kernel not built; only the Python kernel is available")
    results = {}
    for name in kernels:
        results[name] = time_backend(name, instances, args.objective, args.repeat)
        print(f"{name:>7}: {results[name][0]:.3f} s for {len(instances)} instances")
    if len(results) == 2:
        (tc, vc), (tp, vp) = results["cython"], results["python"]
        assert vc == vp, "backends disagree"
        print(f"speedup: {tp / tc:.1f}x (median instance size "
              f"{statistics.median(i.node_count for i in instances)} nodes)")


if __name__ == "__main__":
    main()

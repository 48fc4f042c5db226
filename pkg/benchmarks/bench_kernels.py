"""Compare the compiled kernel core with the NumPy fallback.

Thin wrapper over roamgen.kernels.bench so the benchmark can run from a
checkout (`python benchmarks/bench_kernels.py`) or via `roamgen bench`.
"""

from roamgen.kernels.bench import run_benchmarks

if __name__ == "__main__":
    run_benchmarks()

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "benchmarks"))

import bench_kernels  # noqa: E402


def test_benchmark_runs(capsys):
    bench_kernels.main(["--n", "17", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "scatter_pairs" in out and "offset_sum" in out

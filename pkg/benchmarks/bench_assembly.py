"""Benchmark the compiled assembly kernels against the numpy fallback.

Usage: python benchmarks/bench_assembly.py [--repeats N]
"""

import argparse
import time

import numpy as np

from torsilab import _kernels_np
from torsilab.fem import metric_at_barycenters, solve_exit_time
from torsilab.meshing import build_box_mesh, build_disk_mesh
from torsilab.metrics import NIL3, HomogeneousParams3, euclidean, nil3_chart_metric

try:
    from torsilab import _kernels_cy
except ImportError:
    _kernels_cy = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    cases = [
        ("disk k=4 (2D, flat)", build_disk_mesh(1.0, 4), euclidean(2)),
        ("disk k=5 (2D, flat)", build_disk_mesh(1.0, 5), euclidean(2)),
        (
            "box k=4 (3D, nil3)",
            build_box_mesh([(0, 1)] * 3, 4),
            nil3_chart_metric(HomogeneousParams3(group=NIL3, D=1, B=1, C=1)),
        ),
        (
            "box k=5 (3D, nil3)",
            build_box_mesh([(0, 1)] * 3, 5),
            nil3_chart_metric(HomogeneousParams3(group=NIL3, D=1, B=1, C=1)),
        ),
    ]

    print(f"{'case':24s} {'cells':>8s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, mesh, metric in cases:
        ginv, sdet = metric_at_barycenters(mesh, metric)
        args_k = (mesh.vertices, mesh.cells, ginv, sdet)
        t_np = best_of(lambda: _kernels_np.assemble_cells(*args_k), args.repeats)
        if _kernels_cy is not None:
            t_cy = best_of(lambda: _kernels_cy.assemble_cells(*args_k), args.repeats)
            out_np = _kernels_np.assemble_cells(*args_k)
            out_cy = _kernels_cy.assemble_cells(*args_k)
            assert all(np.allclose(a, b, rtol=1e-13) for a, b in zip(out_np, out_cy))
            print(f"{name:24s} {mesh.n_cells:8d} {t_np*1e3:8.2f}ms {t_cy*1e3:8.2f}ms {t_np/t_cy:7.2f}x")
        else:
            print(f"{name:24s} {mesh.n_cells:8d} {t_np*1e3:8.2f}ms {'n/a':>10s} {'n/a':>8s}")

    mesh = build_box_mesh([(0, 1)] * 3, 5)
    metric = nil3_chart_metric(HomogeneousParams3(group=NIL3, D=1, B=1, C=1))
    t_solve = best_of(lambda: solve_exit_time(mesh, metric), max(1, args.repeats // 2))
    print(f"\nfull solve, box k=5 nil3: {t_solve:.2f}s ({mesh.n_interior} unknowns)")


if __name__ == "__main__":
    main()

"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 257,513,1025] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from conicpinch import _kernels_py, kernels

try:
    from conicpinch import _kernels as compiled
except ImportError:
    compiled = None


def _field(n):
    x = np.linspace(-4, 4, n)
    Z = x[None, :] + 1j * x[:, None]
    return np.ascontiguousarray(np.log(2.0 / (1.0 + np.abs(Z) ** 2)))


def bench(n, repeat):
    f = _field(n)
    h = 8.0 / (n - 1)
    rows = []
    for name, call in (("laplacian5", lambda m: m.laplacian5(f, h)),
                       ("level_set_cells", lambda m: m.level_set_cells(f, -0.5))):
        t_py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=repeat))
        if compiled is None:
            rows.append((name, n, t_py, float("nan"), float("nan"), None))
            continue
        t_c = min(timeit.repeat(lambda: call(compiled), number=1, repeat=repeat))
        a, b = call(_kernels_py), call(compiled)
        if isinstance(a, tuple):
            agree = bool(np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]))
        else:
            agree = bool(np.allclose(a, b, atol=1e-9, equal_nan=True))
        rows.append((name, n, t_py, t_c, t_py / t_c, agree))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="257,513,1025")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<16} {'n':>6} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}  agree")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, n_, tp, tc, sp, ok in bench(n, args.repeat):
            print(f"{name:<16} {n_:>6} {1e3 * tp:>12.2f} {1e3 * tc:>14.2f} {sp:>8.1f}  {ok}")


if __name__ == "__main__":
    main()

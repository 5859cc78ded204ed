"""Compare the compiled and pure-Python orbit kernels on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py [n_steps]``.
"""
import sys
import time
from fractions import Fraction

import numpy as np

from rpls import _pykernels
from rpls.gallery import luroth23
from rpls.simulate import SimConfig, _float_tables, orbit_uniforms

try:
    from rpls import _ckernels
except ImportError:
    _ckernels = None


def bench(kernel, args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = kernel.run_orbit(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(n_steps=200_000):
    system = luroth23(Fraction(1, 3))
    cfg = SimConfig(seed=1, n_steps=n_steps, burn_in=0)
    z, right, k, d, cum, A, B = _float_tables(system)
    args = (0.5, orbit_uniforms(cfg, 0), z, right, k, d, cum, A, B, cfg.dither * (B - A), 0)
    t_py, out_py = bench(_pykernels, args, repeat=1)
    print(f"python   {n_steps:>9} steps  {t_py:8.4f} s  {n_steps / t_py / 1e6:8.2f} Msteps/s")
    if _ckernels is None:
        print("compiled kernel not built")
        return
    t_c, out_c = bench(_ckernels, args)
    print(f"compiled {n_steps:>9} steps  {t_c:8.4f} s  {n_steps / t_c / 1e6:8.2f} Msteps/s")
    print(f"speedup  {t_py / t_c:.1f}x   identical traces: {np.array_equal(out_py, out_c)}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200_000)

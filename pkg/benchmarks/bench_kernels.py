"""Compiled vs numpy kernels: agreement and wall time.

Run with ``python3 benchmarks/bench_kernels.py``; prints one line per kernel.
"""
import argparse
import time

import numpy as np

from threewave import _kernels_py

try:
    from threewave import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_shooting(repeat):
    dr, nsteps = 30.0 / 4097, 4096
    bufs = {m: (np.empty(nsteps + 1), np.empty(nsteps + 1)) for m in ("py", "c")}
    out = {}
    out["py"] = _best(lambda: _kernels_py.shoot_soliton(4.19, dr, nsteps, *bufs["py"]), repeat)
    if _kernels_c is not None:
        out["c"] = _best(lambda: _kernels_c.shoot_soliton(4.19, dr, nsteps, *bufs["c"]), repeat)
        sp = _kernels_py.shoot_soliton(4.19, dr, nsteps, *bufs["py"])
        sc = _kernels_c.shoot_soliton(4.19, dr, nsteps, *bufs["c"])
        # only samples up to the stopping index are written
        stop = min(sp[1], sc[1]) + 1
        out["diff"] = float(np.max(np.abs(bufs["py"][0][:stop] - bufs["c"][0][:stop])))
        if sp != sc:
            out["diff"] = float("inf")
    return out


def bench_nonlinear(repeat, n=16383, substeps=8):
    rng = np.random.default_rng(0)
    psi0 = (rng.standard_normal((3, n)) + 1j * rng.standard_normal((3, n))) * 0.5
    a, b = psi0.copy(), psi0.copy()
    out = {"py": _best(lambda: _kernels_py.nonlinear_substeps(a, 2.0, 1e-3, substeps), repeat)}
    if _kernels_c is not None:
        out["c"] = _best(lambda: _kernels_c.nonlinear_substeps(b, 2.0, 1e-3, substeps), repeat)
        x, y = psi0.copy(), psi0.copy()
        _kernels_py.nonlinear_substeps(x, 2.0, 1e-3, substeps)
        _kernels_c.nonlinear_substeps(y, 2.0, 1e-3, substeps)
        out["diff"] = float(np.max(np.abs(x - y)))
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if _kernels_c is None:
        print("compiled extension not available; numpy timings only")
    for name, fn in (("shoot_soliton", bench_shooting), ("nonlinear_substeps", bench_nonlinear)):
        r = fn(args.repeat)
        line = f"{name:20s} python {r['py'] * 1e3:9.3f} ms"
        if "c" in r:
            line += f"   cython {r['c'] * 1e3:9.3f} ms   speedup {r['py'] / r['c']:7.1f}x   max diff {r['diff']:.1e}"
        print(line)


if __name__ == "__main__":
    main()

"""Compare the numba and pure-numpy kernel backends on suite-sized workloads.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Each workload runs once per backend to warm up (numba compiles on first
call), then ``--repeat`` times; the best wall time is reported.  Results
are also checked for agreement between backends.
"""
import argparse
import math
import os
import time

import numpy as np

from induced_pressure._accel import ENV_FLAG, HAVE_NUMBA
from induced_pressure.induced import induced_pressure_root, partition_sums, r_diagnostic
from induced_pressure.potentials import LocallyConstantPotential as Pot
from induced_pressure.potentials import min_value
from induced_pressure.pressure import pressure_definitional, pressure_spectral
from induced_pressure.sft import Sft, word_array
from induced_pressure.suite import golden_memory2, three_symbol


def _workloads(scale):
    three = three_symbol()
    gm2 = golden_memory2()
    big = Sft.full_shift(12)
    rng = np.random.default_rng(0)
    big_phi = Pot.from_function(big, 2, lambda w: float(rng.normal()))
    t_three = 22 * scale * min_value(three.psi)
    beta = induced_pressure_root(gm2) + 0.2
    return [
        ("enumerate_words golden n=26", lambda: word_array(Sft.golden_mean(), int(26 * scale)).shape[0]),
        ("word_logsum golden-memory2 n=28", lambda: pressure_definitional(gm2.sft, gm2.phi, int(28 * scale))),
        (f"partition_sums three-symbol T={t_three:.1f}", lambda: partition_sums(three, t_three)[0].log_value),
        ("r_diagnostic golden-memory2 default grid", lambda: float(r_diagnostic(gm2, beta).log_values[-1])),
        ("power_iteration 144x144 (12-shift, memory 2)", lambda: pressure_spectral(big, big_phi)),
    ]


def _run(fn, repeat):
    value = fn()
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply problem sizes (levels/lengths)")
    args = ap.parse_args(argv)

    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    saved = os.environ.get(ENV_FLAG)
    print(f"{'workload':48s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup  agree")
    try:
        for name, fn in _workloads(args.scale):
            times, values = [], []
            for b in backends:
                if b == "numpy":
                    os.environ[ENV_FLAG] = "1"
                else:
                    os.environ.pop(ENV_FLAG, None)
                t, v = _run(fn, args.repeat)
                times.append(t)
                values.append(v)
            agree = all(math.isclose(v, values[0], rel_tol=1e-10) for v in values)
            speed = times[-1] / times[0] if len(times) > 1 else 1.0
            print(f"{name:48s} " + " ".join(f"{t * 1e3:8.1f}ms" for t in times) + f"   {speed:6.1f}x  {agree}")
    finally:
        if saved is None:
            os.environ.pop(ENV_FLAG, None)
        else:
            os.environ[ENV_FLAG] = saved


if __name__ == "__main__":
    main()

"""Compare the numba and numpy backends of the hot loops.

Each backend runs in its own interpreter because the choice is made once
at import time (``LINESHAPE_DISABLE_NUMBA``).  Two workloads are timed:

* ``pv``: principal-value sums behind a 501-point single-spin frequency
  sweep (bath grid construction plus kernel and source assembly);
* ``volterra``: a single-spin time-domain propagation with ``n`` steps,
  whose memory sum costs O(n^2).

Usage::

    python3 benchmarks/bench_kernels.py [--steps 5000] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from lineshape import BACKEND
from lineshape.bath import BathSpec
from lineshape.hamiltonian import CouplingSpec, SpinSystemSpec
from lineshape.susceptibility import chi_sweep, response_pair
from lineshape.timedomain import propagate

steps, repeat = int(sys.argv[1]), int(sys.argv[2])
bath = BathSpec(0.1, 0.5, 5.0)
system, coupling = SpinSystemSpec.single(1.0), CouplingSpec.uniform(1, 0.0)
pair = response_pair("+-", 1)
grid = np.round(np.arange(0.5, 1.5 + 1e-9, 0.002), 12)

def best(func):
    func()                                   # warm-up (compilation, caches)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = func()
        times.append(time.perf_counter() - start)
    return min(times), out

t_pv, sweep = best(lambda: chi_sweep(grid, system, coupling, bath, pair))
t_vol, traj = best(lambda: propagate(system, coupling, bath, pair.A, 0.02, 0.02 * steps))
print(json.dumps({"backend": BACKEND, "pv": t_pv, "volterra": t_vol,
                  "chi_checksum": float(np.sum(np.abs(sweep.chi))),
                  "traj_checksum": float(np.sum(np.abs(traj.samples)))}))
"""


def run(backend, steps, repeat):
    env = dict(os.environ)
    env.pop("LINESHAPE_DISABLE_NUMBA", None)
    if backend == "numpy":
        env["LINESHAPE_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(steps), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=5000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    res = {b: run(b, args.steps, args.repeat) for b in ("numba", "numpy")}
    print(f"{'workload':<10}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}")
    for key in ("pv", "volterra"):
        a, b = res["numba"][key], res["numpy"][key]
        print(f"{key:<10}{a:>12.3f}{b:>12.3f}{b / a:>10.1f}")
    for key in ("chi_checksum", "traj_checksum"):
        a, b = res["numba"][key], res["numpy"][key]
        print(f"{key}: relative backend difference {abs(a - b) / abs(b):.1e}")
    if res["numba"]["backend"] != "numba":
        print("note: numba is unavailable, both runs used numpy")


if __name__ == "__main__":
    main()

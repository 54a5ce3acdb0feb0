"""Compare the compiled and numpy kernel backends.

Each backend runs in its own interpreter (``CQSDC_PURE_PYTHON=1`` forces the
fallback) so both are timed on identical work.

    python benchmarks/bench_kernels.py [--trials 20000]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from cqsdc import kernels
from cqsdc.adversary import AttackSpec, estimate_detection

trials = int(sys.argv[1])
rng = np.random.default_rng(0)
n = 8
psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
psi /= np.linalg.norm(psi)
h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
g4 = np.eye(4, dtype=complex)[[0, 1, 3, 2]]

def best(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number * 1e6

out = {
    "backend": kernels.BACKEND,
    "apply_1q_us": best(lambda: kernels.apply_1q(psi, n, 3, h), 2000),
    "apply_2q_us": best(lambda: kernels.apply_2q(psi, n, 1, 6, g4), 2000),
    "apply_cnot_us": best(lambda: kernels.apply_cnot(psi, n, 0, 5), 2000),
    "marginal_us": best(lambda: kernels.marginal(psi, n, [2, 5, 7]), 2000),
}
spec = AttackSpec.intercept_resend("random", ("B", "C"))
t = timeit.default_timer()
rep = estimate_detection(spec, "random", trials, seed=1)
out["monte_carlo_s"] = timeit.default_timer() - t
out["monte_carlo_estimate"] = rep.mc_estimate
print(json.dumps(out))
"""


def run(pure: bool, trials: int) -> dict:
    env = dict(os.environ)
    if pure:
        env["CQSDC_PURE_PYTHON"] = "1"
    else:
        env.pop("CQSDC_PURE_PYTHON", None)
    p = subprocess.run([sys.executable, "-c", WORKER, str(trials)], env=env,
                       capture_output=True, text=True, check=True)
    return json.loads(p.stdout)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20_000)
    args = ap.parse_args()
    fast, slow = run(False, args.trials), run(True, args.trials)
    if fast["backend"] != "cython":
        print("compiled extension not built; both runs used the numpy fallback", file=sys.stderr)
    keys = [k for k in fast if k.endswith(("_us", "_s"))]
    print(f"{'metric':<16}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for k in keys:
        print(f"{k:<16}{fast[k]:>12.3f}{slow[k]:>12.3f}{slow[k] / fast[k]:>9.2f}x")
    same = fast["monte_carlo_estimate"] == slow["monte_carlo_estimate"]
    print(f"identical Monte-Carlo estimate: {same} ({fast['monte_carlo_estimate']})")


if __name__ == "__main__":
    main()

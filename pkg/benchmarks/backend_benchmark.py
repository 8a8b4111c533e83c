"""Compare the compiled (numba) and pure-numpy backends on the hot kernels.

Runs the stream simulator and the mixture radius path in a subprocess per
backend (the flag is read at import time) and prints wall-clock timings.

    python3 benchmarks/backend_benchmark.py [--streams 100] [--horizon 200]
"""

import argparse
import json
import os
import subprocess
import sys

SNIPPET = r"""
import json, time
import numpy as np
from selfnorm._backend import backend_name
from selfnorm.harness import ExperimentConfig, simulate_stream
from selfnorm.streams import radius_path
from selfnorm.radii import Method

n_streams, horizon = {n_streams}, {horizon}
cfg = ExperimentConfig.from_dict({{
    "experiment": "coverage", "replicas": n_streams, "horizon": horizon,
    "seed": 5, "kernel": {{"family": "Linear", "input_dim": 5}},
    "noise": {{"family": "RescaledUniform"}},
}})
simulate_stream(cfg, 0)  # warm up (numba compilation)
radius_path(Method.MIXED_BENNETT, cfg.radius, *simulate_stream(cfg, 0)[1:])

t0 = time.perf_counter()
stats = [simulate_stream(cfg, r) for r in range(n_streams)]
t_stream = time.perf_counter() - t0

t0 = time.perf_counter()
for s, g2, logdet, resid in stats:
    radius_path(Method.MIXED_BENNETT, cfg.radius, g2, logdet, resid)
t_radius = time.perf_counter() - t0

print(json.dumps({{"backend": backend_name(),
                   "stream_s": t_stream, "radius_s": t_radius}}))
"""


def run_backend(flag, n_streams, horizon):
    env = dict(os.environ, SELFNORM_NUMBA=flag)
    code = SNIPPET.format(n_streams=n_streams, horizon=horizon)
    proc = subprocess.run([sys.executable, "-c", code],
                          capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--streams", type=int, default=100)
    ap.add_argument("--horizon", type=int, default=200)
    args = ap.parse_args()

    rows = [run_backend(flag, args.streams, args.horizon) for flag in ("1", "0")]
    print(f"{args.streams} streams, horizon {args.horizon}")
    print(f"{'backend':>8} | {'stream sim':>10} | {'radius path':>11}")
    for r in rows:
        print(f"{r['backend']:>8} | {r['stream_s']:>9.3f}s | {r['radius_s']:>10.3f}s")
    if rows[0]["backend"] != rows[1]["backend"]:
        su = rows[1]["stream_s"] / rows[0]["stream_s"]
        ru = rows[1]["radius_s"] / rows[0]["radius_s"]
        print(f"speedup: stream sim {su:.1f}x, radius path {ru:.1f}x")


if __name__ == "__main__":
    main()

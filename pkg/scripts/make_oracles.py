"""Compute the Monte-Carlo oracles that the test suite freezes.

Run once; writes tests/data/oracles.json.  The tests read the frozen numbers
and never recompute them, so a change in any sampler cannot move its own
reference.

    python3 scripts/make_oracles.py
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np

from spikechain.mc import McConfig, euler_run
from spikechain.models import NetworkSpec, NeuronModel, NeuronSpec

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "oracles.json"


def conditioned_brownian(n: int = 10_000_000, seed: int = 11, sigma: float = 1.0,
                         mu: float = 1.0, t_star: float = 0.5, hit: float = 1.0,
                         delta: float = 0.01, n_bins: int = 40, lo: float = -3.0):
    """Law of V(t_star) among paths from 0 at time 0 whose first passage of 1
    lies within ``delta`` of ``hit``.  Simulated exactly: Gaussian value at
    t_star, Brownian-bridge survival up to t_star, exact inverse-Gaussian hit
    time afterwards."""
    rng = np.random.default_rng(seed)
    kept = []
    for chunk in range(n // 1_000_000):
        m = 1_000_000
        u = mu * t_star + sigma * math.sqrt(t_star) * rng.standard_normal(m)
        alive = u < 1.0
        cross = np.exp(-2.0 * 1.0 * np.clip(1.0 - u, 0, None) / (sigma**2 * t_star))
        alive &= rng.random(m) >= cross
        u = u[alive]
        a = 1.0 - u
        tau = rng.wald(a / mu, a * a / sigma**2)
        ok = np.abs(t_star + tau - hit) <= delta
        kept.append(u[ok])
    u = np.concatenate(kept)
    edges = np.linspace(lo, 1.0, n_bins + 1)
    counts, _ = np.histogram(u, bins=edges)
    return {
        "process": {"kind": "Brownian", "sigma": sigma, "drift": mu},
        "v_last": 0.0, "t_last": 0.0, "t_star": t_star, "hit_time": hit, "theta": 1.0,
        "delta": delta, "paths": n, "accepted": int(u.size), "seed": seed,
        "edges": edges.tolist(), "probs": (counts / u.size).tolist(),
        "outside_window": float(np.mean(u < lo)),
    }


def _pif(drift: float, sigma: float = 1.0) -> NeuronSpec:
    return NeuronSpec(0, NeuronModel.PIF_INSTANT, sigma, 1.0, 0.0, drift)


def negative_drift_hit_frequency(n: int = 1_000_000, dt: float = 1e-2, horizon: float = 20.0,
                                 seed: int = 12):
    """Hit frequency of BM with drift -1, sigma 1 and barrier 1 (EulerGobet)."""
    spec = NetworkSpec((_pif(-1.0),), (), horizon)
    ens = euler_run(spec, cfg=McConfig(dt, n, "EulerGobet", seed), first_spike_only=True)
    p = ens.time.size / n
    return {"drift": -1.0, "sigma": 1.0, "a": 1.0, "dt": dt, "horizon": horizon, "paths": n,
            "seed": seed, "frequency": p, "std_error": math.sqrt(p * (1 - p) / n)}


def ig_mean(n: int = 100_000, dt: float = 1e-3, seed: int = 13):
    """Mean first-passage time of BM with drift 1, sigma 1, barrier 1 (EulerGobet)."""
    spec = NetworkSpec((_pif(1.0),), (), 200.0)
    ens = euler_run(spec, cfg=McConfig(dt, n, "EulerGobet", seed), first_spike_only=True)
    t = ens.time
    return {"a": 1.0, "drift": 1.0, "sigma": 1.0, "dt": dt, "paths": n, "hits": int(t.size),
            "seed": seed, "mean": float(t.mean()), "std_error": float(t.std() / math.sqrt(t.size))}


def main():
    out = {}
    for name, fn in [("conditioned_brownian", conditioned_brownian),
                     ("negative_drift_hit_frequency", negative_drift_hit_frequency),
                     ("ig_mean", ig_mean)]:
        t0 = time.perf_counter()
        out[name] = fn()
        print(f"{name}: {time.perf_counter() - t0:.1f} s")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(OUT)


if __name__ == "__main__":
    main()

"""Volterra first-passage densities against closed forms and EulerGobet.

Prints the L-infinity density error for drifted Brownian motion and the KS
distance to a Monte-Carlo sample for a leaky membrane.
"""

import argparse

import numpy as np
from scipy import stats

from spikechain.fpt import DriftedBmFptParams, brownian, ig_density, volterra_fpt
from spikechain.mc import McConfig, euler_run
from spikechain.models import NetworkSpec, NeuronModel, NeuronSpec

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--step", type=float, default=1e-3)
    args = p.parse_args()
    for a, mu, sigma in ((1.0, 1.0, 1.0), (0.5, -0.5, 0.8), (2.0, 0.0, 1.5)):
        t = volterra_fpt(brownian(sigma, mu), 0.0, a, grid_step=args.step, horizon=4.0)
        exact = np.concatenate([[0.0], ig_density(t.grid[1:], DriftedBmFptParams(a, mu, sigma))])
        print(f"brownian a={a} mu={mu} sigma={sigma}: Linf={np.max(np.abs(t.density - exact)):.2e}")
    for tau, drive in ((1.0, 1.5), (0.5, 1.2)):
        nr = NeuronSpec(0, NeuronModel.LIF_INSTANT, 1.0, 1.0, 0.0, drive, tau=tau)
        t = volterra_fpt(nr.process(), 0.0, 1.0, grid_step=args.step, horizon=10.0)
        mc = euler_run(NetworkSpec((nr,), (), 10.0), cfg=McConfig(args.dt, args.paths, seed=1),
                       first_spike_only=True).time
        ks = stats.kstest(mc, lambda s: np.interp(s, t.grid, t.cdf) / t.hit_mass).statistic
        print(f"leaky tau={tau} input={drive}: hit mass={t.hit_mass:.4f} KS={ks:.4f}")

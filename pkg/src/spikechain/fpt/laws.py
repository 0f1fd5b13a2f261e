"""Uniform access to hitting-time laws of Gauss-Markov processes.

Closed form is used for Brownian motion whenever the input is constant over
the relevant window.  Time-homogeneous Ornstein-Uhlenbeck windows use a cached
family of Volterra solutions indexed by the start's distance to the threshold.
Everything else falls back to a fresh Volterra solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

from .closed_form import NEVER, ig_cdf, ig_logpdf, ig_sample
from .processes import DriftedBmFptParams, GaussMarkovSpec, ornstein_uhlenbeck
from .tables import refined_grid, table_sample
from .volterra import solve_many, volterra_fpt


def sample_fpt(rng: np.random.Generator, process: GaussMarkovSpec, x0: float, t_start: float,
               theta: float, horizon: float) -> float:
    """Hitting time of ``theta`` measured from ``t_start``, or NEVER."""
    if x0 >= theta:
        return 0.0
    if not horizon > 0:
        return NEVER
    c = process.constant_drift_on(t_start, t_start + horizon)
    if c is not None and not process.is_ou:
        return ig_sample(rng, DriftedBmFptParams(theta - x0, c, process.sigma), horizon)
    if c is not None:
        fam = ou_family_for(process, c, theta, theta - x0, horizon)
        if fam is not None:
            return fam.sample(rng, theta - x0, horizon)
    table = volterra_fpt(process, x0, theta, t_start, horizon / 4096, horizon)
    return table_sample(rng, table)


def fpt_density_many(process: GaussMarkovSpec, u, t_start: float, s: float, theta: float):
    """First-passage density at lag ``s`` for each start in ``u``."""
    u = np.asarray(u, dtype=float)
    gaps = theta - u
    c = process.constant_drift_on(t_start, t_start + s)
    if c is not None and not process.is_ou:
        return np.exp(ig_logpdf(s, gaps, c, process.sigma))
    if c is not None:
        fam = ou_family_for(process, c, theta, float(gaps.max()), s)
        if fam is not None:
            return fam.density(s, gaps)
    out = np.zeros_like(u)
    ok = gaps > 0
    if ok.any():
        grid = refined_grid(s, n_uniform=512, n_fine=120)
        out[ok] = solve_many(process, u[ok], theta, t_start, grid)[-1]
    return out


def fpt_survival_many(process: GaussMarkovSpec, u, t_start: float, s: float, theta: float):
    """P(no hit within lag ``s``) for each start in ``u``."""
    u = np.asarray(u, dtype=float)
    gaps = theta - u
    if s <= 0:
        return np.where(gaps > 0, 1.0, 0.0)
    c = process.constant_drift_on(t_start, t_start + s)
    if c is not None and not process.is_ou:
        return 1.0 - ig_cdf(s, gaps, c, process.sigma)
    if c is not None:
        fam = ou_family_for(process, c, theta, float(gaps.max()), s)
        if fam is not None:
            return fam.survival(s, gaps)
    out = np.zeros_like(u)
    ok = gaps > 0
    if ok.any():
        grid = refined_grid(s, n_uniform=512, n_fine=120)
        g = solve_many(process, u[ok], theta, t_start, grid)
        mass = trapezoid(g, grid, axis=0)
        out[ok] = np.clip(1.0 - mass, 0.0, 1.0)
    return out


def killed_transition_logpdf(process: GaussMarkovSpec, u, t: float, y: float, s: float,
                             theta: float):
    """Log-density of V(t) = u jointly with no crossing of theta on [s, t]."""
    u = np.asarray(u, dtype=float)
    dt = t - s
    free = process.transition_logpdf(u, t, y, s)
    c = process.constant_drift_on(s, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        if c is not None and not process.is_ou:
            # bridge survival does not depend on the drift
            x = 2.0 * (theta - y) * (theta - u) / (process.sigma**2 * dt)
            out = free + np.log(-np.expm1(-x))
        else:
            # renewal: free density minus paths that touched theta first
            fam = ou_family_for(process, c, theta, theta - y, dt) if c is not None else None
            if fam is not None:
                lags = refined_grid(dt, n_uniform=256, n_fine=60)
                g = fam.density_along(lags, theta - y)
            else:
                lags = refined_grid(dt, n_uniform=512, n_fine=120)
                g = solve_many(process, np.array([y]), theta, s, lags)[:, 0]
            r = s + lags[1:-1]
            w = 0.5 * (lags[2:] - lags[:-2])
            trans = np.exp(process.transition_logpdf(u[:, None], t, theta, r[None, :]))
            lost = trans @ (w * g[1:-1])
            out = np.log(np.clip(np.exp(free) - lost, 0.0, None))
    return np.where(u < theta, out, -np.inf)


# -- cached Ornstein-Uhlenbeck families ------------------------------------

@dataclass(frozen=True, eq=False)
class OuFamily:
    """First-passage densities for a grid of start gaps below the threshold."""

    gaps: np.ndarray      # increasing, gaps[0] == 0
    grid: np.ndarray      # lag grid, starts at 0
    dens: np.ndarray      # (len(grid), len(gaps))
    cum: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(self.gaps[-1])

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def _rows(self, s, table):
        j = int(np.clip(np.searchsorted(self.grid, s), 1, self.grid.size - 1))
        t0, t1 = self.grid[j - 1], self.grid[j]
        lam = (s - t0) / (t1 - t0)
        return (1.0 - lam) * table[j - 1] + lam * table[j]

    def density(self, s: float, gaps):
        row = self._rows(s, self.dens)
        return np.interp(gaps, self.gaps, row, left=0.0)

    def survival(self, s: float, gaps):
        row = self._rows(s, self.cum)
        return np.interp(gaps, self.gaps, 1.0 - row, left=0.0)

    def density_along(self, lags, gap: float):
        """Density at several lags for one start gap."""
        k = min(max(int(np.searchsorted(self.gaps, gap)), 1), self.gaps.size - 1)
        lam = (gap - self.gaps[k - 1]) / (self.gaps[k] - self.gaps[k - 1])
        col = (1.0 - lam) * self.dens[:, k - 1] + lam * self.dens[:, k]
        return np.interp(lags, self.grid, col)

    def sample(self, rng: np.random.Generator, gap: float, horizon: float) -> float:
        if gap <= 0:
            return 0.0
        k = int(np.searchsorted(self.gaps, gap))
        k = min(max(k, 1), self.gaps.size - 1)
        lam = (gap - self.gaps[k - 1]) / (self.gaps[k] - self.gaps[k - 1])
        # mixture of neighbouring rows == linear interpolation of their CDFs
        col = k if rng.random() < lam else k - 1
        if col == 0:
            return 0.0
        cdf = self.cum[:, col]
        v = rng.random()
        if v >= cdf[-1]:
            return NEVER
        t = float(np.interp(v, cdf, self.grid))
        return NEVER if t > horizon else t


def ou_family_for(process: GaussMarkovSpec, drift: float, theta: float, gap: float,
                  horizon: float) -> OuFamily | None:
    """Cached family covering ``gap`` and ``horizon``; None if unreasonable."""
    # generous floors keep the number of distinct families small
    span = _round_up(max(gap, 4.0 * process.diffusion * math.sqrt(process.tau)))
    lag = _round_up(max(horizon, 8.0 * process.tau))
    if span / process.diffusion > 64.0 or lag / process.tau > 256.0:
        return None
    return _build_family(process.tau, process.sigma, process.rest_mu + drift, theta, span, lag)


def _round_up(x: float) -> float:
    return 2.0 ** math.ceil(math.log2(x))


@lru_cache(maxsize=64)
def _build_family(tau, sigma, level, theta, span, lag) -> OuFamily:
    proc = ornstein_uhlenbeck(tau, sigma, level)
    n = 160
    gaps = np.concatenate([[0.0], span * (np.arange(1, n + 1) / n) ** 2])
    grid = refined_grid(lag, n_uniform=2048, n_fine=200, finest=lag * 1e-9)
    dens = solve_many(proc, theta - gaps[1:], theta, 0.0, grid, blowup=math.inf)
    steps = np.diff(grid)[:, None]
    cdf = np.vstack([np.zeros(n), np.cumsum(0.5 * (dens[1:] + dens[:-1]) * steps, axis=0)])
    cdf = np.clip(cdf, 0.0, 1.0)
    # gap 0 starts on the threshold: immediate hit
    dens = np.hstack([np.zeros((grid.size, 1)), dens])
    cdf = np.hstack([np.ones((grid.size, 1)), cdf])
    cdf[0, 0] = 1.0
    for arr in (gaps, grid, dens, cdf):
        arr.setflags(write=False)
    return OuFamily(gaps, grid, dens, cdf)

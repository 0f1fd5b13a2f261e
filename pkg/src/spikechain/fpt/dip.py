"""Hitting times for membranes driven by exponentially filtered noise.

The synaptic current obeys  tau_s dI = -I dt + sigma dW  and feeds the membrane

    PIF:  dV = (input(t) + I) dt
    LIF:  tau dV = (rest_mu - V + input(t) + I) dt

No closed form is used.  Each step draws the current's exact OU transition
jointly with its exact time integral, so for the PIF variant V is exact at the
grid points; the LIF variant integrates the leak with an Euler step.  V has
no Brownian part, so crossings are located by linear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .closed_form import NEVER
from .processes import PiecewiseConstant
from .tables import FptTable


@dataclass(frozen=True)
class DipModel:
    """Filtered-noise membrane; ``tau=None`` selects the perfect integrator."""

    tau_s: float
    sigma: float
    input: PiecewiseConstant = PiecewiseConstant()
    tau: float | None = None
    rest_mu: float = 0.0

    def __post_init__(self):
        if isinstance(self.input, (int, float)):
            object.__setattr__(self, "input", PiecewiseConstant.constant(self.input))
        if not self.tau_s > 0:
            raise ValueError("tau_s must be > 0")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be > 0")

    def _args(self):
        return (self.tau_s, self.sigma, -1.0 if self.tau is None else self.tau, self.rest_mu,
                np.asarray(self.input.times, dtype=float), np.asarray(self.input.values, dtype=float))


@dataclass(frozen=True, eq=False)
class DipHit:
    """Hitting time (from the start) and the current at that moment.

    ``path`` holds (times, v, i_s) on the step grid when it was requested; the
    last point is the crossing itself.
    """

    time: float
    i_s: float
    path: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None


@njit(cache=True)
def _step_moments(h, tau_s, sigma):
    # exact joint law of (I(h) - a I(0), int_0^h I - tau_s (1-a) I(0))
    x = h / tau_s
    b = -math.expm1(-x)
    var1 = sigma * sigma * b * (2.0 - b) / (2.0 * tau_s)
    if x < 1e-2:
        f = x**3 / 3.0 - x**4 / 4.0 + 7.0 * x**5 / 60.0
    else:
        f = x - b - 0.5 * b * b
    var2 = sigma * sigma * tau_s * f
    cov = 0.5 * sigma * sigma * b * b
    l11 = math.sqrt(var1)
    l21 = cov / l11 if l11 > 0.0 else 0.0
    l22 = math.sqrt(max(var2 - l21 * l21, 0.0))
    return 1.0 - b, tau_s * b, l11, l21, l22


@njit(cache=True)
def _input_index(t, times, k):
    # inputs are scanned forward in time; k only ever grows
    while k < times.size and times[k] <= t:
        k += 1
    return k


@njit(cache=True)
def _advance(v, i, drive, h, a, ib, l11, l21, l22, z1, z2, tau, rest_mu):
    e1 = l11 * z1
    e2 = l21 * z1 + l22 * z2
    j = ib * i + e2
    if tau > 0.0:
        v_new = v + h / tau * (rest_mu + drive - v) + j / tau
    else:
        v_new = v + drive * h + j
    return v_new, a * i + e1


@njit(cache=True)
def _single_path(gen, v0, is0, theta, t_start, dt, n_steps, tau_s, sigma, tau, rest_mu,
                 times, values, keep):
    a, ib, l11, l21, l22 = _step_moments(dt, tau_s, sigma)
    m = n_steps + 2 if keep else 1
    pv = np.empty(m)
    pi = np.empty(m)
    pv[0] = v0
    pi[0] = is0
    v, i = v0, is0
    kin = 0
    for k in range(n_steps):
        kin = _input_index(t_start + k * dt, times, kin)
        v_new, i_new = _advance(v, i, values[kin], dt, a, ib, l11, l21, l22,
                                gen.standard_normal(), gen.standard_normal(),
                                tau, rest_mu)
        if v_new >= theta:
            frac = (theta - v) / (v_new - v)
            ic = i + frac * (i_new - i)
            if keep:
                pv[k + 1] = theta
                pi[k + 1] = ic
            return (k + frac) * dt, ic, k + 2, pv, pi
        v, i = v_new, i_new
        if keep:
            pv[k + 1] = v
            pi[k + 1] = i
    return np.inf, i, n_steps + 1, pv, pi


@njit(cache=True)
def _batch(gen, n_paths, v0, is0, theta, dt, n_steps, tau_s, sigma, tau, rest_mu,
           times, values, coupled):
    """Hit times of independent paths; with ``coupled`` also those of the
    2*dt scheme driven by the same noise (n_steps counts fine steps)."""
    a, ib, l11, l21, l22 = _step_moments(dt, tau_s, sigma)
    ca, cib, c11, c21, c22 = _step_moments(2.0 * dt, tau_s, sigma)
    fine = np.full(n_paths, np.inf)
    coarse = np.full(n_paths, np.inf)
    for p in range(n_paths):
        v, i = v0, is0
        cv, ci = v0, is0
        e1a = 0.0
        e2a = 0.0
        kin = 0
        kin_c = 0
        fine_done = False
        coarse_done = not coupled
        for k in range(n_steps):
            z1 = gen.standard_normal()
            z2 = gen.standard_normal()
            if not fine_done:
                kin = _input_index(k * dt, times, kin)
                v_new, i_new = _advance(v, i, values[kin], dt, a, ib, l11, l21, l22, z1, z2,
                                        tau, rest_mu)
                if v_new >= theta:
                    fine[p] = (k + (theta - v) / (v_new - v)) * dt
                    fine_done = True
                v, i = v_new, i_new
            if not coarse_done:
                e1 = l11 * z1
                e2 = l21 * z1 + l22 * z2
                if k % 2 == 0:
                    e1a, e2a = e1, e2
                else:
                    # compose the two fine innovations into the coarse ones
                    c1 = a * e1a + e1
                    c2 = e2a + e2 + ib * e1a
                    # back out standard normals for the coarse factorisation
                    w1 = c1 / c11 if c11 > 0.0 else 0.0
                    w2 = (c2 - c21 * w1) / c22 if c22 > 0.0 else 0.0
                    tc = (k - 1) * dt
                    kin_c = _input_index(tc, times, kin_c)
                    cv_new, ci_new = _advance(cv, ci, values[kin_c], 2.0 * dt, ca, cib, c11, c21,
                                              c22, w1, w2, tau, rest_mu)
                    if cv_new >= theta:
                        coarse[p] = tc + (theta - cv) / (cv_new - cv) * 2.0 * dt
                        coarse_done = True
                    cv, ci = cv_new, ci_new
            if fine_done and coarse_done:
                break
    return fine, coarse


def sample_dip_fpt(rng: np.random.Generator, model: DipModel, v0: float, is0: float,
                   theta: float, t_start: float, horizon: float, dt: float,
                   keep_path: bool = False) -> DipHit:
    """One hitting time measured from ``t_start``; NEVER when beyond ``horizon``."""
    if v0 >= theta:
        return DipHit(0.0, is0, (np.array([t_start]), np.array([v0]), np.array([is0]))
                      if keep_path else None)
    if not horizon > 0:
        return DipHit(NEVER, is0, None)
    n_steps = int(math.ceil(horizon / dt))
    t, ic, used, pv, pi = _single_path(rng, v0, is0, theta, t_start, dt, n_steps,
                                       *model._args(), keep_path)
    if t > horizon:
        t = NEVER
    path = None
    if keep_path:
        times = t_start + dt * np.arange(used, dtype=float)
        if math.isfinite(t):
            times[-1] = t_start + t
        path = (times, pv[:used].copy(), pi[:used].copy())
    return DipHit(float(t), float(ic), path)


def dip_hit_times(rng: np.random.Generator, model: DipModel, v0: float, is0: float,
                  theta: float, dt: float, horizon: float, n_paths: int,
                  coupled: bool = False):
    """Raw hit times (inf = none within horizon).  With ``coupled`` a second
    array from the 2*dt scheme on the same noise is returned as well."""
    if not v0 < theta:
        raise ValueError("v0 must lie below theta")
    if not dt > 0 or not horizon >= dt:
        raise ValueError("need 0 < dt <= horizon")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n_steps = int(math.ceil(horizon / dt))
    if coupled and n_steps % 2:
        n_steps += 1
    fine, coarse = _batch(rng, n_paths, v0, is0, theta, dt, n_steps, *model._args(), coupled)
    fine[fine > horizon] = np.inf
    coarse[coarse > horizon] = np.inf
    return (fine, coarse) if coupled else fine


def dip_fpt_mc(rng: np.random.Generator, tau_s: float, sigma: float, input, v0: float,
               is0: float, theta: float, dt: float, horizon: float, n_paths: int,
               tau: float | None = None, rest_mu: float = 0.0, n_bins: int = 1024) -> FptTable:
    """Empirical first-passage table of the filtered-noise membrane."""
    if n_paths < 10_000:
        raise ValueError("n_paths must be at least 10000")
    model = DipModel(tau_s, sigma, input if isinstance(input, PiecewiseConstant)
                     else PiecewiseConstant.constant(input), tau, rest_mu)
    hits = dip_hit_times(rng, model, v0, is0, theta, dt, horizon, n_paths)
    return table_from_hits(hits, horizon, n_bins)


def table_from_hits(hits, horizon: float, n_bins: int = 1024) -> FptTable:
    """Histogram-smoothed table; node densities average the adjacent bins."""
    hits = np.asarray(hits, dtype=float)
    edges = np.linspace(0.0, horizon, n_bins + 1)
    h = edges[1] - edges[0]
    counts, _ = np.histogram(hits[np.isfinite(hits)], bins=edges)
    bins = counts / (hits.size * h)
    padded = np.concatenate([[0.0], bins, [0.0]])
    node = 0.5 * (padded[1:] + padded[:-1])
    return FptTable.from_density(edges, node)


def ou_current_step(rng: np.random.Generator, i: float, h: float, tau_s: float, sigma: float) -> float:
    """Exact transition of the synaptic current over a lag ``h``."""
    if h <= 0:
        return i
    mean = i * math.exp(-h / tau_s)
    var = sigma * sigma / (2.0 * tau_s) * -math.expm1(-2.0 * h / tau_s)
    return mean + math.sqrt(var) * float(rng.standard_normal())

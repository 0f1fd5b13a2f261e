"""Inverse-Gaussian hitting-time law of drifted Brownian motion.

The hitting time of ``a > 0`` by ``mu*t + sigma*W_t`` has density

    a / (sigma * sqrt(2 pi t^3)) * exp(-(a - mu t)^2 / (2 t sigma^2))

and total mass ``min(1, exp(2 mu a / sigma^2))``.  When the mass is below one
the missing part is reported as :data:`NEVER`.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.special import log_ndtr

from .processes import DriftedBmFptParams

#: Outcome of a hitting-time draw that does not occur within the horizon.
NEVER = math.inf


def ig_density(t, p: DriftedBmFptParams):
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise ValueError("hitting-time density is defined for t > 0 only")
    out = np.exp(ig_logpdf(t_arr, p.a, p.mu, p.sigma))
    return float(out) if out.ndim == 0 else out


def ig_logpdf(t, a, mu, sigma):
    """Vectorised log-density; t <= 0 maps to -inf, a <= 0 to -inf."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.log(a) - np.log(sigma) - 0.5 * np.log(2.0 * np.pi) - 1.5 * np.log(t)
               - (a - mu * t) ** 2 / (2.0 * t * sigma**2))
    return np.where((t > 0) & (a > 0), out, -np.inf)


def ig_cdf(t, a, mu, sigma):
    """P(hit <= t); defective when mu < 0."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        st = sigma * np.sqrt(t)
        z1 = (mu * t - a) / st
        z2 = (-mu * t - a) / st
        # second term kept in log-space: exp(2 mu a / s^2) can overflow alone
        out = np.exp(log_ndtr(z1)) + np.exp(2.0 * mu * a / sigma**2 + log_ndtr(z2))
    out = np.where(t > 0, out, 0.0)
    return np.where(a > 0, np.clip(out, 0.0, 1.0), 1.0)


def ig_survival(t, a, mu, sigma):
    return 1.0 - ig_cdf(t, a, mu, sigma)


def ig_sample(rng: np.random.Generator, p: DriftedBmFptParams, horizon: float = math.inf,
              size=None):
    """Exact draw of the (possibly defective) hitting time.

    Returns :data:`NEVER` when the path never hits or hits after ``horizon``.
    With ``size`` an array of draws is returned.
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    n = 1 if size is None else int(np.prod(size))
    a, mu, sigma = p.a, p.mu, p.sigma
    lam = a * a / (sigma * sigma)
    z = rng.standard_normal(n)
    u = rng.random(n)
    if mu == 0.0:
        t = lam / (z * z)
    else:
        m = a / abs(mu)
        t = _wald_transform(m, lam, z, u)
        if mu < 0:
            hit = rng.random(n) < math.exp(2.0 * mu * a / sigma**2)
            t = np.where(hit, t, NEVER)
    t = np.where(t > horizon, NEVER, t)
    if size is None:
        return float(t[0])
    return t.reshape(size)


def _wald_transform(m, lam, z, u):
    # Michael-Schucany-Haas, written to avoid cancellation for large m*z^2/lam
    c = m * z * z / (2.0 * lam)
    x = m / (1.0 + c + np.sqrt(c * (c + 2.0)))
    return np.where(u <= m / (m + x), x, m * m / x)


@njit(cache=True)
def wald_draw(gen, m, lam):
    """Single inverse-Gaussian(mean m, shape lam) draw from the Generator ``gen``.

    ``m = inf`` gives the Levy limit.
    """
    z = gen.standard_normal()
    if not np.isfinite(m):
        return lam / (z * z)
    c = m * z * z / (2.0 * lam)
    x = m / (1.0 + c + math.sqrt(c * (c + 2.0)))
    if gen.random() <= m / (m + x):
        return x
    return m * m / x


@njit(cache=True)
def hit_draw(gen, a, mu, sigma, horizon):
    """numba twin of :func:`ig_sample` for one draw; inf means no hit."""
    if a <= 0.0:
        return 0.0
    lam = a * a / (sigma * sigma)
    if mu == 0.0:
        t = wald_draw(gen, np.inf, lam)
    elif mu > 0.0:
        t = wald_draw(gen, a / mu, lam)
    else:
        if gen.random() >= math.exp(2.0 * mu * a / (sigma * sigma)):
            return np.inf
        t = wald_draw(gen, a / -mu, lam)
    if t > horizon:
        return np.inf
    return t


@njit(cache=True)
def bridge_crossing_time(gen, gap_start, gap_end, diffusion, h):
    """First-passage time of a Brownian bridge given that it crosses.

    ``gap_start = theta - x(0) > 0`` and ``gap_end = theta - x(h)`` (may be
    negative).  With y = t/(h-t) the conditional law of y is inverse Gaussian
    with mean |gap_start/gap_end| and shape gap_start^2/(diffusion^2 h).
    """
    a = gap_start / diffusion
    b = abs(gap_end) / diffusion
    lam = a * a / h
    m = np.inf if b == 0.0 else a / b
    y = wald_draw(gen, m, lam)
    return h * y / (1.0 + y)

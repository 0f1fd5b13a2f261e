"""Membrane value at an intermediate time given the scheduled hitting time.

Between the anchor (t_last, v_last) and the hitting time, the membrane is a
free diffusion that stays below theta.  Its value at t_star is distributed as

    p(u) ~ q(u) * f(hit_time - t_star; u)

with q the transition density killed at theta and f the first-passage density
from u.  When no hit is scheduled within the horizon, f is replaced by the
survival probability up to the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .closed_form import NEVER
from .laws import fpt_density_many, fpt_survival_many, killed_transition_logpdf, sample_fpt
from .processes import GaussMarkovSpec

MIN_NORMALIZER = 1e-300


class DegenerateConditioningError(ArithmeticError):
    """The conditioning event has numerically zero probability."""


@dataclass(frozen=True, eq=False)
class ConditionedValueDensity:
    grid: np.ndarray
    weights: np.ndarray
    log_normalizer: float = 0.0

    def __post_init__(self):
        for arr in (self.grid, self.weights):
            arr.setflags(write=False)

    def mode(self) -> float:
        return float(self.grid[np.argmax(self.weights)])

    def mean(self) -> float:
        return float(trapezoid(self.grid * self.weights, self.grid))

    def cdf(self) -> np.ndarray:
        g, w = self.grid, self.weights
        c = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(g))])
        return c / c[-1]

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(1 if size is None else size)
        out = np.interp(u, self.cdf(), self.grid)
        return float(out[0]) if size is None else out


def conditioned_value_density(process: GaussMarkovSpec, v_last: float, t_last: float,
                              t_star: float, hit_time: float, theta: float,
                              v_grid_size: int = 512,
                              horizon_end: float | None = None) -> ConditionedValueDensity:
    """Law of V(t_star) given V(t_last) = v_last and the first hit at ``hit_time``.

    ``hit_time = NEVER`` means "no hit before ``horizon_end``" (absolute time).
    """
    if not t_last < t_star:
        raise ValueError(f"need t_last < t_star, got {t_last} and {t_star}")
    if not v_last < theta:
        raise ValueError(f"need v_last < theta, got {v_last} and {theta}")
    never = math.isinf(hit_time)
    if not never and not t_star < hit_time:
        raise ValueError(f"need t_star < hit_time, got {t_star} and {hit_time}")
    if never and horizon_end is None:
        raise ValueError("conditioning on no hit needs horizon_end")
    if v_grid_size < 8:
        raise ValueError("v_grid_size must be at least 8")

    m = float(process.mean(t_star, v_last, t_last))
    sd = math.sqrt(float(process.var(t_star, t_last)))

    def logw(u):
        lw = killed_transition_logpdf(process, u, t_star, v_last, t_last, theta)
        if never:
            lag = horizon_end - t_star
            with np.errstate(divide="ignore"):
                return lw + np.log(fpt_survival_many(process, u, t_star, lag, theta))
        with np.errstate(divide="ignore"):
            return lw + np.log(fpt_density_many(process, u, t_star, hit_time - t_star, theta))

    lo, hi = min(m, theta) - 8.0 * sd, theta
    for _ in range(6):
        step = (hi - lo) / v_grid_size
        grid = lo + step * (np.arange(v_grid_size) + 0.5)
        lw = logw(grid)
        top = np.max(lw)
        if not np.isfinite(top):
            raise DegenerateConditioningError(
                f"no admissible value of V({t_star:.6g}) between {lo:.6g} and {hi:.6g}")
        p = np.exp(lw - top)
        cum = np.cumsum(p) / p.sum()
        k_lo = int(np.searchsorted(cum, 1e-12))
        k_hi = int(np.searchsorted(cum, 1.0 - 1e-12))
        if k_hi - k_lo >= v_grid_size // 16:
            break
        # posterior is narrower than the grid: zoom in
        lo, hi = grid[max(k_lo - 2, 0)] - 0.5 * step, min(theta, grid[min(k_hi + 2, v_grid_size - 1)] + 0.5 * step)
    z = trapezoid(p, grid)
    log_z = top + math.log(z) if z > 0 else -math.inf
    if not log_z > math.log(MIN_NORMALIZER):
        raise DegenerateConditioningError(f"conditioning normalizer exp({log_z:.4g}) underflows")
    return ConditionedValueDensity(grid, p / z, log_z)


@dataclass(frozen=True)
class NextFpt:
    """Countdown after an excitatory jump and the post-jump start value."""

    time: float
    start: float


def excitatory_next_fpt(rng: np.random.Generator, process: GaussMarkovSpec, v_last: float,
                        t_last: float, t_star: float, hit_time: float, w: float, theta: float,
                        horizon: float, v_grid_size: int = 512) -> NextFpt:
    """Two-step draw: value at t_star from the Bayes posterior, then a fresh hit time.

    ``hit_time`` is absolute (or NEVER); ``horizon`` is measured from t_star.
    A jump landing on or above theta fires at once (time 0).
    """
    if not w > 0:
        raise ValueError(f"excitatory weight must be > 0, got {w}")
    u = posterior_value_draw(rng, process, v_last, t_last, t_star, hit_time, theta,
                             t_star + horizon, v_grid_size)
    start = u + w
    if start >= theta:
        return NextFpt(0.0, theta)
    return NextFpt(sample_fpt(rng, process, start, t_star, theta, horizon), start)


def posterior_value_draw(rng: np.random.Generator, process: GaussMarkovSpec, v_last: float,
                         t_last: float, t_star: float, hit_time: float, theta: float,
                         horizon_end: float, v_grid_size: int = 512) -> float:
    """One draw of V(t_star) given the anchor and the scheduled hit."""
    if hit_time == t_star:
        return theta
    if t_star <= t_last:
        return v_last
    cond = conditioned_value_density(process, v_last, t_last, t_star, hit_time, theta,
                                     v_grid_size, horizon_end=horizon_end)
    return cond.sample(rng)


__all__ = ["ConditionedValueDensity", "DegenerateConditioningError", "NextFpt",
           "conditioned_value_density", "excitatory_next_fpt", "posterior_value_draw", "NEVER"]

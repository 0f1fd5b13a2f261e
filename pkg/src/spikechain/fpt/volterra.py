"""Second-kind Volterra equation for Gauss-Markov first-passage densities.

For a process with Gaussian transition density f(x, t | y, s) and a constant
level theta, the first-passage density g from x0 at t0 satisfies

    g(t) = 2 Psi(t | x0, t0) - 2 int_{t0}^{t} g(s) Psi(t | theta, s) ds

where Psi(t | y, s) = d/dt P(V(t) > theta | V(s) = y) + k(t) f(theta, t | y, s).
The choice k(t) = -drift(theta, t) / 2 removes the diagonal singularity of the
kernel, which then vanishes at s = t; the trapezoid rule becomes explicit.
For Brownian motion with constant drift the kernel is identically zero and the
scheme returns the inverse-Gaussian density exactly at the nodes.
"""

from __future__ import annotations

import logging

import numpy as np

from .processes import GaussMarkovSpec
from .tables import FptTable

log = logging.getLogger(__name__)

BLOWUP = 1e6


class VolterraError(RuntimeError):
    """Raised when the discretised solution leaves its sane range."""


def volterra_fpt(process: GaussMarkovSpec, x0: float, theta: float, t_start: float = 0.0,
                 grid_step: float | None = None, horizon: float = 10.0) -> FptTable:
    if not x0 < theta:
        raise ValueError(f"start {x0} must lie below the threshold {theta}")
    if grid_step is None:
        grid_step = horizon / 4096
    if not grid_step > 0:
        raise ValueError("grid_step must be > 0")
    if horizon < grid_step:
        raise ValueError("horizon must be at least one grid step")
    n = max(1, int(round(horizon / grid_step)))
    grid = np.linspace(0.0, n * grid_step, n + 1)
    g = solve_many(process, np.array([x0]), theta, t_start, grid)[:, 0]
    return FptTable.from_density(grid, g)


def psi(process: GaussMarkovSpec, theta: float, t, y, s):
    """Regularised kernel Psi(t | y, s) for t > s (broadcasts)."""
    t = np.asarray(t, dtype=float)
    m = process.mean(t, y, s)
    v = process.var(t, s)
    dens = np.exp(-0.5 * (theta - m) ** 2 / v) / np.sqrt(2.0 * np.pi * v)
    m_rate = process.drift(m, t)
    k = -0.5 * process.drift(theta, t)
    bracket = -m_rate - (theta - m) * process.half_log_var_rate(t, s) - k
    return -dens * bracket


def solve_many(process: GaussMarkovSpec, x0s: np.ndarray, theta: float, t_start: float,
               grid: np.ndarray, blowup: float = BLOWUP) -> np.ndarray:
    """Densities for several starting points at once, shape (len(grid), len(x0s)).

    The kernel does not depend on the start, so all starts share one sweep.
    ``grid`` holds offsets from ``t_start`` and must begin at 0.  Starts very
    close to theta have genuine peaks of order gap**-2, so callers that use
    them may raise ``blowup``.
    """
    x0s = np.asarray(x0s, dtype=float)
    if np.any(x0s >= theta):
        raise ValueError("all starting points must lie below the threshold")
    grid = np.asarray(grid, dtype=float)
    abs_t = t_start + grid
    n = grid.size
    weights = np.empty(n)
    weights[1:-1] = 0.5 * (grid[2:] - grid[:-2])
    weights[0] = weights[-1] = 0.0
    homogeneous = process.input.is_constant_on(t_start, abs_t[-1]) and _is_uniform(grid)

    g = np.zeros((n, x0s.size))
    free = 2.0 * psi(process, theta, abs_t[1:, None], x0s[None, :], t_start)
    if homogeneous:
        # kernel depends on the lag only
        lags = grid[1:]
        kernel_by_lag = psi(process, theta, t_start + lags, theta, t_start)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n):
            if i > 1:
                if homogeneous:
                    row = kernel_by_lag[i - 2::-1]
                else:
                    row = psi(process, theta, abs_t[i], theta, abs_t[1:i])
                g[i] = free[i - 1] - 2.0 * (weights[1:i] * row) @ g[1:i]
            else:
                g[i] = free[i - 1]
            if not np.all(np.abs(g[i]) < blowup):
                raise VolterraError(
                    f"first-passage density diverged at t={abs_t[i]:.6g} "
                    f"(max |g|={np.nanmax(np.abs(g[i])):.3g}, step={grid[i] - grid[i - 1]:.3g})")
    return np.clip(g, 0.0, None)


def _is_uniform(grid: np.ndarray) -> bool:
    d = np.diff(grid)
    return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))

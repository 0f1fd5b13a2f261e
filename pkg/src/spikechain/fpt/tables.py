"""Tabulated first-passage laws and inverse-CDF sampling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .closed_form import NEVER


@dataclass(frozen=True, eq=False)
class FptTable:
    """First-passage density on a time grid measured from the start time.

    ``hit_mass`` is the probability of hitting within the grid; the rest of
    the mass is "never within horizon".
    """

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    hit_mass: float

    @classmethod
    def from_density(cls, grid, density) -> "FptTable":
        grid = np.asarray(grid, dtype=float)
        density = np.clip(np.asarray(density, dtype=float), 0.0, None)
        if grid.ndim != 1 or grid.shape != density.shape or grid.size < 2:
            raise ValueError("grid and density must be 1-d arrays of equal length >= 2")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must start at 0 and be strictly increasing")
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(grid))])
        mass = float(cdf[-1])
        if mass > 1.0:
            # quadrature overshoot; the law cannot carry more than unit mass
            density = density / mass
            cdf = cdf / mass
            mass = 1.0
        for arr in (grid, density, cdf):
            arr.setflags(write=False)
        return cls(grid, density, cdf, mass)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "density", "cdf"])
            for row in zip(self.grid, self.density, self.cdf):
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "FptTable":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls.from_density(data[:, 0], data[:, 1])


def table_sample(rng: np.random.Generator, table: FptTable, size=None):
    """Inverse-CDF draw with linear interpolation of the tabulated CDF."""
    n = 1 if size is None else int(np.prod(size))
    u = rng.random(n)
    out = _invert(table, u)
    if size is None:
        return float(out[0])
    return out.reshape(size)


def _invert(table: FptTable, u):
    cdf = table.cdf
    k = np.searchsorted(cdf, u, side="right")
    k = np.clip(k, 1, cdf.size - 1)
    lo, hi = cdf[k - 1], cdf[k]
    width = hi - lo
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(width > 0, (u - lo) / width, 0.0)
    t = table.grid[k - 1] + frac * (table.grid[k] - table.grid[k - 1])
    return np.where(u < table.hit_mass, t, NEVER)


def survival_at(table: FptTable, s) -> np.ndarray:
    return 1.0 - np.interp(s, table.grid, table.cdf, right=table.hit_mass)


def refined_grid(horizon: float, n_uniform: int = 2048, n_fine: int = 160,
                 finest: float | None = None) -> np.ndarray:
    """Uniform grid on [0, horizon] plus geometric refinement near 0.

    Starting points close to the barrier put most of their hitting mass at
    tiny times; the geometric part resolves that.
    """
    uniform = np.linspace(0.0, horizon, n_uniform + 1)
    knee = uniform[1]
    finest = knee * 1e-5 if finest is None else finest
    if finest >= knee:
        return uniform
    fine = np.geomspace(finest, knee, n_fine, endpoint=False)
    return np.unique(np.concatenate([uniform, fine]))


def clamp_never(t: float, horizon: float) -> float:
    return NEVER if (math.isinf(t) or t > horizon) else t

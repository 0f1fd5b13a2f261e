"""Gauss-Markov membrane processes and piecewise-constant input currents."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ProcessKind(str, Enum):
    BROWNIAN = "Brownian"
    ORNSTEIN_UHLENBECK = "OrnsteinUhlenbeck"


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function of absolute time.

    ``values[0]`` holds before ``times[0]``; ``values[k]`` holds on
    ``[times[k-1], times[k])``.  A constant is ``PiecewiseConstant((), (c,))``.
    """

    times: tuple[float, ...] = ()
    values: tuple[float, ...] = (0.0,)
    _jumps: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(values) != len(times) + 1:
            raise ValueError("need exactly one more value than breakpoint")
        if any(not math.isfinite(t) for t in times) or any(not math.isfinite(v) for v in values):
            raise ValueError("breakpoints and values must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_jumps", np.diff(np.asarray(values)))

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls((), (float(value),))

    @property
    def is_constant(self) -> bool:
        return not self.times

    def __call__(self, t):
        idx = np.searchsorted(self.times, t, side="right")
        out = np.asarray(self.values)[idx]
        return float(out) if np.ndim(out) == 0 else out

    def is_constant_on(self, a: float, b: float) -> bool:
        """True when no breakpoint lies in the open interval (a, b)."""
        return not any(a < t < b for t in self.times)

    def integral(self, s, t):
        """Integral of the input over [s, t] (broadcasts)."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        out = self.values[0] * (t - s)
        for tk, dk in zip(self.times, self._jumps):
            out = out + dk * (np.maximum(t - tk, 0.0) - np.maximum(s - tk, 0.0))
        return out

    def exp_integral(self, s, t, tau: float):
        """Integral of exp(-(t-u)/tau) * input(u) du over [s, t] (broadcasts)."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        out = self.values[0] * tau * -np.expm1(-(t - s) / tau)
        for tk, dk in zip(self.times, self._jumps):
            lo = np.maximum(s, tk)
            out = out + np.where(t > lo, dk * tau * -np.expm1(-(t - lo) / tau), 0.0)
        return out

    def to_doc(self):
        if self.is_constant:
            return self.values[0]
        return {"times": list(self.times), "values": list(self.values)}

    @classmethod
    def from_doc(cls, doc) -> "PiecewiseConstant":
        if isinstance(doc, (int, float)) and not isinstance(doc, bool):
            return cls.constant(doc)
        if isinstance(doc, dict) and set(doc) == {"times", "values"}:
            return cls(tuple(doc["times"]), tuple(doc["values"]))
        raise ValueError("input must be a number or a table with 'times' and 'values'")


@dataclass(frozen=True)
class DriftedBmFptParams:
    """Hitting time of level ``a`` above the start by ``mu*t + sigma*W_t``."""

    a: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"barrier distance a must be > 0, got {self.a}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")

    @property
    def hit_probability(self) -> float:
        if self.mu >= 0:
            return 1.0
        return math.exp(2.0 * self.mu * self.a / self.sigma**2)


@dataclass(frozen=True)
class GaussMarkovSpec:
    """Free (between-spike) membrane dynamics.

    Brownian:           dV = I(t) dt + sigma dW
    OrnsteinUhlenbeck:  tau dV = (rest_mu - V + I(t)) dt + sigma dW
    """

    kind: ProcessKind
    sigma: float
    input: PiecewiseConstant = PiecewiseConstant()
    tau: float | None = None
    rest_mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        if isinstance(self.input, (int, float)):
            object.__setattr__(self, "input", PiecewiseConstant.constant(self.input))
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.kind is ProcessKind.ORNSTEIN_UHLENBECK and not (self.tau is not None and self.tau > 0):
            raise ValueError("tau must be > 0 for an Ornstein-Uhlenbeck process")

    @property
    def is_ou(self) -> bool:
        return self.kind is ProcessKind.ORNSTEIN_UHLENBECK

    @property
    def diffusion(self) -> float:
        """Instantaneous standard deviation rate of V."""
        return self.sigma / self.tau if self.is_ou else self.sigma

    def drift(self, x, t):
        if self.is_ou:
            return (self.rest_mu + self.input(t) - x) / self.tau
        return self.input(t) + 0.0 * np.asarray(x)

    def mean(self, t, y, s):
        """E[V(t) | V(s) = y]."""
        if self.is_ou:
            tau = self.tau
            decay = np.exp(-(np.asarray(t) - s) / tau)
            forced = self.rest_mu * -np.expm1(-(np.asarray(t) - s) / tau) + self.input.exp_integral(s, t, tau) / tau
            return y * decay + forced
        return y + self.input.integral(s, t)

    def var(self, t, s):
        dt = np.asarray(t, dtype=float) - s
        if self.is_ou:
            return self.sigma**2 / (2.0 * self.tau) * -np.expm1(-2.0 * dt / self.tau)
        return self.sigma**2 * dt

    def half_log_var_rate(self, t, s):
        """d/dt log Var[V(t) | V(s)] / 2."""
        dt = np.asarray(t, dtype=float) - s
        if self.is_ou:
            return 1.0 / (self.tau * np.expm1(2.0 * dt / self.tau))
        return 0.5 / dt

    def constant_drift_on(self, a: float, b: float) -> float | None:
        """Input level when the input is constant on (a, b), else None."""
        if self.input.is_constant_on(a, b):
            return float(self.input(a))
        return None

    def transition_logpdf(self, u, t, y, s):
        m = self.mean(t, y, s)
        v = self.var(t, s)
        return -0.5 * (np.asarray(u) - m) ** 2 / v - 0.5 * np.log(2.0 * np.pi * v)


def brownian(sigma: float, drift: float | PiecewiseConstant = 0.0) -> GaussMarkovSpec:
    return GaussMarkovSpec(ProcessKind.BROWNIAN, sigma, _as_input(drift))


def ornstein_uhlenbeck(tau: float, sigma: float, drift: float | PiecewiseConstant = 0.0,
                       rest_mu: float = 0.0) -> GaussMarkovSpec:
    return GaussMarkovSpec(ProcessKind.ORNSTEIN_UHLENBECK, sigma, _as_input(drift), tau, rest_mu)


def _as_input(x) -> PiecewiseConstant:
    return x if isinstance(x, PiecewiseConstant) else PiecewiseConstant.constant(x)

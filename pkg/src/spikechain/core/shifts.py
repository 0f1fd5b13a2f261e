"""Where a delivered spike leaves the membrane at the previously scheduled hit.

An inhibitory spike arriving X* before the scheduled hit lowers the membrane
at that hit time by a deterministic amount.  The extra wait is then the
first-passage time from the lowered state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from ..models import NeuronModel, NeuronSpec

#: Below this |alpha| the equal-time-constant limit is used.
ALPHA_EPS = 1e-12


@dataclass(frozen=True)
class PostDeliveryLaw:
    """Start of the extra wait, located at the old scheduled hit time."""

    v_start: float
    i_start: float | None = None

    def barrier_distance(self, theta: float) -> float:
        return theta - self.v_start


def interaction_shift(neuron: NeuronSpec, w_eff: float, x_star: float,
                      i_s_star: float = 0.0) -> PostDeliveryLaw:
    if not w_eff < 0:
        raise ValueError(f"interaction_shift handles inhibition only, got w={w_eff}")
    if not math.isfinite(x_star) or x_star < 0:
        raise ValueError(f"x_star must be finite and >= 0, got {x_star}")
    theta = neuron.theta
    model = neuron.model
    if model is NeuronModel.PIF_INSTANT:
        return PostDeliveryLaw(theta + w_eff)
    if model is NeuronModel.LIF_INSTANT:
        return PostDeliveryLaw(theta + w_eff * math.exp(-x_star / neuron.tau))
    decay = math.exp(-x_star / neuron.tau_s)
    if model is NeuronModel.PIF_EXP_SYNAPSE:
        return PostDeliveryLaw(theta + w_eff * neuron.tau_s * -math.expm1(-x_star / neuron.tau_s),
                               i_s_star + w_eff * decay)
    return PostDeliveryLaw(theta + lif_exp_synapse_shift(w_eff, x_star, neuron.tau, neuron.tau_s),
                           i_s_star + w_eff * decay)


def lif_exp_synapse_shift(w: float, x: float, tau: float, tau_s: float) -> float:
    """Voltage change after x from a current jump w through an exponential synapse."""
    alpha = 1.0 / tau_s - 1.0 / tau
    return lif_exp_synapse_shift_alpha(w, x, tau, alpha)


def lif_exp_synapse_shift_alpha(w: float, x: float, tau: float, alpha: float) -> float:
    if abs(alpha) < ALPHA_EPS:
        return w / tau * math.exp(-x / tau) * x
    return w / tau * math.exp(-x / tau) * -math.expm1(-alpha * x) / alpha


@dataclass(frozen=True)
class ExpKernel:
    """alpha(s) = exp(-s / tau_s)."""

    tau_s: float

    def __call__(self, s):
        return np.exp(-np.asarray(s, dtype=float) / self.tau_s)


@dataclass(frozen=True)
class TabulatedKernel:
    """Current kernel given on a grid, linear in between and zero beyond."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or len(self.times) < 2:
            raise ValueError("need matching times and values, at least two points")
        if self.times[0] != 0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must start at 0 and increase")

    def __call__(self, s):
        return np.interp(s, self.times, self.values, right=0.0)


def psp_voltage_shift(w: float, x: float, kernel, tau: float | None = None, n: int = 4097) -> float:
    """Voltage change after x caused by a current w * kernel(s).

    Leaky membrane (tau given): (w/tau) e^{-x/tau} int_0^x kernel(s) e^{s/tau} ds.
    Perfect integrator: w int_0^x kernel(s) ds.
    """
    if x <= 0:
        return 0.0
    if isinstance(kernel, ExpKernel):
        if tau is None:
            return w * kernel.tau_s * -math.expm1(-x / kernel.tau_s)
        return lif_exp_synapse_shift(w, x, tau, kernel.tau_s)
    s = np.linspace(0.0, x, n)
    if isinstance(kernel, TabulatedKernel):
        s = np.union1d(s, [t for t in kernel.times if t < x])
    vals = kernel(s)
    if tau is None:
        return float(w * trapezoid(vals, s))
    return float(w / tau * trapezoid(vals * np.exp((s - x) / tau), s))

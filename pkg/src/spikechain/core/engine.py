"""Event loop of the countdown chain.

Each neuron carries its next scheduled firing time.  Between events nothing
is simulated: a spike either resets its emitter (fresh hitting time from the
reset value after the refractory period) or, once delivered, redraws the
receiver's schedule from the law of the perturbed membrane.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..fpt import (NEVER, DegenerateConditioningError, ou_current_step, posterior_value_draw,
                   sample_dip_fpt, sample_fpt)
from ..models import NetworkSpec, history_depth
from .shifts import interaction_shift
from .state import AvalancheDetected, CountdownState, Event, SimulationQuiescent, SpikeTrain

log = logging.getLogger(__name__)

#: Fire events allowed at one instant, per neuron, before declaring an avalanche.
AVALANCHE_FACTOR = 10


@dataclass(frozen=True)
class CoreOptions:
    dip_dt: float = 1e-3
    v_grid_size: int = 512


class _Net:
    """Per-spec lookups used by the loop."""

    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        self.n = spec.n
        self.end = spec.horizon
        nr = spec.neurons
        self.theta = [n.theta for n in nr]
        self.v_reset = [n.v_reset for n in nr]
        self.R = [n.refractory_R for n in nr]
        self.kappa = [n.kappa for n in nr]
        self.exp = [n.model.exp_synapse for n in nr]
        self.process = [None if n.model.exp_synapse else n.process() for n in nr]
        self.dip = [n.dip_model() if n.model.exp_synapse else None for n in nr]
        self.excitable = spec.excitable()
        self.out = [[] for _ in nr]
        for k, s in enumerate(spec.synapses):
            self.out[s.pre].append((s.delay, s.post, k))
        self.depth = history_depth(spec)
        fills = [-nr[s.pre].refractory_R - s.delay for s in spec.synapses]
        self.h_fill = min(fills) if fills else -max(self.R)


@lru_cache(maxsize=32)
def _net(spec: NetworkSpec) -> _Net:
    return _Net(spec)


def init_state(spec: NetworkSpec, v0=None, rng: np.random.Generator | None = None, is0=None,
               options: CoreOptions = CoreOptions()) -> CountdownState:
    net = _net(spec)
    rng = np.random.default_rng() if rng is None else rng
    v0 = [n.start_voltage for n in spec.neurons] if v0 is None else [float(v) for v in v0]
    is0 = [n.is0 for n in spec.neurons] if is0 is None else [float(v) for v in is0]
    if len(v0) != net.n or len(is0) != net.n:
        raise ValueError(f"need one initial value per neuron ({net.n})")
    due = np.empty(net.n)
    i_s = np.zeros(net.n)
    paths = {}
    for i in range(net.n):
        if not v0[i] < net.theta[i]:
            raise ValueError(f"neuron {i}: initial voltage {v0[i]} is not below theta {net.theta[i]}")
        if net.exp[i]:
            hit = sample_dip_fpt(rng, net.dip[i], v0[i], is0[i], net.theta[i], 0.0, net.end,
                                 options.dip_dt, keep_path=net.excitable[i])
            due[i], i_s[i] = hit.time, hit.i_s
            if hit.path is not None:
                paths[i] = hit.path
        else:
            due[i] = sample_fpt(rng, net.process[i], v0[i], 0.0, net.theta[i], net.end)
    return CountdownState(due=due, T=0.0, i_s=i_s, last_spike=np.full(net.n, -np.inf),
                          H=np.full((net.n, net.depth), net.h_fill), anchor_t=np.zeros(net.n),
                          anchor_v=np.array(v0, dtype=float), pending=[], paths=paths)


def next_event(state: CountdownState, spec: NetworkSpec) -> Event:
    """Earliest event; deliveries win ties with firings."""
    i = int(np.argmin(state.due))
    t_fire = state.due[i]
    if state.pending:
        at, pre, post, emission, syn = state.pending[0]
        if at <= t_fire:
            return Event(at, "delivery", pre, post, emission, syn)
    if math.isinf(t_fire):
        raise SimulationQuiescent()
    return Event.fire(float(t_fire), i)


def fire(state: CountdownState, i: int, spec: NetworkSpec, rng: np.random.Generator,
         options: CoreOptions = CoreOptions()) -> tuple[float, int]:
    net = _net(spec)
    T = float(state.due[i])
    state.T = T
    state.H[i, :-1] = state.H[i, 1:]
    state.H[i, -1] = T
    state.last_spike[i] = T
    t0 = T + net.R[i]
    if net.exp[i]:
        dip = net.dip[i]
        i_free = ou_current_step(rng, state.i_s[i], net.R[i], dip.tau_s, dip.sigma)
        hit = sample_dip_fpt(rng, dip, net.v_reset[i], i_free, net.theta[i], t0, net.end - t0,
                             options.dip_dt, keep_path=net.excitable[i])
        state.due[i] = t0 + hit.time
        state.i_s[i] = hit.i_s
        if net.excitable[i]:
            state.paths[i] = hit.path
    else:
        state.due[i] = t0 + sample_fpt(rng, net.process[i], net.v_reset[i], t0, net.theta[i],
                                       net.end - t0)
    state.anchor_t[i] = t0
    state.anchor_v[i] = net.v_reset[i]
    for delay, post, k in net.out[i]:
        heapq.heappush(state.pending, (T + delay, i, post, T, k))
    return T, i


def deliver_spike(state: CountdownState, event: Event, spec: NetworkSpec,
                  rng: np.random.Generator, options: CoreOptions = CoreOptions()) -> None:
    net = _net(spec)
    entry = (event.at, event.pre, event.post, event.emission, event.synapse)
    if state.pending and state.pending[0] == entry:
        heapq.heappop(state.pending)
    else:
        state.pending.remove(entry)
        heapq.heapify(state.pending)
    at, j = event.at, event.post
    state.T = at
    w = spec.synapses[event.synapse].weight
    w_eff = w * net.kappa[j](at - state.last_spike[j], net.R[j])
    if w_eff == 0.0:
        return
    theta = net.theta[j]
    due = float(state.due[j])
    if net.exp[j]:
        _deliver_filtered(state, net, j, at, due, w_eff, rng, options)
    elif net.excitable[j]:
        proc = net.process[j]
        try:
            u = posterior_value_draw(rng, proc, state.anchor_v[j], state.anchor_t[j], at, due,
                                     theta, net.end, options.v_grid_size)
        except DegenerateConditioningError as e:
            u = _fallback_value(proc, state.anchor_v[j], state.anchor_t[j], at, due, theta)
            log.warning("neuron %d at t=%.6g: %s; using %.6g", j, at, e, u)
        start = u + w_eff
        if start >= theta:
            state.due[j] = at
            start = theta
        else:
            state.due[j] = at + sample_fpt(rng, proc, start, at, theta, net.end - at)
        state.anchor_t[j] = at
        state.anchor_v[j] = start
    elif math.isfinite(due):
        law = interaction_shift(spec.neurons[j], w_eff, due - at)
        state.due[j] = due + sample_fpt(rng, net.process[j], law.v_start, due, theta,
                                        net.end - due)


def _deliver_filtered(state, net, j, at, due, w_eff, rng, options):
    dip = net.dip[j]
    theta = net.theta[j]
    if net.excitable[j]:
        times, v, cur = state.paths[j]
        v_at = float(np.interp(at, times, v))
        i_at = float(np.interp(at, times, cur))
        hit = sample_dip_fpt(rng, dip, v_at, i_at + w_eff, theta, at, net.end - at,
                             options.dip_dt, keep_path=True)
        state.due[j] = at + hit.time
        state.i_s[j] = hit.i_s
        state.paths[j] = hit.path
        return
    if math.isinf(due):
        return
    law = interaction_shift(net.spec.neurons[j], w_eff, due - at, state.i_s[j])
    hit = sample_dip_fpt(rng, dip, law.v_start, law.i_start, theta, due, net.end - due,
                         options.dip_dt)
    state.due[j] = due + hit.time
    state.i_s[j] = hit.i_s


def _fallback_value(proc, v_a, t_a, at, due, theta):
    if math.isfinite(due):
        return v_a + (theta - v_a) * (at - t_a) / (due - t_a)
    return min(float(proc.mean(at, v_a, t_a)), math.nextafter(theta, -math.inf))


def advance(state: CountdownState, spec: NetworkSpec, rng: np.random.Generator,
            until: float, train: SpikeTrain, options: CoreOptions = CoreOptions()) -> None:
    """Process every event with time <= ``until``."""
    limit = AVALANCHE_FACTOR * spec.n
    same_time, count = math.nan, 0
    while True:
        try:
            ev = next_event(state, spec)
        except SimulationQuiescent:
            break
        if ev.at > until:
            break
        if ev.kind == "delivery":
            deliver_spike(state, ev, spec, rng, options)
            continue
        if ev.at == same_time:
            count += 1
            if count > limit:
                raise AvalancheDetected(ev.at, count)
        else:
            same_time, count = ev.at, 1
        train.append(*fire(state, ev.neuron, spec, rng, options))


def run(spec: NetworkSpec, v0=None, rng: np.random.Generator | None = None,
        horizon: float | None = None, options: CoreOptions = CoreOptions(),
        is0=None) -> SpikeTrain:
    if horizon is not None:
        spec = spec.with_horizon(horizon)
    rng = np.random.default_rng() if rng is None else rng
    state = init_state(spec, v0, rng, is0, options)
    train = SpikeTrain()
    advance(state, spec, rng, spec.horizon, train, options)
    return train


__all__ = ["AVALANCHE_FACTOR", "CoreOptions", "NEVER", "advance", "deliver_spike", "fire",
           "init_state", "next_event", "run"]

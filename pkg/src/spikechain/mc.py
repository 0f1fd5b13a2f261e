"""Time-stepped Monte-Carlo reference for whole networks.

Euler-Maruyama on every membrane (and synaptic current), spikes detected at
grid points.  ``EulerGobet`` additionally tests for a crossing between grid
points with the Brownian-bridge maximum law, draws the crossing time from the
bridge's hitting law, and integrates what is left of the step after the reset.
Within a step, crossings and arrivals are handled in time order; a jump from
an arriving spike is applied to the end-of-step value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .core.ensemble import SpikeEnsemble
from .fpt.closed_form import bridge_crossing_time
from .models import KappaForm, NetworkSpec, NeuronModel

CHUNK = 2048
_MC_TAG = 0x3C


class Scheme(str, Enum):
    EULER = "Euler"
    EULER_GOBET = "EulerGobet"


@dataclass(frozen=True)
class McConfig:
    dt: float
    n_paths: int
    scheme: Scheme = Scheme.EULER_GOBET
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")


def gobet_crossing(rng: np.random.Generator, v_lo: float, v_hi: float, theta: float,
                   sigma: float, dt: float) -> bool:
    """Did the Brownian bridge between the two grid values reach theta?"""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if max(v_lo, v_hi) >= theta:
        return True
    return bool(rng.random() < math.exp(-2.0 * (theta - v_lo) * (theta - v_hi) / (sigma * sigma * dt)))


_MODEL_CODE = {NeuronModel.PIF_INSTANT: 0, NeuronModel.LIF_INSTANT: 1,
               NeuronModel.PIF_EXP_SYNAPSE: 2, NeuronModel.LIF_EXP_SYNAPSE: 3}


def _arrays(spec: NetworkSpec, v0, is0):
    nr = spec.neurons
    inp_ptr = np.zeros(spec.n + 1, dtype=np.int64)
    inp_t, inp_v = [], []
    for k, n in enumerate(nr):
        inp_t.extend(n.input.times)
        inp_t.append(np.inf)
        inp_v.extend(n.input.values)
        inp_ptr[k + 1] = len(inp_v)
    order = sorted(range(len(spec.synapses)), key=lambda k: (spec.synapses[k].pre, spec.synapses[k].post))
    ptr = np.zeros(spec.n + 1, dtype=np.int64)
    for s in spec.synapses:
        ptr[s.pre + 1] += 1
    v0 = np.array([n.start_voltage for n in nr] if v0 is None else v0, dtype=float)
    is0 = np.array([n.is0 for n in nr] if is0 is None else is0, dtype=float)
    if np.any(v0 >= np.array([n.theta for n in nr])):
        raise ValueError("initial voltages must lie below the thresholds")
    return (
        np.array([_MODEL_CODE[n.model] for n in nr], dtype=np.int64),
        np.array([n.theta for n in nr]), np.array([n.v_reset for n in nr]),
        np.array([n.sigma for n in nr]), np.array([n.tau or 1.0 for n in nr]),
        np.array([n.tau_s or 1.0 for n in nr]), np.array([n.rest_mu for n in nr]),
        inp_ptr, np.array(inp_t, dtype=float), np.array(inp_v, dtype=float),
        np.array([n.refractory_R for n in nr]),
        np.array([0 if n.kappa.form is KappaForm.STEP else 1 for n in nr], dtype=np.int64),
        np.array([n.kappa.tau_kappa or 1.0 for n in nr]),
        np.cumsum(ptr), np.array([spec.synapses[k].post for k in order], dtype=np.int64),
        np.array([spec.synapses[k].weight for k in order]),
        np.array([spec.synapses[k].delay for k in order]),
        v0, is0,
    )


@njit(cache=True)
def _kappa(elapsed, R, form, tau):
    if not elapsed > R:
        return 0.0
    if form == 0:
        return 1.0
    return -math.expm1(-(elapsed - R) / tau)


@njit(cache=True)
def _drive(k, t, inp_ptr, inp_t, inp_v):
    lo = inp_ptr[k]
    j = 0
    while t >= inp_t[lo + j]:
        j += 1
    return inp_v[lo + j]


@njit(cache=True)
def _free_step(gen, model, v, cur, h, drive, sigma, tau, tau_s, rest_mu):
    """Euler-Maruyama step of length h; returns (v, i_s, bridge diffusion)."""
    if model == 0:
        return v + drive * h + sigma * math.sqrt(h) * gen.standard_normal(), cur, sigma
    if model == 1:
        return (v + h / tau * (rest_mu + drive - v)
                + sigma / tau * math.sqrt(h) * gen.standard_normal(), cur, sigma / tau)
    if model == 2:
        v_new = v + (drive + cur) * h
    else:
        v_new = v + h / tau * (rest_mu + drive + cur - v)
    cur_new = cur - cur / tau_s * h + sigma / tau_s * math.sqrt(h) * gen.standard_normal()
    return v_new, cur_new, 0.0


@njit(cache=True)
def _batch(gen, n_runs, first_run, end, dt, gobet, model, theta, v_reset, sigma, tau, tau_s,
           rest_mu, inp_ptr, inp_t, inp_v, R, kform, ktau, ptr, post, weight, delay, v0, is0,
           first_only):
    n = theta.size
    n_steps = int(math.ceil(end / dt - 1e-9))
    cap = max(16, n_runs * n * 4)
    o_run = np.empty(cap, dtype=np.int64)
    o_t = np.empty(cap)
    o_id = np.empty(cap, dtype=np.int64)
    count = 0
    v = np.empty(n)
    cur = np.empty(n)
    free_from = np.empty(n)
    last = np.empty(n)
    cand = np.empty(n)
    pmax = 64 + 16 * post.size
    p_t = np.empty(pmax)
    p_post = np.empty(pmax, dtype=np.int64)
    p_w = np.empty(pmax)
    for r in range(n_runs):
        for i in range(n):
            v[i] = v0[i]
            cur[i] = is0[i]
            free_from[i] = 0.0
            last[i] = -np.inf
        n_p = 0
        done = False
        for k in range(n_steps):
            if done:
                break
            t0 = k * dt
            t1 = min((k + 1) * dt, end)
            # free evolution and crossing candidates
            for i in range(n):
                cand[i] = np.inf
                s0 = max(t0, free_from[i])
                if model[i] >= 2 and s0 > t0:
                    # refractory: the current keeps evolving, V stays at reset
                    hr = min(s0, t1) - t0
                    cur[i] += -cur[i] / tau_s[i] * hr + sigma[i] / tau_s[i] * math.sqrt(hr) * gen.standard_normal()
                if s0 >= t1:
                    continue
                if v[i] >= theta[i]:
                    cand[i] = s0
                    continue
                h = t1 - s0
                dr = _drive(i, s0, inp_ptr, inp_t, inp_v)
                vn, cn, d = _free_step(gen, model[i], v[i], cur[i], h, dr, sigma[i], tau[i], tau_s[i],
                                       rest_mu[i])
                if vn >= theta[i]:
                    if not gobet:
                        cand[i] = t1
                    elif d > 0.0:
                        cand[i] = s0 + bridge_crossing_time(gen, theta[i] - v[i], theta[i] - vn, d, h)
                    else:
                        cand[i] = s0 + h * (theta[i] - v[i]) / (vn - v[i])
                elif gobet and d > 0.0:
                    a = theta[i] - v[i]
                    b = theta[i] - vn
                    if gen.random() < math.exp(-2.0 * a * b / (d * d * h)):
                        cand[i] = s0 + bridge_crossing_time(gen, a, b, d, h)
                v[i] = vn
                cur[i] = cn
            # spikes and arrivals inside the step, in time order
            fires = 0
            while True:
                fi = -1
                ft = np.inf
                for i in range(n):
                    if cand[i] < ft:
                        ft = cand[i]
                        fi = i
                pq = -1
                pt = np.inf
                for q in range(n_p):
                    if p_t[q] <= t1 and p_t[q] < pt:
                        pt = p_t[q]
                        pq = q
                if pq >= 0 and pt <= ft:
                    j = p_post[pq]
                    w = p_w[pq] * _kappa(pt - last[j], R[j], kform[j], ktau[j])
                    n_p -= 1
                    p_t[pq] = p_t[n_p]
                    p_post[pq] = p_post[n_p]
                    p_w[pq] = p_w[n_p]
                    if w == 0.0:
                        continue
                    if model[j] >= 2:
                        cur[j] += w
                        continue
                    # the jump is applied to the end-of-step value
                    v[j] += w
                    if v[j] >= theta[j]:
                        if cand[j] > pt:
                            cand[j] = pt if gobet else t1
                    elif cand[j] > pt:
                        cand[j] = np.inf
                    continue
                if fi < 0:
                    break
                fires += 1
                if fires > 10 * n:
                    break
                i = fi
                cand[i] = np.inf
                if count == cap:
                    cap *= 2
                    a1 = np.empty(cap, dtype=np.int64)
                    a2 = np.empty(cap)
                    a3 = np.empty(cap, dtype=np.int64)
                    a1[:count] = o_run[:count]
                    a2[:count] = o_t[:count]
                    a3[:count] = o_id[:count]
                    o_run, o_t, o_id = a1, a2, a3
                o_run[count] = first_run + r
                o_t[count] = ft
                o_id[count] = i
                count += 1
                if first_only:
                    done = True
                    break
                last[i] = ft
                free_from[i] = ft + R[i]
                v[i] = v_reset[i]
                if gobet and free_from[i] < t1:
                    # the rest of the step after the reset
                    dr = _drive(i, free_from[i], inp_ptr, inp_t, inp_v)
                    vn, cn, d = _free_step(gen, model[i], v[i], cur[i], t1 - free_from[i], dr, sigma[i],
                                           tau[i], tau_s[i], rest_mu[i])
                    v[i] = vn
                    cur[i] = cn
                for q in range(ptr[i], ptr[i + 1]):
                    if n_p < pmax:
                        p_t[n_p] = ft + delay[q]
                        p_post[n_p] = post[q]
                        p_w[n_p] = weight[q]
                        n_p += 1
    return o_run[:count], o_t[:count], o_id[:count]


def euler_run(spec: NetworkSpec, v0=None, cfg: McConfig | None = None, is0=None,
              first_spike_only: bool = False) -> SpikeEnsemble:
    """Ensemble of time-stepped realizations over [0, spec.horizon].

    With ``first_spike_only`` each run stops at the first spike of the
    network, which makes single-neuron first-passage estimates cheap.
    """
    if cfg is None:
        raise ValueError("an McConfig is required")
    if cfg.dt > spec.horizon:
        raise ValueError("dt must not exceed the horizon")
    args = _arrays(spec, v0, is0)
    gobet = cfg.scheme is Scheme.EULER_GOBET
    parts = []
    for c, first in enumerate(range(0, cfg.n_paths, CHUNK)):
        size = min(CHUNK, cfg.n_paths - first)
        gen = np.random.default_rng(np.random.SeedSequence([cfg.seed, _MC_TAG, c]))
        parts.append(_batch(gen, size, first, spec.horizon, cfg.dt, gobet, *args,
                            first_spike_only))
    return SpikeEnsemble(cfg.n_paths, spec.n, np.concatenate([p[0] for p in parts]),
                         np.concatenate([p[1] for p in parts]), np.concatenate([p[2] for p in parts]))


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    probs: np.ndarray   # (n_neurons, n_bins), each row sums to 1 (or 0 if no spikes)
    counts: np.ndarray

    def to_csv(self) -> str:
        lines = ["bin_start,bin_end," + ",".join(f"neuron_{i}" for i in range(self.probs.shape[0]))]
        for b in range(self.edges.size - 1):
            cells = [repr(float(self.edges[b])), repr(float(self.edges[b + 1]))]
            cells += [repr(float(p)) for p in self.probs[:, b]]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def modes(self, neuron: int, min_prominence: float = 0.0):
        """Bin centres of local maxima of one neuron's histogram."""
        p = self.probs[neuron]
        centres = 0.5 * (self.edges[1:] + self.edges[:-1])
        out = []
        for k in range(1, p.size - 1):
            if p[k] > p[k - 1] and p[k] >= p[k + 1] and p[k] > min_prominence:
                out.append(float(centres[k]))
        return out


def histogram(ensemble: SpikeEnsemble, bin_width: float, window=None) -> Histogram:
    """Per-neuron spike-time histograms, normalized to probability per bin."""
    if not bin_width > 0:
        raise ValueError("bin_width must be > 0")
    if ensemble.n_runs == 0 or ensemble.time.size == 0:
        raise ValueError("empty ensemble")
    lo, hi = (0.0, float(ensemble.time.max())) if window is None else window
    n_bins = max(1, int(math.ceil((hi - lo) / bin_width - 1e-9)))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts = np.zeros((ensemble.n_neurons, n_bins))
    for i in range(ensemble.n_neurons):
        t = ensemble.spike_times(i, (lo, edges[-1]))
        counts[i], _ = np.histogram(t, bins=edges)
    tot = counts.sum(axis=1, keepdims=True)
    probs = np.divide(counts, tot, out=np.zeros_like(counts), where=tot > 0)
    return Histogram(edges, probs, counts)

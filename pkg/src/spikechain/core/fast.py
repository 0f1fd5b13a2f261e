"""Compiled event loop for perfect integrators with constant input and
instantaneous inhibition.

Same algorithm and tie-break rules as :mod:`.engine`; only the random stream
differs (one Generator per chunk of runs).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..fpt.closed_form import hit_draw
from ..models import KappaForm, NetworkSpec, NeuronModel


def eligible(spec: NetworkSpec) -> bool:
    return (all(n.model is NeuronModel.PIF_INSTANT and n.input.is_constant for n in spec.neurons)
            and all(s.delay == 0 and s.weight < 0 for s in spec.synapses))


def compile_spec(spec: NetworkSpec) -> dict:
    if not eligible(spec):
        raise ValueError("network is not eligible for the compiled loop")
    n = spec.n
    nr = spec.neurons
    order = sorted(range(len(spec.synapses)), key=lambda k: (spec.synapses[k].pre, spec.synapses[k].post))
    ptr = np.zeros(n + 1, dtype=np.int64)
    for s in spec.synapses:
        ptr[s.pre + 1] += 1
    ptr = np.cumsum(ptr)
    return dict(
        theta=np.array([x.theta for x in nr]), v_reset=np.array([x.v_reset for x in nr]),
        drive=np.array([x.input.values[0] for x in nr]), sigma=np.array([x.sigma for x in nr]),
        R=np.array([x.refractory_R for x in nr]),
        kform=np.array([0 if x.kappa.form is KappaForm.STEP else 1 for x in nr], dtype=np.int64),
        ktau=np.array([x.kappa.tau_kappa or 1.0 for x in nr]),
        ptr=ptr, post=np.array([spec.synapses[k].post for k in order], dtype=np.int64),
        weight=np.array([spec.synapses[k].weight for k in order]),
    )


@njit(cache=True)
def _kappa(elapsed, R, form, tau):
    if not elapsed > R:
        return 0.0
    if form == 0:
        return 1.0
    return -math.expm1(-(elapsed - R) / tau)


@njit(cache=True)
def run_batch(gen, n_runs, end, v0, theta, v_reset, drive, sigma, R, kform, ktau, ptr, post,
              weight, first_run):
    n = theta.size
    cap = max(16, n_runs * n * 4)
    runs = np.empty(cap, dtype=np.int64)
    times = np.empty(cap)
    ids = np.empty(cap, dtype=np.int64)
    count = 0
    due = np.empty(n)
    last = np.empty(n)
    for r in range(n_runs):
        for i in range(n):
            due[i] = hit_draw(gen, theta[i] - v0[i], drive[i], sigma[i], end)
            last[i] = -np.inf
        while True:
            i = np.argmin(due)
            T = due[i]
            if not T <= end:
                break
            if count == cap:
                cap *= 2
                runs2 = np.empty(cap, dtype=np.int64)
                times2 = np.empty(cap)
                ids2 = np.empty(cap, dtype=np.int64)
                runs2[:count] = runs
                times2[:count] = times
                ids2[:count] = ids
                runs, times, ids = runs2, times2, ids2
            runs[count] = first_run + r
            times[count] = T
            ids[count] = i
            count += 1
            last[i] = T
            t0 = T + R[i]
            due[i] = t0 + hit_draw(gen, theta[i] - v_reset[i], drive[i], sigma[i], end - t0) \
                if end - t0 > 0.0 else np.inf
            for k in range(ptr[i], ptr[i + 1]):
                j = post[k]
                w = weight[k] * _kappa(T - last[j], R[j], kform[j], ktau[j])
                if w != 0.0 and due[j] < np.inf:
                    due[j] += hit_draw(gen, -w, drive[j], sigma[j], end - due[j])
    return runs[:count], times[:count], ids[:count]

"""Many independent realizations, seeded from one master seed.

Seed split: run k of an ensemble with master seed s uses
``np.random.default_rng([s, k])``.  The compiled loop uses one Generator per
chunk c of runs, seeded with ``SeedSequence([s, FAST_TAG, c])``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..models import NetworkSpec
from . import fast
from .engine import CoreOptions, advance, init_state
from .state import CountdownState, SpikeTrain

FAST_TAG = 0x5EED
FAST_CHUNK = 4096


def run_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng([seed, k])


@dataclass(frozen=True, eq=False)
class SpikeEnsemble:
    """Flat (run, time, neuron) records, sorted by run then time."""

    n_runs: int
    n_neurons: int
    run: np.ndarray
    time: np.ndarray
    neuron: np.ndarray

    @classmethod
    def from_trains(cls, trains, n_neurons: int) -> "SpikeEnsemble":
        runs, times, ids = [], [], []
        for k, tr in enumerate(trains):
            runs.extend([k] * len(tr))
            times.extend(t for t, _ in tr.records)
            ids.extend(i for _, i in tr.records)
        return cls(len(trains), n_neurons, np.array(runs, dtype=np.int64),
                   np.array(times, dtype=float), np.array(ids, dtype=np.int64))

    def train(self, k: int) -> SpikeTrain:
        sel = self.run == k
        return SpikeTrain(list(zip(self.time[sel].tolist(), self.neuron[sel].tolist())))

    def trains(self):
        return [self.train(k) for k in range(self.n_runs)]

    def spike_times(self, neuron: int, window=None) -> np.ndarray:
        t = self.time[self.neuron == neuron]
        if window is not None:
            t = t[(t >= window[0]) & (t <= window[1])]
        return t

    def first_spikes(self, neuron: int | None = None, after: float = -np.inf) -> np.ndarray:
        """First spike time per run (runs without one are left out)."""
        sel = self.time > after
        if neuron is not None:
            sel &= self.neuron == neuron
        r, t = self.run[sel], self.time[sel]
        if r.size == 0:
            return np.empty(0)
        order = np.lexsort((t, r))
        r, t = r[order], t[order]
        first = np.concatenate([[True], r[1:] != r[:-1]])
        return t[first]

    def counts(self) -> np.ndarray:
        return np.bincount(self.neuron, minlength=self.n_neurons)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("run,time,neuron_id\n")
        for r, t, i in zip(self.run.tolist(), self.time.tolist(), self.neuron.tolist()):
            buf.write(f"{r},{t!r},{i}\n")
        return buf.getvalue()


def run_ensemble(spec: NetworkSpec, n_runs: int, seed: int, v0=None,
                 options: CoreOptions = CoreOptions(), method: str = "auto") -> SpikeEnsemble:
    """``method``: "auto" (compiled loop when eligible), "fast" or "python"."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if method not in ("auto", "fast", "python"):
        raise ValueError(f"unknown method {method!r}")
    use_fast = method == "fast" or (method == "auto" and fast.eligible(spec))
    if use_fast:
        return _run_fast(spec, n_runs, seed, v0)
    trains = []
    for k in range(n_runs):
        rng = run_rng(seed, k)
        state = init_state(spec, v0, rng, options=options)
        tr = SpikeTrain()
        advance(state, spec, rng, spec.horizon, tr, options)
        trains.append(tr)
    return SpikeEnsemble.from_trains(trains, spec.n)


def _run_fast(spec: NetworkSpec, n_runs: int, seed: int, v0=None) -> SpikeEnsemble:
    arrays = fast.compile_spec(spec)
    v0 = np.array([n.start_voltage for n in spec.neurons] if v0 is None else v0, dtype=float)
    if np.any(v0 >= arrays["theta"]):
        raise ValueError("initial voltages must lie below the thresholds")
    parts = []
    for c, first in enumerate(range(0, n_runs, FAST_CHUNK)):
        size = min(FAST_CHUNK, n_runs - first)
        gen = np.random.default_rng(np.random.SeedSequence([seed, FAST_TAG, c]))
        parts.append(fast.run_batch(gen, size, spec.horizon, v0, arrays["theta"],
                                    arrays["v_reset"], arrays["drive"], arrays["sigma"],
                                    arrays["R"], arrays["kform"], arrays["ktau"], arrays["ptr"],
                                    arrays["post"], arrays["weight"], first))
    run = np.concatenate([p[0] for p in parts])
    time = np.concatenate([p[1] for p in parts])
    neuron = np.concatenate([p[2] for p in parts])
    return SpikeEnsemble(n_runs, spec.n, run, time, neuron)


@dataclass(frozen=True, eq=False)
class RestartResult:
    """Post-snapshot spikes of continued runs (a) and of restarts from the
    serialized snapshot with fresh randomness (b)."""

    t_snapshot: float
    a: SpikeEnsemble
    b: SpikeEnsemble
    snapshots: tuple[str, ...] = ()


def markov_restart_check(spec: NetworkSpec, seed: int, t_snapshot: float, n_runs: int,
                         v0=None, options: CoreOptions = CoreOptions(),
                         keep_snapshots: bool = False) -> RestartResult:
    if not t_snapshot < spec.horizon:
        raise ValueError("t_snapshot must lie before the horizon")
    a_trains, b_trains, snaps = [], [], []
    for k in range(n_runs):
        rng = run_rng(seed, k)
        state = init_state(spec, v0, rng, options=options)
        advance(state, spec, rng, t_snapshot, SpikeTrain(), options)
        snap = state.advanced_to(max(t_snapshot, state.T)).to_json()
        if keep_snapshots:
            snaps.append(snap)
        tail_a = SpikeTrain()
        advance(state, spec, rng, spec.horizon, tail_a, options)
        restored = CountdownState.from_json(snap)
        rng_b = np.random.default_rng([seed, k, 1])
        tail_b = SpikeTrain()
        advance(restored, spec, rng_b, spec.horizon, tail_b, options)
        a_trains.append(tail_a)
        b_trains.append(tail_b)
    return RestartResult(t_snapshot, SpikeEnsemble.from_trains(a_trains, spec.n),
                         SpikeEnsemble.from_trains(b_trains, spec.n), tuple(snaps))

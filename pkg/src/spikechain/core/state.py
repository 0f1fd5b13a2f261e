"""Chain state, events and spike records."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SNAPSHOT_VERSION = 1


class SimulationQuiescent(Exception):
    """No neuron is scheduled to fire and no spike is in flight."""


class AvalancheDetected(RuntimeError):
    def __init__(self, time: float, count: int):
        super().__init__(f"{count} spikes at the single instant t={time!r}")
        self.time = time
        self.count = count


@dataclass(frozen=True, order=True)
class Event:
    """``kind`` is "delivery" or "fire"; fire events use ``post`` for the neuron.

    The field order makes the natural ordering the tie-break rule: time, then
    deliveries before firings, then (pre, post).
    """

    at: float
    kind: str
    pre: int = -1
    post: int = -1
    emission: float = math.nan
    synapse: int = -1

    @classmethod
    def fire(cls, at: float, neuron: int) -> "Event":
        return cls(at, "fire", -1, neuron)

    @property
    def neuron(self) -> int:
        return self.post


@dataclass
class CountdownState:
    """Markov chain state.

    ``due`` holds absolute scheduled firing times (inf: none within horizon);
    the countdown vector is ``X = due - T``.  ``i_s`` is the synaptic current at
    the scheduled firing time (exp-synapse neurons).  ``anchor_t``/``anchor_v``
    record the last instant at which a neuron's membrane value was known;
    ``paths`` keep the simulated future of filtered-noise neurons that can be
    excited.  ``pending`` is a heap of (arrival, pre, post, emission, synapse).
    """

    due: np.ndarray
    T: float
    i_s: np.ndarray
    last_spike: np.ndarray
    H: np.ndarray
    anchor_t: np.ndarray
    anchor_v: np.ndarray
    pending: list = field(default_factory=list)
    paths: dict = field(default_factory=dict)

    @property
    def X(self) -> np.ndarray:
        return self.due - self.T

    @property
    def n(self) -> int:
        return self.due.size

    def copy(self) -> "CountdownState":
        return CountdownState(self.due.copy(), self.T, self.i_s.copy(), self.last_spike.copy(),
                              self.H.copy(), self.anchor_t.copy(), self.anchor_v.copy(),
                              list(self.pending),
                              {k: tuple(a.copy() for a in v) for k, v in self.paths.items()})

    def to_json(self) -> str:
        doc = {
            "format_version": SNAPSHOT_VERSION,
            "T": _enc(self.T),
            "X": [_enc(x) for x in self.X],
            "i_s": [_enc(x) for x in self.i_s],
            "last_spike": [_enc(x) for x in self.last_spike],
            "H": [[_enc(x) for x in row] for row in self.H],
            "anchor_t": [_enc(x) for x in self.anchor_t],
            "anchor_v": [_enc(x) for x in self.anchor_v],
            "pending": [[_enc(a), p, q, _enc(e), k] for a, p, q, e, k in sorted(self.pending)],
            "paths": {str(k): [[_enc(x) for x in arr] for arr in v]
                      for k, v in sorted(self.paths.items())},
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CountdownState":
        doc = json.loads(text)
        if doc.get("format_version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {doc.get('format_version')!r}")
        T = _dec(doc["T"])
        arr = lambda key: np.array([_dec(x) for x in doc[key]], dtype=float)  # noqa: E731
        pending = [(_dec(a), int(p), int(q), _dec(e), int(k)) for a, p, q, e, k in doc["pending"]]
        paths = {int(k): tuple(np.array([_dec(x) for x in a]) for a in v)
                 for k, v in doc["paths"].items()}
        return cls(arr("X") + T, T, arr("i_s"), arr("last_spike"),
                   np.array([[_dec(x) for x in row] for row in doc["H"]], dtype=float).reshape(
                       len(doc["X"]), -1),
                   arr("anchor_t"), arr("anchor_v"), sorted(pending), paths)

    def advanced_to(self, t: float) -> "CountdownState":
        """Copy describing the chain at a time ``t`` between events."""
        if t < self.T:
            raise ValueError("cannot move the state backwards")
        out = self.copy()
        out.T = float(t)
        return out


def _enc(x):
    x = float(x)
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def _dec(x):
    return float(x)


@dataclass
class SpikeTrain:
    """Ordered (time, neuron) records of one realization."""

    records: list = field(default_factory=list)

    def append(self, t: float, neuron: int) -> None:
        self.records.append((float(t), int(neuron)))

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.records], dtype=float)

    @property
    def neurons(self) -> np.ndarray:
        return np.array([i for _, i in self.records], dtype=int)

    def of(self, neuron: int) -> np.ndarray:
        return np.array([t for t, i in self.records if i == neuron], dtype=float)

    def __len__(self) -> int:
        return len(self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,neuron_id\n")
        for t, i in self.records:
            buf.write(f"{t!r},{i}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpikeTrain":
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "time,neuron_id":
            raise ValueError("expected header 'time,neuron_id'")
        out = cls()
        for line in lines[1:]:
            t, i = line.split(",")
            out.append(float(t), int(i))
        return out

    def check(self, refractory) -> None:
        """Raise if times decrease or a neuron fires twice within its refractory period."""
        times = self.times
        if np.any(np.diff(times) < 0):
            raise AssertionError("spike times decrease")
        for i, r in enumerate(refractory):
            own = self.of(i)
            if own.size > 1 and np.min(np.diff(own)) < r * (1 - 1e-12):
                raise AssertionError(f"neuron {i} violates its refractory period {r}")

"""Declarative network descriptions and their TOML file format.

A network file looks like::

    format_version = 1
    horizon = 4.0

    [[neurons]]
    id = 0
    model = "PifInstant"      # LifInstant, PifExpSynapse, LifExpSynapse
    sigma = 0.2
    theta = 1.0
    v_reset = 0.0
    input = 1.0               # or { times = [2.0], values = [1.0, 0.5] }
    refractory = 0.0          # optional
    kappa = "Step"            # or { form = "ExpRecovery", tau = 0.005 }
    # tau, tau_s, rest_mu, v0, is0 where relevant

    [[synapses]]
    pre = 0
    post = 1
    weight = -0.2
    delay = 0.0               # optional

All quantities are in dimensionless model units.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .fpt.dip import DipModel
from .fpt.processes import GaussMarkovSpec, PiecewiseConstant, brownian, ornstein_uhlenbeck

FORMAT_VERSION = 1

#: Noise level used for the two-neuron demo networks (not given with them).
PAIR_SIGMA = 0.2


class SpecError(ValueError):
    """Invalid network description; ``path`` names the offending field."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class NeuronModel(str, Enum):
    PIF_INSTANT = "PifInstant"
    LIF_INSTANT = "LifInstant"
    PIF_EXP_SYNAPSE = "PifExpSynapse"
    LIF_EXP_SYNAPSE = "LifExpSynapse"

    @property
    def leaky(self) -> bool:
        return self in (NeuronModel.LIF_INSTANT, NeuronModel.LIF_EXP_SYNAPSE)

    @property
    def exp_synapse(self) -> bool:
        return self in (NeuronModel.PIF_EXP_SYNAPSE, NeuronModel.LIF_EXP_SYNAPSE)


class KappaForm(str, Enum):
    STEP = "Step"
    EXP_RECOVERY = "ExpRecovery"


@dataclass(frozen=True)
class KappaSpec:
    """Weight applied to incoming spikes as a function of the time since firing."""

    form: KappaForm = KappaForm.STEP
    tau_kappa: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "form", KappaForm(self.form))
        if self.form is KappaForm.EXP_RECOVERY:
            if self.tau_kappa is None or not self.tau_kappa > 0:
                raise SpecError("kappa.tau", "ExpRecovery needs tau > 0")
        elif self.tau_kappa is not None:
            raise SpecError("kappa.tau", "Step takes no tau")

    def __call__(self, elapsed: float, refractory: float) -> float:
        if not elapsed > refractory:
            return 0.0
        if self.form is KappaForm.STEP:
            return 1.0
        return -math.expm1(-(elapsed - refractory) / self.tau_kappa)

    def to_doc(self):
        if self.form is KappaForm.STEP:
            return "Step"
        return {"form": self.form.value, "tau": self.tau_kappa}


@dataclass(frozen=True)
class NeuronSpec:
    id: int
    model: NeuronModel
    sigma: float
    theta: float
    v_reset: float
    input: PiecewiseConstant = PiecewiseConstant()
    tau: float | None = None
    tau_s: float | None = None
    rest_mu: float = 0.0
    refractory_R: float = 0.0
    kappa: KappaSpec = KappaSpec()
    v0: float | None = None
    is0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "model", NeuronModel(self.model))
        if isinstance(self.input, (int, float)):
            object.__setattr__(self, "input", PiecewiseConstant.constant(self.input))
        p = f"neurons[{self.id}]"
        if not (isinstance(self.sigma, (int, float)) and self.sigma > 0):
            raise SpecError(f"{p}.sigma", "must be > 0")
        if not math.isfinite(self.theta):
            raise SpecError(f"{p}.theta", "must be finite")
        if not self.v_reset < self.theta:
            raise SpecError(f"{p}.v_reset", f"must be below theta ({self.v_reset} >= {self.theta})")
        if self.model.leaky:
            if self.tau is None or not self.tau > 0:
                raise SpecError(f"{p}.tau", f"{self.model.value} needs tau > 0")
        elif self.tau is not None:
            raise SpecError(f"{p}.tau", f"{self.model.value} has no membrane time constant")
        if self.model.exp_synapse:
            if self.tau_s is None or not self.tau_s > 0:
                raise SpecError(f"{p}.tau_s", f"{self.model.value} needs tau_s > 0")
        elif self.tau_s is not None:
            raise SpecError(f"{p}.tau_s", f"{self.model.value} has no synaptic time constant")
        if not self.model.leaky and self.rest_mu != 0.0:
            raise SpecError(f"{p}.rest_mu", "only leaky models have a resting level")
        if not (self.refractory_R >= 0 and math.isfinite(self.refractory_R)):
            raise SpecError(f"{p}.refractory", "must be finite and >= 0")
        if self.v0 is not None and not self.v0 < self.theta:
            raise SpecError(f"{p}.v0", "initial voltage must lie below theta")
        if not self.model.exp_synapse and self.is0 != 0.0:
            raise SpecError(f"{p}.is0", "only exp-synapse models carry a synaptic current")

    @property
    def start_voltage(self) -> float:
        return self.v_reset if self.v0 is None else self.v0

    def process(self) -> GaussMarkovSpec:
        """Free membrane diffusion (instantaneous-synapse models only)."""
        if self.model is NeuronModel.PIF_INSTANT:
            return brownian(self.sigma, self.input)
        if self.model is NeuronModel.LIF_INSTANT:
            return ornstein_uhlenbeck(self.tau, self.sigma, self.input, self.rest_mu)
        raise TypeError(f"{self.model.value} is not a one-dimensional diffusion")

    def dip_model(self) -> DipModel:
        if not self.model.exp_synapse:
            raise TypeError(f"{self.model.value} has no synaptic current")
        return DipModel(self.tau_s, self.sigma, self.input, self.tau, self.rest_mu)

    def to_doc(self) -> dict:
        doc = {"id": self.id, "model": self.model.value, "sigma": self.sigma, "theta": self.theta,
               "v_reset": self.v_reset, "input": self.input.to_doc()}
        for key in ("tau", "tau_s"):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        if self.model.leaky:
            doc["rest_mu"] = self.rest_mu
        doc["refractory"] = self.refractory_R
        doc["kappa"] = self.kappa.to_doc()
        if self.v0 is not None:
            doc["v0"] = self.v0
        if self.model.exp_synapse:
            doc["is0"] = self.is0
        return doc


@dataclass(frozen=True)
class SynapseSpec:
    pre: int
    post: int
    weight: float
    delay: float = 0.0

    def __post_init__(self):
        p = f"synapses[{self.pre}->{self.post}]"
        if not (math.isfinite(self.weight) and self.weight != 0):
            raise SpecError(f"{p}.weight", "must be finite and nonzero")
        if not (self.delay >= 0 and math.isfinite(self.delay)):
            raise SpecError(f"{p}.delay", "must be finite and >= 0")
        if self.pre == self.post and self.delay == 0:
            raise SpecError(f"{p}.delay", "self-connections need a positive delay")

    def to_doc(self) -> dict:
        return {"pre": self.pre, "post": self.post, "weight": self.weight, "delay": self.delay}


@dataclass(frozen=True)
class NetworkSpec:
    neurons: tuple[NeuronSpec, ...]
    synapses: tuple[SynapseSpec, ...] = ()
    horizon: float = 1.0
    M: int = field(init=False)

    def __post_init__(self):
        neurons = tuple(sorted(self.neurons, key=lambda n: n.id))
        synapses = tuple(sorted(self.synapses, key=lambda s: (s.pre, s.post, s.delay, s.weight)))
        object.__setattr__(self, "neurons", neurons)
        object.__setattr__(self, "synapses", synapses)
        if not neurons:
            raise SpecError("neurons", "at least one neuron is required")
        ids = [n.id for n in neurons]
        if ids != list(range(len(ids))):
            raise SpecError("neurons", f"ids must be 0..{len(ids) - 1} without gaps, got {ids}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise SpecError("horizon", "must be finite and > 0")
        n = len(neurons)
        for k, s in enumerate(synapses):
            for end in ("pre", "post"):
                if not 0 <= getattr(s, end) < n:
                    raise SpecError(f"synapses[{k}].{end}", f"unknown neuron {getattr(s, end)}")
        if any(s.weight > 0 for s in synapses):
            for k, s in enumerate(synapses):
                if s.delay > 0 and neurons[s.post].refractory_R == 0:
                    raise SpecError(
                        f"synapses[{k}].delay",
                        f"delayed input to neuron {s.post} without refractory period in an "
                        "excitatory network (unbounded delivery history)")
        object.__setattr__(self, "M", compute_M(self))

    @property
    def n(self) -> int:
        return len(self.neurons)

    @property
    def has_excitation(self) -> bool:
        return any(s.weight > 0 for s in self.synapses)

    def excitable(self) -> tuple[bool, ...]:
        """Neurons with at least one excitatory afferent."""
        out = [False] * self.n
        for s in self.synapses:
            if s.weight > 0:
                out[s.post] = True
        return tuple(out)

    def with_sigma(self, sigma: float) -> "NetworkSpec":
        return replace(self, neurons=tuple(replace(nr, sigma=sigma) for nr in self.neurons))

    def with_horizon(self, horizon: float) -> "NetworkSpec":
        return replace(self, horizon=horizon)


def compute_M(spec: NetworkSpec) -> int:
    """Most spikes of one presynaptic neuron that can be in flight on a synapse
    before the receiving neuron's refractory window closes."""
    m = 0
    for s in spec.synapses:
        r = spec.neurons[s.post].refractory_R
        if s.delay > 0 and r > 0:
            m = max(m, int(math.floor(s.delay / r + 1e-12)))
    return m


def history_depth(spec: NetworkSpec) -> int:
    """Columns of the firing-history matrix.

    A presynaptic neuron with refractory period R can have at most
    floor(delay / R) + 1 spikes travelling on one synapse.
    """
    m = 0
    for s in spec.synapses:
        if s.delay > 0:
            r = spec.neurons[s.pre].refractory_R
            m = max(m, int(math.floor(s.delay / r + 1e-12)) + 1 if r > 0 else 1)
    return max(m, 1)


# -- file format ------------------------------------------------------------

_NEURON_KEYS = {"id", "model", "sigma", "theta", "v_reset", "input", "tau", "tau_s", "rest_mu",
                "refractory", "kappa", "v0", "is0"}
_SYNAPSE_KEYS = {"pre", "post", "weight", "delay"}


def _number(doc, key, path, default=None, required=False):
    if key not in doc:
        if required:
            raise SpecError(f"{path}.{key}", "missing")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{path}.{key}", f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise SpecError(f"{path}.{key}", "must be finite")
    return float(v)


def _integer(doc, key, path):
    if key not in doc:
        raise SpecError(f"{path}.{key}", "missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(f"{path}.{key}", "expected an integer")
    return v


def _kappa(doc, path) -> KappaSpec:
    if doc is None or doc == "Step":
        return KappaSpec()
    if isinstance(doc, dict):
        unknown = set(doc) - {"form", "tau"}
        if unknown:
            raise SpecError(path, f"unknown keys {sorted(unknown)}")
        try:
            form = KappaForm(doc.get("form", "Step"))
        except ValueError:
            raise SpecError(f"{path}.form", f"unknown form {doc.get('form')!r}") from None
        tau = _number(doc, "tau", path)
        try:
            return KappaSpec(form, tau)
        except SpecError as e:
            raise SpecError(f"{path}.tau", e.reason) from None
    raise SpecError(path, "expected 'Step' or a table with form and tau")


def _neuron(doc, k) -> NeuronSpec:
    path = f"neurons[{k}]"
    if not isinstance(doc, dict):
        raise SpecError(path, "expected a table")
    unknown = set(doc) - _NEURON_KEYS
    if unknown:
        raise SpecError(path, f"unknown keys {sorted(unknown)}")
    try:
        model = NeuronModel(doc.get("model"))
    except ValueError:
        raise SpecError(f"{path}.model", f"unknown model {doc.get('model')!r}") from None
    try:
        inp = PiecewiseConstant.from_doc(doc.get("input", 0.0))
    except (ValueError, TypeError) as e:
        raise SpecError(f"{path}.input", str(e)) from None
    return NeuronSpec(
        id=_integer(doc, "id", path), model=model,
        sigma=_number(doc, "sigma", path, required=True),
        theta=_number(doc, "theta", path, required=True),
        v_reset=_number(doc, "v_reset", path, required=True),
        input=inp, tau=_number(doc, "tau", path), tau_s=_number(doc, "tau_s", path),
        rest_mu=_number(doc, "rest_mu", path, 0.0),
        refractory_R=_number(doc, "refractory", path, 0.0),
        kappa=_kappa(doc.get("kappa"), f"{path}.kappa"),
        v0=_number(doc, "v0", path), is0=_number(doc, "is0", path, 0.0))


def _synapse(doc, k) -> SynapseSpec:
    path = f"synapses[{k}]"
    if not isinstance(doc, dict):
        raise SpecError(path, "expected a table")
    unknown = set(doc) - _SYNAPSE_KEYS
    if unknown:
        raise SpecError(path, f"unknown keys {sorted(unknown)}")
    try:
        return SynapseSpec(_integer(doc, "pre", path), _integer(doc, "post", path),
                           _number(doc, "weight", path, required=True),
                           _number(doc, "delay", path, 0.0))
    except SpecError as e:
        field_name = e.path.rsplit(".", 1)[-1]
        raise SpecError(f"{path}.{field_name}", e.reason) from None


def parse_network(text: str) -> NetworkSpec:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise SpecError("<document>", f"not valid TOML: {e}") from None
    unknown = set(doc) - {"format_version", "horizon", "neurons", "synapses"}
    if unknown:
        raise SpecError("<document>", f"unknown keys {sorted(unknown)}")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SpecError("format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    if "horizon" not in doc:
        raise SpecError("horizon", "missing")
    horizon = doc["horizon"]
    if isinstance(horizon, bool) or not isinstance(horizon, (int, float)):
        raise SpecError("horizon", "expected a number")
    neurons = doc.get("neurons")
    if not isinstance(neurons, list):
        raise SpecError("neurons", "expected an array of tables")
    synapses = doc.get("synapses", [])
    if not isinstance(synapses, list):
        raise SpecError("synapses", "expected an array of tables")
    return NetworkSpec(tuple(_neuron(d, k) for k, d in enumerate(neurons)),
                       tuple(_synapse(d, k) for k, d in enumerate(synapses)), horizon)


def load_network(path) -> NetworkSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def serialize(spec: NetworkSpec) -> str:
    doc = {"format_version": FORMAT_VERSION, "horizon": spec.horizon,
           "neurons": [n.to_doc() for n in spec.neurons]}
    if spec.synapses:
        doc["synapses"] = [s.to_doc() for s in spec.synapses]
    return tomli_w.dumps(doc)


# -- ready-made networks -----------------------------------------------------

def _pif(i, theta=1.0, sigma=PAIR_SIGMA, **kw) -> NeuronSpec:
    return NeuronSpec(i, NeuronModel.PIF_INSTANT, sigma, theta, 0.0, PiecewiseConstant.constant(1.0), **kw)


def symmetric_pair(sigma: float = PAIR_SIGMA, horizon: float = 4.0) -> NetworkSpec:
    """Two mutually inhibiting PIF neurons, identical thresholds."""
    return NetworkSpec((_pif(0, sigma=sigma), _pif(1, sigma=sigma)),
                       (SynapseSpec(0, 1, -0.2), SynapseSpec(1, 0, -0.2)), horizon)


def asymmetric_pair(sigma: float = PAIR_SIGMA, horizon: float = 4.0) -> NetworkSpec:
    """Thresholds 1 and 1.3; the slower neuron inhibits more strongly."""
    return NetworkSpec((_pif(0, sigma=sigma), _pif(1, theta=1.3, sigma=sigma)),
                       (SynapseSpec(0, 1, -0.1), SynapseSpec(1, 0, -0.5)), horizon)


def excitatory_pair(sigma: float = PAIR_SIGMA, weight: float = 0.3, inhibition: float = -0.2,
                    delay: float = 0.05, refractory: float = 0.02,
                    horizon: float = 4.0) -> NetworkSpec:
    """Symmetric PIF pair where neuron 1 excites neuron 0 and neuron 0 inhibits
    neuron 1, both through a delay."""
    neurons = tuple(_pif(i, sigma=sigma, refractory_R=refractory) for i in range(2))
    return NetworkSpec(neurons, (SynapseSpec(0, 1, inhibition, delay),
                                 SynapseSpec(1, 0, weight, delay)), horizon)


def mixed_network(seed: int = 0, n: int = 10, p: float = 0.3, refractory: float = 0.02,
                  delay=(0.01, 0.1), horizon: float = 2.0, sigma: float = 0.3) -> NetworkSpec:
    """All four neuron models, mixed-sign weights and delays (model k % 4 for neuron k)."""
    rng = np.random.default_rng(seed)
    models = [NeuronModel.PIF_INSTANT, NeuronModel.LIF_INSTANT, NeuronModel.PIF_EXP_SYNAPSE,
              NeuronModel.LIF_EXP_SYNAPSE]
    neurons = []
    for k in range(n):
        m = models[k % 4]
        kw = dict(refractory_R=refractory, input=PiecewiseConstant.constant(1.0))
        if m.leaky:
            kw.update(tau=0.5, rest_mu=0.6)
        if m.exp_synapse:
            kw.update(tau_s=0.05)
        neurons.append(NeuronSpec(k, m, sigma, 1.0, 0.0, **kw))
    synapses = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                w = float(rng.uniform(0.05, 0.3)) * (1 if rng.random() < 0.5 else -1)
                synapses.append(SynapseSpec(i, j, w, float(rng.uniform(*delay))))
    return NetworkSpec(tuple(neurons), tuple(synapses), horizon)


def erdos_renyi(n: int, p: float, seed: int, template: NeuronSpec, weight=(-0.2, -0.05),
                delay=(0.0, 0.0), horizon: float = 1.0) -> NetworkSpec:
    """Random directed graph without self-loops; weights and delays uniform."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    neurons = tuple(replace(template, id=i) for i in range(n))
    synapses = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                synapses.append(SynapseSpec(i, j, float(rng.uniform(*weight)),
                                            float(rng.uniform(*delay))))
    return NetworkSpec(neurons, tuple(synapses), horizon)

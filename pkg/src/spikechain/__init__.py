"""Event-based simulation of stochastic integrate-and-fire networks.

Each neuron's time to its next spike (its countdown) is sampled from a
first-passage law; the vector of countdowns after each network spike is a
Markov chain, so whole networks run event by event without integrating any
membrane path.
"""

from .core import (AvalancheDetected, CoreOptions, CountdownState, SpikeEnsemble, SpikeTrain,
                   markov_restart_check, run, run_ensemble)
from .mc import Histogram, McConfig, Scheme, euler_run, gobet_crossing, histogram
from .models import (KappaForm, KappaSpec, NetworkSpec, NeuronModel, NeuronSpec, SpecError,
                     SynapseSpec, load_network, parse_network, serialize)

__version__ = "0.1.0"

__all__ = [
    "AvalancheDetected", "CoreOptions", "CountdownState", "Histogram", "KappaForm", "KappaSpec",
    "McConfig", "NetworkSpec", "NeuronModel", "NeuronSpec", "Scheme", "SpecError",
    "SpikeEnsemble", "SpikeTrain", "SynapseSpec", "euler_run", "gobet_crossing", "histogram",
    "load_network", "markov_restart_check", "parse_network", "run", "run_ensemble", "serialize",
]

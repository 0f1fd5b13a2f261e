"""Countdown Markov chain for spiking networks."""

from .engine import (AVALANCHE_FACTOR, CoreOptions, advance, deliver_spike, fire, init_state,
                     next_event, run)
from .ensemble import RestartResult, SpikeEnsemble, markov_restart_check, run_ensemble, run_rng
from .shifts import (ExpKernel, PostDeliveryLaw, TabulatedKernel, interaction_shift,
                     lif_exp_synapse_shift, lif_exp_synapse_shift_alpha, psp_voltage_shift)
from .state import (AvalancheDetected, CountdownState, Event, SimulationQuiescent, SpikeTrain)

__all__ = [
    "AVALANCHE_FACTOR", "AvalancheDetected", "CoreOptions", "CountdownState", "Event",
    "ExpKernel", "PostDeliveryLaw", "RestartResult", "SimulationQuiescent", "SpikeEnsemble",
    "SpikeTrain", "TabulatedKernel", "advance", "deliver_spike", "fire", "init_state",
    "interaction_shift", "lif_exp_synapse_shift", "lif_exp_synapse_shift_alpha",
    "markov_restart_check", "next_event", "psp_voltage_shift", "run", "run_ensemble", "run_rng",
]

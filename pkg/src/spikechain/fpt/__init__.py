"""First-passage laws: closed form, Volterra tables, conditioning, filtered noise."""

from .closed_form import NEVER, ig_cdf, ig_density, ig_logpdf, ig_sample, ig_survival
from .conditioning import (ConditionedValueDensity, DegenerateConditioningError, NextFpt,
                           conditioned_value_density, excitatory_next_fpt,
                           posterior_value_draw)
from .dip import DipHit, DipModel, dip_fpt_mc, dip_hit_times, ou_current_step, sample_dip_fpt
from .laws import fpt_density_many, fpt_survival_many, killed_transition_logpdf, sample_fpt
from .processes import (DriftedBmFptParams, GaussMarkovSpec, PiecewiseConstant, ProcessKind,
                        brownian, ornstein_uhlenbeck)
from .tables import FptTable, table_sample
from .volterra import VolterraError, volterra_fpt

__all__ = [
    "NEVER", "ConditionedValueDensity", "DegenerateConditioningError", "DipHit", "DipModel",
    "DriftedBmFptParams", "FptTable", "GaussMarkovSpec", "NextFpt", "PiecewiseConstant",
    "ProcessKind", "VolterraError", "brownian", "conditioned_value_density", "dip_fpt_mc",
    "dip_hit_times", "excitatory_next_fpt", "fpt_density_many", "fpt_survival_many",
    "ig_cdf", "ig_density", "ig_logpdf", "ig_sample", "ig_survival", "killed_transition_logpdf",
    "ornstein_uhlenbeck", "ou_current_step", "posterior_value_draw", "sample_dip_fpt",
    "sample_fpt", "table_sample", "volterra_fpt",
]

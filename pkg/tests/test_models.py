import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikechain.fpt import PiecewiseConstant
from spikechain.models import (PAIR_SIGMA, KappaForm, KappaSpec, NetworkSpec, NeuronModel,
                               NeuronSpec, SpecError, SynapseSpec, asymmetric_pair, compute_M,
                               erdos_renyi, excitatory_pair, history_depth, mixed_network,
                               parse_network, serialize, symmetric_pair)

SYMMETRIC_TOML = """
format_version = 1
horizon = 4.0

[[neurons]]
id = 0
model = "PifInstant"
sigma = 0.2
theta = 1.0
v_reset = 0.0
input = 1.0

[[neurons]]
id = 1
model = "PifInstant"
sigma = 0.2
theta = 1.0
v_reset = 0.0
input = 1.0

[[synapses]]
pre = 0
post = 1
weight = -0.2

[[synapses]]
pre = 1
post = 0
weight = -0.2
"""


def _pif(i, **kw):
    kw.setdefault("input", 1.0)
    return NeuronSpec(i, NeuronModel.PIF_INSTANT, 1.0, 1.0, 0.0, **kw)


def test_parse_symmetric_pair():
    spec = parse_network(SYMMETRIC_TOML)
    assert spec.n == 2
    assert all(n.model is NeuronModel.PIF_INSTANT for n in spec.neurons)
    assert all(s.weight < 0 for s in spec.synapses)
    assert spec.M == 0
    assert spec.neurons[0].refractory_R == 0.0
    assert spec.synapses[0].delay == 0.0
    assert spec.neurons[0].kappa.form is KappaForm.STEP
    assert spec == symmetric_pair()


def test_parse_asymmetric_pair():
    text = SYMMETRIC_TOML.replace("theta = 1.0\nv_reset = 0.0\ninput = 1.0\n\n[[synapses]]",
                                  "theta = 1.3\nv_reset = 0.0\ninput = 1.0\n\n[[synapses]]")
    text = text.replace("post = 1\nweight = -0.2", "post = 1\nweight = -0.1")
    text = text.replace("post = 0\nweight = -0.2", "post = 0\nweight = -0.5")
    spec = parse_network(text)
    assert [n.theta for n in spec.neurons] == [1.0, 1.3]
    assert spec == asymmetric_pair()


def test_reset_at_threshold_names_the_neuron():
    text = SYMMETRIC_TOML.replace("theta = 1.0\nv_reset = 0.0\ninput = 1.0\n\n[[synapses]]",
                                  "theta = 1.0\nv_reset = 1.0\ninput = 1.0\n\n[[synapses]]")
    with pytest.raises(SpecError) as e:
        parse_network(text)
    assert e.value.path == "neurons[1].v_reset"


@pytest.mark.parametrize("mutation,path", [
    (("sigma = 0.2", "sigma = -0.2"), "neurons[0].sigma"),
    (("model = \"PifInstant\"", "model = \"Izhikevich\""), "neurons[0].model"),
    (("weight = -0.2", "weight = 0.0"), "synapses[0].weight"),
    (("weight = -0.2", "weight = \"big\""), "synapses[0].weight"),
    (("format_version = 1", "format_version = 7"), "format_version"),
    (("horizon = 4.0", "horizon = -1.0"), "horizon"),
    (("input = 1.0", "input = { times = [1.0], values = [1.0] }"), "neurons[0].input"),
    (("v_reset = 0.0", "v_reset = 0.0\nspeed = 3"), "neurons[0]"),
])
def test_rejections_name_the_field(mutation, path):
    with pytest.raises(SpecError) as e:
        parse_network(SYMMETRIC_TOML.replace(*mutation, 1))
    assert e.value.path == path


def test_unknown_neuron_reference():
    with pytest.raises(SpecError) as e:
        NetworkSpec((_pif(0),), (SynapseSpec(0, 3, -0.1),))
    assert e.value.path == "synapses[0].post"


def test_self_loop_needs_delay():
    with pytest.raises(SpecError):
        SynapseSpec(1, 1, -0.1, 0.0)
    SynapseSpec(1, 1, -0.1, 0.5)


def test_model_specific_fields():
    with pytest.raises(SpecError):
        NeuronSpec(0, NeuronModel.LIF_INSTANT, 1.0, 1.0, 0.0)
    with pytest.raises(SpecError):
        NeuronSpec(0, NeuronModel.PIF_INSTANT, 1.0, 1.0, 0.0, tau=1.0)
    with pytest.raises(SpecError):
        NeuronSpec(0, NeuronModel.PIF_EXP_SYNAPSE, 1.0, 1.0, 0.0)
    with pytest.raises(SpecError):
        NeuronSpec(0, NeuronModel.PIF_INSTANT, 1.0, 1.0, 0.0, is0=1.0)


def test_delayed_excitation_needs_refractory_period():
    with pytest.raises(SpecError):
        NetworkSpec((_pif(0), _pif(1)), (SynapseSpec(0, 1, 0.1, 0.05),))
    NetworkSpec((_pif(0), _pif(1, refractory_R=0.01)), (SynapseSpec(0, 1, 0.1, 0.05),))
    # purely inhibitory delayed networks are fine without refractoriness
    NetworkSpec((_pif(0), _pif(1)), (SynapseSpec(0, 1, -0.1, 0.05),))


def test_M_without_delays_is_zero():
    assert symmetric_pair().M == 0


def test_M_single_synapse():
    spec = NetworkSpec((_pif(0), _pif(1, refractory_R=2.0)), (SynapseSpec(0, 1, -0.1, 5.0),))
    assert compute_M(spec) == 2


def test_M_is_max_of_floors():
    neurons = (_pif(0, refractory_R=0.5), _pif(1, refractory_R=1.0))
    spec = NetworkSpec(neurons, (SynapseSpec(0, 1, -0.1, 3.0), SynapseSpec(1, 0, -0.1, 1.0)))
    assert spec.M == 3


def test_history_depth_uses_presynaptic_refractory_period():
    neurons = (_pif(0, refractory_R=0.02), _pif(1, refractory_R=1.0))
    spec = NetworkSpec(neurons, (SynapseSpec(0, 1, -0.1, 0.1),))
    assert history_depth(spec) == 6
    assert spec.M == 0


def test_kappa_shapes():
    step = KappaSpec()
    assert step(0.01, 0.02) == 0.0 and step(0.02, 0.02) == 0.0 and step(0.03, 0.02) == 1.0
    exp = KappaSpec(KappaForm.EXP_RECOVERY, 0.01)
    values = [exp(t, 0.02) for t in (0.0, 0.02, 0.021, 0.03, 0.1, 1.0)]
    assert values[:2] == [0.0, 0.0]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(1.0)
    with pytest.raises(SpecError):
        KappaSpec(KappaForm.EXP_RECOVERY)


def test_ready_made_networks():
    assert symmetric_pair().neurons[0].sigma == PAIR_SIGMA
    pair = excitatory_pair()
    assert pair.synapses[1].weight == 0.3 and pair.synapses[1].delay == 0.05
    assert pair.excitable() == (True, False)
    mixed = mixed_network()
    assert {n.model for n in mixed.neurons} == set(NeuronModel)
    assert all(0.01 <= s.delay <= 0.1 for s in mixed.synapses)
    er = erdos_renyi(20, 0.2, 1, _pif(0))
    assert er.n == 20 and all(s.pre != s.post for s in er.synapses)
    assert erdos_renyi(20, 0.2, 1, _pif(0)) == er


def test_with_sigma_and_horizon():
    s = symmetric_pair().with_sigma(0.5).with_horizon(2.0)
    assert all(n.sigma == 0.5 for n in s.neurons) and s.horizon == 2.0


finite = st.floats(-2.0, 2.0, allow_nan=False)


@st.composite
def neurons(draw, i):
    model = draw(st.sampled_from(list(NeuronModel)))
    theta = draw(finite)
    kw = {}
    if model.leaky:
        kw["tau"] = draw(st.floats(0.01, 5.0))
        kw["rest_mu"] = draw(finite)
    if model.exp_synapse:
        kw["tau_s"] = draw(st.floats(0.001, 1.0))
        kw["is0"] = draw(finite)
    if draw(st.booleans()):
        kw["input"] = PiecewiseConstant((1.0, 2.5), (draw(finite), draw(finite), draw(finite)))
    else:
        kw["input"] = PiecewiseConstant.constant(draw(finite))
    if draw(st.booleans()):
        kw["kappa"] = KappaSpec(KappaForm.EXP_RECOVERY, draw(st.floats(0.001, 1.0)))
    if draw(st.booleans()):
        kw["v0"] = theta - draw(st.floats(0.01, 1.0))
    return NeuronSpec(i, model, draw(st.floats(0.01, 3.0)), theta,
                      theta - draw(st.floats(0.01, 2.0)),
                      refractory_R=draw(st.floats(0.001, 0.1)), **kw)


@st.composite
def networks(draw):
    n = draw(st.integers(1, 5))
    ns = tuple(draw(neurons(i)) for i in range(n))
    syn = []
    for _ in range(draw(st.integers(0, 6))):
        pre, post = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        delay = draw(st.floats(0.0, 0.2))
        if pre == post:
            delay = max(delay, 0.01)
        w = draw(st.floats(0.01, 1.0)) * draw(st.sampled_from([-1, 1]))
        syn.append(SynapseSpec(pre, post, w, delay))
    return NetworkSpec(ns, tuple(syn), draw(st.floats(0.1, 10.0)))


@settings(max_examples=60, deadline=None)
@given(networks())
def test_round_trip(spec):
    assert parse_network(serialize(spec)) == spec
    assert serialize(parse_network(serialize(spec))) == serialize(spec)


def test_serialization_is_canonical():
    a = NetworkSpec((_pif(1), _pif(0)), (SynapseSpec(1, 0, -0.1), SynapseSpec(0, 1, -0.1)))
    b = NetworkSpec((_pif(0), _pif(1)), (SynapseSpec(0, 1, -0.1), SynapseSpec(1, 0, -0.1)))
    assert serialize(a) == serialize(b)
    assert not math.isnan(a.horizon)

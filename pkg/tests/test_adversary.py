import numpy as np
import pytest

from flocksim.adversary import (Abstain, AdversaryError, AdversarySpec,
                                AlwaysApprove, AlwaysReject, Dropout,
                                GaussianNoise, HonestProposer, HonestVoter,
                                Inverter, LabelFlip, SignFlip, StaleDuplicate,
                                assign_strategies, cast_vote, propose)
from flocksim.modelplane import ParamVector, quantize, zeros
from flocksim.task import ClientDataset, TaskSpec, generate_client_data, honest_train

TASK = TaskSpec(dim=4, noise_sigma=0.0, n_train=32, n_test=16, lr=0.05,
                local_steps=2)
W_STAR = np.array([0.5, -0.25, 1.0, 2.0])


@pytest.fixture
def data():
    return generate_client_data(TASK, W_STAR, 3, "train")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_globals():
    g = quantize(np.array([0.1, 0.2, -0.3, 0.4]))
    prev = quantize(np.array([0.0, 0.1, 0.0, 0.2]))
    return g, prev


def test_honest_matches_honest_train(data, rng):
    g, prev = make_globals()
    out = propose(HonestProposer(), g, prev, data, TASK, rng)
    assert out == honest_train(g, data, TASK)


def test_sign_flip_identity(data, rng):
    g, prev = make_globals()
    honest = honest_train(g, data, TASK)
    out = propose(SignFlip(lam=1.0), g, prev, data, TASK, rng)
    expected = ParamVector(2 * g.values - honest.values)
    assert out == expected


def test_sign_flip_scales(data, rng):
    g, prev = make_globals()
    honest = honest_train(g, data, TASK)
    out = propose(SignFlip(lam=2.0), g, prev, data, TASK, rng)
    diff = honest.values - g.values
    scaled = np.floor(2.0 * diff + 0.5).astype(np.int64)
    assert out == ParamVector(g.values - scaled)


def test_gaussian_noise_offsets_global(data):
    g, prev = make_globals()
    out1 = propose(GaussianNoise(sigma_a=1.0), g, prev, data, TASK,
                   np.random.default_rng(5))
    out2 = propose(GaussianNoise(sigma_a=1.0), g, prev, data, TASK,
                   np.random.default_rng(5))
    assert out1 == out2  # deterministic given the rng stream
    noise = quantize(np.random.default_rng(5).normal(0.0, 1.0, 4))
    assert out1 == ParamVector(g.values + noise.values)


def test_label_flip_trains_on_negated_targets(data, rng):
    g, prev = make_globals()
    out = propose(LabelFlip(), g, prev, data, TASK, rng)
    flipped = ClientDataset(data.features, -data.targets, "train")
    assert out == honest_train(g, flipped, TASK)


def test_stale_duplicate_returns_prev_global(data, rng):
    g, prev = make_globals()
    assert propose(StaleDuplicate(), g, prev, data, TASK, rng) == prev


def test_dropout_is_silent(data, rng):
    g, prev = make_globals()
    assert propose(Dropout(), g, prev, data, TASK, rng) is None


def test_strategy_param_validation():
    with pytest.raises(AdversaryError):
        GaussianNoise(sigma_a=0.0)
    with pytest.raises(AdversaryError):
        SignFlip(lam=-1.0)


def test_voter_strategies():
    assert cast_vote(HonestVoter(), 0.3, False) == 0.3
    assert cast_vote(Inverter(), 0.3, False) == -0.3
    assert cast_vote(AlwaysApprove(), -0.9, False) == 1.0
    assert cast_vote(AlwaysReject(), 0.9, False) == -1.0
    assert cast_vote(Abstain(), 0.5, False) is None


def test_collusion_override_beats_strategy():
    # A colluding voter approves even when its base strategy would reject.
    assert cast_vote(AlwaysReject(), -0.9, True) == 1.0
    assert cast_vote(HonestVoter(), -0.9, True) == 1.0
    assert cast_vote(Abstain(), -0.9, True) == 1.0


def test_assignment_prefix_counts():
    ids = [f"n{i:03d}" for i in range(10)]
    spec = AdversarySpec(l_p=0.3, l_v=0.5)
    asg = assign_strategies(spec, ids)
    mal_p = [nid for nid in ids if asg.proposer_class(nid) == "malicious"]
    mal_v = [nid for nid in ids if asg.voter_class(nid) == "malicious"]
    assert mal_p == ids[:3]
    assert mal_v == ids[:5]
    # same prefix: every malicious proposer is also a malicious voter here
    assert set(mal_p) <= set(mal_v)


def test_assignment_floor_rule():
    ids = [str(i) for i in range(7)]
    asg = assign_strategies(AdversarySpec(l_p=0.3, l_v=0.0), ids)
    # floor(0.3 * 7) = 2
    count = sum(1 for nid in ids if asg.proposer_class(nid) == "malicious")
    assert count == 2


def test_assignment_zero_fractions_all_honest():
    ids = ["a", "b", "c"]
    asg = assign_strategies(AdversarySpec(l_p=0.0, l_v=0.0), ids)
    for nid in ids:
        assert isinstance(asg.proposer_strategies[nid], HonestProposer)
        assert isinstance(asg.voter_strategies[nid], HonestVoter)
        assert asg.node_class(nid) == "honest"


def test_assignment_overrides():
    ids = ["a", "b"]
    spec = AdversarySpec(l_p=0.0, l_v=0.0,
                         proposer_overrides={"b": Dropout()},
                         voter_overrides={"a": Abstain()})
    asg = assign_strategies(spec, ids)
    assert isinstance(asg.proposer_strategies["b"], Dropout)
    assert isinstance(asg.voter_strategies["a"], Abstain)
    assert asg.node_class("a") == "malicious"
    assert asg.node_class("b") == "malicious"
    with pytest.raises(AdversaryError):
        assign_strategies(AdversarySpec(proposer_overrides={"zz": Dropout()}),
                          ids)


def test_collusion_groups_mark_members_malicious():
    ids = ["a", "b", "c", "d"]
    spec = AdversarySpec(l_p=0.0, l_v=0.0,
                         collusion_groups=(frozenset({"c", "d"}),))
    asg = assign_strategies(spec, ids)
    assert asg.colluders == {"c", "d"}
    assert asg.node_class("c") == "malicious"
    assert asg.node_class("a") == "honest"
    with pytest.raises(AdversaryError):
        assign_strategies(
            AdversarySpec(collusion_groups=(frozenset({"nope"}),)), ids)


def test_fraction_bounds():
    with pytest.raises(AdversaryError):
        AdversarySpec(l_p=1.5).validate()
    with pytest.raises(AdversaryError):
        AdversarySpec(l_v=-0.1).validate()

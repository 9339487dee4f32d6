# -*- coding: utf-8 -*-

#    Copyright (C) 2024  The snapshot_inference authors
#
#    This program is free software; you can redistribute it and/or modify
#    it under the terms of the GNU General Public License as published by
#    the Free Software Foundation; either version 3 of the License, or
#    (at your option) any later version.
#
#    This program is distributed in the hope that it will be useful,
#    but WITHOUT ANY WARRANTY; without even the implied warranty of
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#    GNU General Public License for more details.
#
#    You should have received a copy of the GNU General Public License along
#    with this program; if not, write to the Free Software Foundation, Inc.,
#    51 Franklin Street, Fifth Floor, Boston, MA 02110-1301 USA.

import math

import numpy as np
import pytest

from snapshot_inference import configuration
from snapshot_inference import domain_parser
from snapshot_inference import policy
from snapshot_inference import samplers

# exact likelihoods of the chain fixture: each start is drawn with 1/3, paths have 4, 3 and 2 states
CHAIN_LIKELIHOODS = {0: 1.0 / 12.0, 1: 7.0 / 36.0, 2: 13.0 / 36.0, 3: 13.0 / 36.0}

ONE_KEY_TWO_DOORS = "!options\nkind = keys\n!map\na+G@.+b\n!doors\n[G] 0,1\n[G] 0,5\n"

LONG_CHAIN = "!options\nkind = chain\nlength = 40\nmoves = right\ngoals = a:39\nstarts = %d\n"


class ScriptedRandom(object):
    """Stands in for a numpy generator: returns the given draws, then p_default forever."""

    def __init__(self, p_values, p_default=0.99):
        self._values = list(p_values)
        self._default = p_default

    def random(self):
        return self._values.pop(0) if len(self._values) > 0 else self._default


def load(p_name):
    return domain_parser.load_domain(domain_parser.get_fixture_path(p_name))


def sampler_config(**p_settings):
    config = samplers.SamplerConfigModel()

    for name, value in p_settings.items():
        setattr(config, name, value)

    config.post_process()
    return config


def create_sampler(p_domain, p_max_forward_steps=None, **p_settings):
    policy_config = policy.PolicyConfigModel()
    policy_config.post_process()
    backend = policy.create_policy(p_domain, policy_config)
    return samplers.LikelihoodSampler(p_domain=p_domain, p_policy=backend, p_config=sampler_config(**p_settings),
                                      p_max_forward_steps=p_max_forward_steps)


def assert_within_standard_errors(p_estimate, p_expected, p_count=4.0):
    assert p_estimate.standard_error > 0.0
    assert abs(p_estimate.mean - p_expected) <= p_count * p_estimate.standard_error


def test_make_rng_streams():
    first = samplers.make_rng(5, 0, 1, 2).random(3)
    second = samplers.make_rng(5, 0, 1, 2).random(3)
    other = samplers.make_rng(5, 0, 1, 3).random(3)

    assert np.array_equal(first, second)
    assert not np.array_equal(first, other)


def test_snapshot_key():
    domain = load("chain.dom")

    assert samplers.snapshot_key(domain, 1) == samplers.snapshot_key(load("chain.dom"), 1)
    assert samplers.snapshot_key(domain, 1) != samplers.snapshot_key(domain, 2)


def test_likelihood_estimate():
    estimate = samplers.LikelihoodEstimate.from_contributions([0.0, 1.0, 2.0, 3.0], p_overflow_count=1)

    assert 1.5 == estimate.mean
    assert 4 == estimate.n
    assert 3 == estimate.nonzero_count
    assert estimate.variance == pytest.approx(5.0 / 3.0)
    assert estimate.standard_error == pytest.approx(math.sqrt(5.0 / 12.0))
    assert 1 == estimate.to_json()["overflow_count"]

    single = samplers.LikelihoodEstimate.from_contributions([0.5])
    assert 0.0 == single.variance
    assert 0.0 == single.standard_error


def test_likelihood_estimate_batches():
    estimate = samplers.LikelihoodEstimate.from_contributions([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], p_batches=2)

    # batch means 3 and 4
    assert 3.5 == estimate.mean
    assert 2 == estimate.batches
    assert estimate.batch_variance == pytest.approx(0.5)
    assert estimate.standard_error == pytest.approx(0.5)
    assert 2 == estimate.to_json()["batches"]

    assert 2 == samplers.LikelihoodEstimate.from_contributions([1.0, 2.0], p_batches=5).batches


def test_cache_normalizer():
    cache = samplers.BdptCache(p_goal="a", p_depth=4.0)
    cache.add_rollout(p_trace=[0, 1], p_entries=[(0, 0, 4.0), (1, 1, 16.0 / 3.0)])
    cache.add_rollout(p_trace=[1], p_entries=[(1, 0, 4.0)])
    cache.freeze()

    assert 2 == cache.rollout_count
    assert 3 == cache.total_entries
    assert 2 == cache.state_count
    assert 8.0 == cache.normalizer()
    assert 2.0 / 8.0 == cache.connection_factor(1)
    assert (0, 1) == cache.rollout(0)
    assert () == cache.entries(5)
    assert frozenset([0, 1]) == cache.states()

    with pytest.raises(RuntimeError):
        cache.add_rollout(p_trace=[2], p_entries=[])


def test_cache_connection_states():
    own = samplers.BdptCache(p_goal="a", p_depth=4.0)
    own.add_rollout(p_trace=[0], p_entries=[(0, 0, 4.0)])
    pinned = samplers.BdptCache(p_goal="a", p_depth=4.0, p_connection_states=[1, 2])
    pinned.add_rollout(p_trace=[0], p_entries=[(0, 0, 4.0)])

    assert own.connects(0)
    assert not own.connects(1)
    assert not pinned.connects(0)
    assert pinned.connects(1)
    assert 0.0 == pinned.connection_factor(1)


def test_grow_cache_immediate_stop():
    sampler = create_sampler(load("chain.dom"), depth=4.0)
    cache = samplers.BdptCache(p_goal="a", p_depth=4.0)

    # the start draw picks state 1, the first roulette draw stops
    count = sampler.grow_cache(p_goal="a", p_rng=ScriptedRandom([0.5, 0.0]), p_cache=cache)

    assert 1 == count
    assert [(0, 4.0, 0)] == cache.entries(1)
    assert (1,) == cache.rollout(0)


def test_grow_cache_weights():
    sampler = create_sampler(load("chain.dom"), depth=4.0)
    cache = samplers.BdptCache(p_goal="a", p_depth=4.0)

    # start at 0, the roulette never stops before the goal
    count = sampler.grow_cache(p_goal="a", p_rng=ScriptedRandom([0.1]), p_cache=cache)

    assert 3 == count
    assert (0, 1, 2, 3) == cache.rollout(0)

    for t in range(3):
        [(entry_t, weight, rollout_index)] = cache.entries(t)

        assert t == entry_t
        assert 0 == rollout_index
        assert weight == pytest.approx(4.0 / 0.75 ** t)


@pytest.mark.parametrize("start, depth", [(0, 4.0), (37, 20.0)])
def test_grow_cache_expected_entries(start, depth):
    domain = domain_parser.parse_domain_file(LONG_CHAIN % start)
    sampler = create_sampler(domain, depth=depth)
    path_states = 39 - start

    cache = sampler.build_cache(p_goal="a", p_rollouts=10000)

    assert cache.total_entries / cache.rollout_count == pytest.approx(min(depth, path_states), rel=0.05)


def test_roll_forward():
    sampler = create_sampler(load("chain.dom"))
    rng = samplers.make_rng(0)

    assert ([1, 2, 3], samplers.STATUS_OK) == sampler.roll_forward(p_state=1, p_goal="a", p_rng=rng)
    assert ([3], samplers.STATUS_OK) == sampler.roll_forward(p_state=3, p_goal="a", p_rng=rng)


def test_roll_forward_overflow():
    sampler = create_sampler(load("chain.dom"), p_max_forward_steps=1)

    trace, status = sampler.roll_forward(p_state=0, p_goal="a", p_rng=samplers.make_rng(0))

    assert samplers.STATUS_OVERFLOW == status
    assert [0, 1] == trace


def test_roll_forward_stuck_in_dead_state():
    domain = domain_parser.parse_domain_file(ONE_KEY_TWO_DOORS)
    sampler = create_sampler(domain)
    dead = ((0, 4), ((0, 2),), ((0, 5),))

    _trace, status = sampler.roll_forward(p_state=dead, p_goal="a", p_rng=samplers.make_rng(0))
    assert samplers.STATUS_STUCK == status

    sample = sampler.bdpt_sample_once(p_x=dead, p_goal="a", p_rng=samplers.make_rng(0))
    assert 0.0 == sample.contribution


def test_max_forward_steps():
    assert samplers.MAX_FORWARD_STEPS_FLOOR == create_sampler(load("chain.dom")).max_forward_steps
    assert 7 == create_sampler(load("chain.dom"), max_forward_steps=7).max_forward_steps
    assert 3 == create_sampler(load("chain.dom"), p_max_forward_steps=3).max_forward_steps


def test_rejection_sample_once():
    sampler = create_sampler(load("chain.dom"))

    for index in range(20):
        sample = sampler.rejection_sample_once(p_x=1, p_goal="a", p_rng=samplers.make_rng(index))

        if 1 in sample.trace:
            assert 1.0 / len(sample.trace) == sample.contribution

        else:
            assert 0.0 == sample.contribution


@pytest.mark.parametrize("x", sorted(CHAIN_LIKELIHOODS))
def test_rejection_chain(x):
    sampler = create_sampler(load("chain.dom"), samples=4000)

    estimate = sampler.estimate_likelihood(p_x=x, p_goal="a", p_method=samplers.METHOD_REJECTION)

    assert_within_standard_errors(estimate, CHAIN_LIKELIHOODS[x])


@pytest.mark.parametrize("x", [1, 2, 3])
def test_bdpt_chain_without_cache(x):
    sampler = create_sampler(load("chain.dom"), samples=4000)

    estimate = sampler.estimate_likelihood(p_x=x, p_goal="a", p_method=samplers.METHOD_BDPT)

    assert_within_standard_errors(estimate, CHAIN_LIKELIHOODS[x])


def test_bdpt_chain_start_without_predecessors():
    sampler = create_sampler(load("chain.dom"), samples=50)

    estimate = sampler.estimate_likelihood(p_x=0, p_goal="a", p_method=samplers.METHOD_BDPT)

    # the backward walk stops at once and the forward part is deterministic
    assert estimate.mean == pytest.approx(CHAIN_LIKELIHOODS[0])
    assert 0.0 == pytest.approx(estimate.variance)


def test_bdpt_chain_with_cache_pool():
    domain = load("chain.dom")
    sampler = create_sampler(domain, samples=4000)
    pool = sampler.build_cache_pool(p_goal="a", p_rollouts=100, p_batches=40)

    estimates, samples = sampler.estimate_likelihoods(p_snapshots=[1, 2], p_goal="a",
                                                      p_method=samplers.METHOD_BDPT, p_cache=pool,
                                                      p_keep_samples=True)

    assert [40, 40] == [estimate.batches for estimate in estimates]
    assert_within_standard_errors(estimates[0], CHAIN_LIKELIHOODS[1], p_count=3.0)
    assert_within_standard_errors(estimates[1], CHAIN_LIKELIHOODS[2], p_count=3.0)

    connected = [sample for sample in samples[0] if sample.connected]
    assert len(connected) > 0

    for sample in connected:
        assert sample.trace[0] in domain.start_prior().support
        assert 1 in sample.trace
        assert 3 == sample.trace[-1]


def test_build_cache_is_reproducible():
    sampler = create_sampler(load("chain_twin.dom"))

    first = sampler.build_cache(p_goal="a", p_rollouts=50)
    second = sampler.build_cache(p_goal="a", p_rollouts=50)

    assert first.frozen
    assert first.total_entries == second.total_entries
    assert [first.rollout(index) for index in range(50)] == [second.rollout(index) for index in range(50)]


def test_cache_pool():
    sampler = create_sampler(load("chain_twin.dom"))

    pool = sampler.build_cache_pool(p_goal="a", p_rollouts=20, p_batches=3)

    assert 3 == pool.batch_count
    assert 60 == pool.rollout_count
    assert pool.cache(1) is pool.cache_for_sample(4)
    assert pool.connection_states == sampler.build_connection_states(p_goal="a", p_rollouts=20)
    assert all(pool.cache(index).frozen for index in range(3))


def test_bdpt_without_entries_at_connection_state():
    sampler = create_sampler(load("chain.dom"))
    cache = samplers.BdptCache(p_goal="a", p_depth=samplers.DEFAULT_DEPTH, p_connection_states=[1])
    cache.add_rollout(p_trace=[0], p_entries=[(0, 0, samplers.DEFAULT_DEPTH)])
    cache.freeze()

    sample = sampler.bdpt_sample_once(p_x=1, p_goal="a", p_rng=samplers.make_rng(0), p_cache=cache)

    assert 0.0 == sample.contribution
    assert not sample.connected


def test_backward_proposal():
    sampler = create_sampler(load("chain_twin.dom"), alpha=0.0)

    proposal = sampler.backward_proposal(p_state=2, p_goal="a")

    assert proposal is sampler.backward_proposal(p_state=2, p_goal="a")
    assert 0 < len(proposal)
    assert len(proposal.choice) == len(proposal.predecessors)
    assert all(choice == pytest.approx(1.0 / len(proposal)) for choice in proposal.choice)
    assert 0 == len(samplers.BackwardProposal(p_predecessors=(), p_step_probabilities=(), p_alpha=1.0))


def test_estimates_are_reproducible_and_independent_of_batches():
    domain = load("chain_twin.dom")
    sampler = create_sampler(domain, samples=200)

    batch = sampler.estimate_likelihoods(p_snapshots=[0, 1, 2, 3], p_goal="a", p_method=samplers.METHOD_BDPT)[0]
    single = sampler.estimate_likelihoods(p_snapshots=[2], p_goal="a", p_method=samplers.METHOD_BDPT)[0]
    again = create_sampler(domain, samples=200).estimate_likelihoods(
        p_snapshots=[0, 1, 2, 3], p_goal="a", p_method=samplers.METHOD_BDPT)[0]

    assert batch[2] == single[0]
    assert batch == again


def test_trials_use_different_streams():
    sampler = create_sampler(load("chain_twin.dom"), samples=50)

    first = sampler.estimate_likelihood(p_x=2, p_goal="a", p_method=samplers.METHOD_BDPT, p_trial=0)
    second = sampler.estimate_likelihood(p_x=2, p_goal="a", p_method=samplers.METHOD_BDPT, p_trial=1)

    assert first.mean != second.mean


def test_rejection_overflow_counts():
    sampler = create_sampler(load("chain.dom"), p_max_forward_steps=1, samples=300)

    estimate = sampler.estimate_likelihood(p_x=2, p_goal="a", p_method=samplers.METHOD_REJECTION)

    assert estimate.overflow_count > 0
    assert estimate.overflow_count < 300


def test_keep_samples():
    sampler = create_sampler(load("chain.dom"), samples=5)

    estimates, samples = sampler.estimate_likelihoods(p_snapshots=[1, 2], p_goal="a",
                                                      p_method=samplers.METHOD_REJECTION, p_keep_samples=True)

    assert 2 == len(estimates)
    assert [5, 5] == [len(entry) for entry in samples]
    assert sampler.estimate_likelihoods(p_snapshots=[1], p_goal="a",
                                        p_method=samplers.METHOD_REJECTION)[1] is None


def test_unknown_method():
    sampler = create_sampler(load("chain.dom"))

    with pytest.raises(configuration.ConfigurationException):
        sampler.estimate_likelihood(p_x=1, p_goal="a", p_method="mcmc")

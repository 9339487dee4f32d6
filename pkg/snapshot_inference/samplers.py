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

"""Likelihood estimators for p(x | g): forward rejection sampling and the bidirectional path tracer.

Both estimate the expectation of ``[x in path] / len(path)`` over paths drawn from the start prior
and the step model, where the path length counts states (start and end included).
"""

import bisect
import dataclasses
import math
import typing
import zlib

import numpy as np
import scipy.special

from snapshot_inference import configuration
from snapshot_inference import log_handling

METHOD_REJECTION = "rejection"
METHOD_BDPT = "bdpt"
METHODS = [METHOD_REJECTION, METHOD_BDPT]

STREAM_REJECTION = 0
STREAM_BDPT = 1
STREAM_CACHE = 2
STREAM_CONNECTION_MAP = 3

PURPOSE_EVALUATION = 0
PURPOSE_GROUND_TRUTH = 1
PURPOSE_REJECTION_TRUTH = 2

STATUS_OK = "ok"
STATUS_OVERFLOW = "overflow"
STATUS_STUCK = "stuck"

MAX_FORWARD_STEPS_FLOOR = 1000
MAX_FORWARD_STEPS_FACTOR = 50
# start priors with more states than this get their costs from a full backward search
PRECOMPUTE_SUPPORT_LIMIT = 100

DEFAULT_ALPHA = 1.0
DEFAULT_DEPTH = 10.0
DEFAULT_SAMPLES = 10
DEFAULT_SEED = 0
DEFAULT_CACHE_ROLLOUTS = 100
DEFAULT_CACHE_BATCHES = 10


class SamplerConfigModel(configuration.ConfigModel):

    def __init__(self, p_section_name="Sampler"):
        super().__init__(p_section_name=p_section_name)

        self.alpha = DEFAULT_ALPHA
        self.depth = DEFAULT_DEPTH
        self.samples = DEFAULT_SAMPLES
        self.max_forward_steps = 0
        self.seed = DEFAULT_SEED
        self.use_cache = True
        self.cache_rollouts = DEFAULT_CACHE_ROLLOUTS
        self.cache_batches = DEFAULT_CACHE_BATCHES

    def post_process(self):

        if self.depth <= 1:
            raise configuration.ConfigurationException("[Sampler]depth must be greater than 1")

        if self.alpha < 0:
            raise configuration.ConfigurationException("[Sampler]alpha must not be negative")

        if self.samples < 1:
            raise configuration.ConfigurationException("[Sampler]samples must be at least 1")

        if self.max_forward_steps < 0:
            raise configuration.ConfigurationException("[Sampler]max_forward_steps must not be negative")

        if self.cache_rollouts < 0:
            raise configuration.ConfigurationException("[Sampler]cache_rollouts must not be negative")

        if self.cache_batches < 1:
            raise configuration.ConfigurationException("[Sampler]cache_batches must be at least 1")

        if self.seed < 0:
            raise configuration.ConfigurationException("[Sampler]seed must not be negative")


def make_rng(p_seed, *p_key):
    return np.random.default_rng(np.random.SeedSequence(p_seed, spawn_key=tuple(p_key)))


def snapshot_key(p_domain, p_state):
    """Stable integer identifying a snapshot in RNG stream keys, independent of sweep order."""
    return zlib.crc32(p_domain.format_state(p_state).encode("UTF-8"))


@dataclasses.dataclass
class PathSample(object):
    contribution: float
    total_length: int
    start_state: typing.Any
    trace: tuple
    overflow: bool = False
    connected: bool = False


@dataclasses.dataclass
class LikelihoodEstimate(object):
    """Sample mean of path contributions.

    With ``batches > 1`` the samples were split into independent batches (sample i belongs to batch
    i mod batches, each batch with its own forward cache) and the standard error is taken from the
    spread of the batch means, so that it covers the variance of the caches as well."""

    mean: float
    n: int
    nonzero_count: int
    variance: float
    overflow_count: int = 0
    batches: int = 1
    batch_variance: float = 0.0

    @classmethod
    def from_contributions(cls, p_contributions, p_overflow_count=0, p_batches=1):
        values = np.asarray(p_contributions, dtype=float)
        n = len(values)
        variance = float(np.var(values, ddof=1)) if n > 1 else 0.0
        batches = max(1, min(p_batches, n))
        batch_variance = 0.0

        if batches > 1:
            batch_means = np.array([np.mean(values[index::batches]) for index in range(batches)])
            batch_variance = float(np.var(batch_means, ddof=1))

        return cls(mean=float(np.mean(values)) if n > 0 else 0.0,
                   n=n,
                   nonzero_count=int(np.count_nonzero(values)),
                   variance=variance,
                   overflow_count=p_overflow_count,
                   batches=batches,
                   batch_variance=batch_variance)

    @property
    def standard_error(self):
        if self.batches > 1:
            return math.sqrt(self.batch_variance / self.batches)

        return math.sqrt(self.variance / self.n) if self.n > 0 else 0.0

    def to_json(self):
        return {
            "mean": self.mean,
            "n": self.n,
            "nonzero_count": self.nonzero_count,
            "variance": self.variance,
            "standard_error": self.standard_error,
            "batches": self.batches,
            "overflow_count": self.overflow_count,
        }


class BdptCache(object):
    """Forward prefixes from the start prior, stored per visited state as (t, d*w, rollout index).

    Backward walks connect at the states of ``connection_states``. The set must not depend on the
    rollouts of this cache (it comes from a separate pilot run), otherwise rarely visited states
    are connected exactly when the cache happens to contain them. Without a connection set the
    cache connects wherever it has entries."""

    def __init__(self, p_goal, p_depth, p_connection_states=None):
        self.goal = p_goal
        self._depth = p_depth
        self._connection_states = None if p_connection_states is None else frozenset(p_connection_states)
        self._entries = {}
        self._rollouts = []
        self._total_entries = 0
        self._frozen = False

    def add_rollout(self, p_trace, p_entries):
        if self._frozen:
            raise RuntimeError("Cache for goal '%s' is frozen" % str(self.goal))

        rollout_index = len(self._rollouts)
        self._rollouts.append(tuple(p_trace))

        for state, t, weight in p_entries:
            self._entries.setdefault(state, []).append((t, weight, rollout_index))

        self._total_entries += len(p_entries)

    def freeze(self):
        self._frozen = True

    @property
    def frozen(self):
        return self._frozen

    @property
    def total_entries(self):
        return self._total_entries

    @property
    def rollout_count(self):
        return len(self._rollouts)

    @property
    def state_count(self):
        return len(self._entries)

    def states(self):
        return frozenset(self._entries)

    def connects(self, p_state):
        if self._connection_states is None:
            return p_state in self._entries

        return p_state in self._connection_states

    def entries(self, p_state):
        return self._entries.get(p_state, ())

    def rollout(self, p_index):
        return self._rollouts[p_index]

    def normalizer(self):
        return self._depth * len(self._rollouts)

    def connection_factor(self, p_state):
        return len(self.entries(p_state)) / self.normalizer()

    def __len__(self):
        return self._total_entries


class BdptCachePool(object):
    """Independent forward caches of one goal sharing one connection set; sample i uses cache i mod K."""

    def __init__(self, p_goal, p_caches, p_connection_states):
        self.goal = p_goal
        self._caches = list(p_caches)
        self._connection_states = frozenset(p_connection_states)

    @property
    def batch_count(self):
        return len(self._caches)

    @property
    def connection_states(self):
        return self._connection_states

    @property
    def rollout_count(self):
        return sum(cache.rollout_count for cache in self._caches)

    def cache(self, p_index):
        return self._caches[p_index]

    def cache_for_sample(self, p_sample_index):
        return self._caches[p_sample_index % len(self._caches)]


class BackwardProposal(object):
    """Predecessors of one state with their step probabilities into it and the tempered choice CDF."""

    def __init__(self, p_predecessors, p_step_probabilities, p_alpha):
        self.predecessors = tuple(p_predecessors)
        self.step_probabilities = [float(prob) for prob in p_step_probabilities]
        choice = scipy.special.softmax(p_alpha * np.array(self.step_probabilities)) if self.predecessors else []
        self.choice = [float(prob) for prob in choice]
        self.cumulative = [float(value) for value in np.cumsum(choice)]

    def __len__(self):
        return len(self.predecessors)

    def sample_index(self, p_rng):
        index = bisect.bisect_right(self.cumulative, p_rng.random() * self.cumulative[-1])
        return min(index, len(self.predecessors) - 1)


class LikelihoodSampler(object):

    def __init__(self, p_domain, p_policy, p_config, p_max_forward_steps=None):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._domain = p_domain
        self._policy = p_policy
        self._config = p_config
        self._goal_indices = {goal: index for index, goal in enumerate(p_domain.goals())}
        self._proposals = {}
        self._max_forward_steps = p_max_forward_steps

        if self._max_forward_steps is None:
            self._max_forward_steps = self.resolve_max_forward_steps()

    @property
    def max_forward_steps(self):
        return self._max_forward_steps

    @property
    def domain(self):
        return self._domain

    @property
    def policy(self):
        return self._policy

    @property
    def config(self):
        return self._config

    def resolve_max_forward_steps(self):

        if self._config.max_forward_steps > 0:
            return self._config.max_forward_steps

        step_cost = self._policy.config.step_cost
        support = self._domain.start_prior().support
        longest = 0

        if step_cost > 0:
            for goal in self._domain.goals():
                oracle = self._policy.cost_oracle(goal)

                if len(support) > PRECOMPUTE_SUPPORT_LIMIT:
                    oracle.precompute()

                costs = [oracle.path_cost(state) for state in support]
                finite = [cost for cost in costs if not math.isinf(cost)]

                if len(finite) > 0:
                    longest = max(longest, int(math.ceil(max(finite) / step_cost)))

        max_forward_steps = max(MAX_FORWARD_STEPS_FLOOR, MAX_FORWARD_STEPS_FACTOR * longest)

        fmt = "Forward rollouts are capped at {steps} steps (longest optimal path from a start: {longest})"
        self._logger.debug(fmt.format(steps=max_forward_steps, longest=longest))

        return max_forward_steps

    def _rng(self, p_purpose, p_stream, p_trial, p_goal, *p_key):
        return make_rng(self._config.seed, p_purpose, p_stream, p_trial, self._goal_indices[p_goal], *p_key)

    def backward_proposal(self, p_state, p_goal):
        """Memoized predecessor choice at p_state: softmax of alpha times the step probabilities."""

        key = (p_goal, p_state)
        proposal = self._proposals.get(key)

        if proposal is None:
            predecessors = self._domain.predecessor_states(p_state=p_state, p_goal=p_goal)
            step_probabilities = [self._policy.step_prob(p_state=prev, p_next_state=p_state, p_goal=p_goal)
                                  for prev in predecessors]
            proposal = BackwardProposal(p_predecessors=predecessors, p_step_probabilities=step_probabilities,
                                        p_alpha=self._config.alpha)
            self._proposals[key] = proposal

        return proposal

    def roll_forward(self, p_state, p_goal, p_rng):
        """Follows the step model from p_state until an end state. Returns the trace and a status."""

        trace = [p_state]
        state = p_state

        while not self._domain.is_end_state(p_state=state, p_goal=p_goal):
            if len(trace) - 1 >= self._max_forward_steps:
                return trace, STATUS_OVERFLOW

            state = self._policy.sample_next(p_state=state, p_goal=p_goal, p_rng=p_rng)

            if state is None:
                return trace, STATUS_STUCK

            trace.append(state)

        return trace, STATUS_OK

    def rejection_sample_once(self, p_x, p_goal, p_rng):

        start = self._domain.start_prior().sample(p_rng)
        trace, status = self.roll_forward(p_state=start, p_goal=p_goal, p_rng=p_rng)
        trace = tuple(trace)

        if status != STATUS_OK or p_x not in trace:
            return PathSample(contribution=0.0, total_length=len(trace), start_state=start, trace=trace,
                              overflow=status == STATUS_OVERFLOW)

        return PathSample(contribution=1.0 / len(trace), total_length=len(trace), start_state=start, trace=trace)

    def grow_cache(self, p_goal, p_rng, p_cache):
        """One roulette-terminated forward rollout from the start prior; every visited non-end state
        is stored with the weight d / (1 - 1/d)^t. Returns the number of new entries."""

        inverse_depth = 1.0 / self._config.depth
        state = self._domain.start_prior().sample(p_rng)
        trace = [state]
        entries = []
        w = 1.0
        t = 0

        while not self._domain.is_end_state(p_state=state, p_goal=p_goal):
            entries.append((state, t, self._config.depth * w))

            if p_rng.random() < inverse_depth or t >= self._max_forward_steps:
                break

            w /= 1.0 - inverse_depth
            state = self._policy.sample_next(p_state=state, p_goal=p_goal, p_rng=p_rng)

            if state is None:
                break

            trace.append(state)
            t += 1

        p_cache.add_rollout(p_trace=trace, p_entries=entries)
        return len(entries)

    def build_connection_states(self, p_goal, p_trial=0, p_purpose=PURPOSE_EVALUATION, p_rollouts=None):
        """States visited by a pilot run of cache rollouts on a stream of its own."""

        rollouts = self._config.cache_rollouts if p_rollouts is None else p_rollouts
        pilot = BdptCache(p_goal=p_goal, p_depth=self._config.depth)

        for index in range(rollouts):
            rng = self._rng(p_purpose, STREAM_CONNECTION_MAP, p_trial, p_goal, index)
            self.grow_cache(p_goal=p_goal, p_rng=rng, p_cache=pilot)

        return pilot.states()

    def build_cache(self, p_goal, p_trial=0, p_purpose=PURPOSE_EVALUATION, p_rollouts=None, p_batch=0,
                    p_connection_states=None):

        rollouts = self._config.cache_rollouts if p_rollouts is None else p_rollouts
        cache = BdptCache(p_goal=p_goal, p_depth=self._config.depth, p_connection_states=p_connection_states)

        for index in range(rollouts):
            rng = self._rng(p_purpose, STREAM_CACHE, p_trial, p_goal, p_batch, index)
            self.grow_cache(p_goal=p_goal, p_rng=rng, p_cache=cache)

        cache.freeze()

        fmt = "Built cache {batch} for goal '{goal}': {rollouts} rollouts, {entries} entries at {states} states"
        self._logger.debug(fmt.format(batch=p_batch, goal=p_goal, rollouts=rollouts, entries=cache.total_entries,
                                      states=cache.state_count))
        return cache

    def build_cache_pool(self, p_goal, p_trial=0, p_purpose=PURPOSE_EVALUATION, p_rollouts=None, p_batches=None):
        """A pilot connection set and ``cache_batches`` independent caches of ``cache_rollouts`` each."""

        batches = self._config.cache_batches if p_batches is None else p_batches
        connection_states = self.build_connection_states(p_goal=p_goal, p_trial=p_trial, p_purpose=p_purpose,
                                                         p_rollouts=p_rollouts)
        caches = [self.build_cache(p_goal=p_goal, p_trial=p_trial, p_purpose=p_purpose, p_rollouts=p_rollouts,
                                   p_batch=batch, p_connection_states=connection_states)
                  for batch in range(batches)]
        return BdptCachePool(p_goal=p_goal, p_caches=caches, p_connection_states=connection_states)

    def bdpt_sample_once(self, p_x, p_goal, p_rng, p_cache=None):

        forward, status = self.roll_forward(p_state=p_x, p_goal=p_goal, p_rng=p_rng)

        if status != STATUS_OK:
            return PathSample(contribution=0.0, total_length=len(forward), start_state=None, trace=tuple(forward),
                              overflow=status == STATUS_OVERFLOW)

        depth = self._config.depth
        inverse_depth = 1.0 / depth
        start_prior = self._domain.start_prior()
        use_cache = p_cache is not None and p_cache.rollout_count > 0
        backward = [p_x]
        current = p_x
        p_path = 1.0

        while True:
            if use_cache and p_cache.connects(current):
                entries = p_cache.entries(current)

                if len(entries) == 0:
                    trace = tuple(reversed(backward)) + tuple(forward[1:])
                    return PathSample(contribution=0.0, total_length=len(trace), start_state=None, trace=trace)

                t_cache, weight, rollout_index = entries[int(p_rng.integers(len(entries)))]
                prefix = p_cache.rollout(rollout_index)[:t_cache]
                trace = prefix + tuple(reversed(backward)) + tuple(forward[1:])
                factor = p_cache.connection_factor(current)
                contribution = weight * factor * p_path / len(trace) / trace.count(p_x)
                return PathSample(contribution=contribution, total_length=len(trace),
                                  start_state=trace[0], trace=trace, connected=True)

            proposal = self.backward_proposal(p_state=current, p_goal=p_goal)
            trace = tuple(reversed(backward)) + tuple(forward[1:])

            if len(proposal) == 0:
                contribution = start_prior.probability(current) * p_path / len(trace) / trace.count(p_x)
                return PathSample(contribution=contribution, total_length=len(trace), start_state=current,
                                  trace=trace)

            if p_rng.random() < inverse_depth:
                contribution = start_prior.probability(current) * p_path * depth / len(trace) / trace.count(p_x)
                return PathSample(contribution=contribution, total_length=len(trace), start_state=current,
                                  trace=trace)

            p_path /= 1.0 - inverse_depth

            index = proposal.sample_index(p_rng)
            p_path *= proposal.step_probabilities[index] / proposal.choice[index]

            if p_path == 0.0:
                return PathSample(contribution=0.0, total_length=len(trace), start_state=None, trace=trace)

            current = proposal.predecessors[index]
            backward.append(current)

    def estimate_likelihood(self, p_x, p_goal, p_method, p_trial=0, p_cache=None, p_samples=None,
                            p_purpose=PURPOSE_EVALUATION):

        estimates, _samples = self.estimate_likelihoods(
            p_snapshots=[p_x], p_goal=p_goal, p_method=p_method, p_trial=p_trial, p_cache=p_cache,
            p_samples=p_samples, p_purpose=p_purpose)
        return estimates[0]

    def estimate_likelihoods(self, p_snapshots, p_goal, p_method, p_trial=0, p_cache=None, p_samples=None,
                             p_purpose=PURPOSE_EVALUATION, p_keep_samples=False):
        """Estimates p(x | g) for every snapshot x. p_cache is a BdptCachePool (or a single BdptCache)
        of the goal. Returns the list of estimates and, with p_keep_samples, the list of PathSample
        lists (None otherwise)."""

        n = self._config.samples if p_samples is None else p_samples

        if p_method == METHOD_REJECTION:
            estimates, samples = self._estimate_by_rejection(p_snapshots, p_goal, n, p_trial, p_purpose,
                                                             p_keep_samples)

        elif p_method == METHOD_BDPT:
            pool = p_cache

            if isinstance(pool, BdptCache):
                pool = BdptCachePool(p_goal=p_goal, p_caches=[pool], p_connection_states=())

            estimates, samples = self._estimate_by_bdpt(p_snapshots, p_goal, n, p_trial, pool, p_purpose,
                                                        p_keep_samples)

        else:
            raise configuration.ConfigurationException("Unknown sampling method '{method}'".format(method=p_method))

        if p_method == METHOD_REJECTION:
            # rejection rollouts are shared by all snapshots
            overflow = max((estimate.overflow_count for estimate in estimates), default=0)

        else:
            overflow = sum(estimate.overflow_count for estimate in estimates)

        if overflow > 0:
            fmt = "{count} rollout(s) for goal '{goal}' exceeded {steps} steps and were counted as zero"
            self._logger.warning(fmt.format(count=overflow, goal=p_goal, steps=self._max_forward_steps))

        return estimates, samples

    def _estimate_by_rejection(self, p_snapshots, p_goal, p_samples, p_trial, p_purpose, p_keep_samples):

        index = {}

        for i, x in enumerate(p_snapshots):
            index.setdefault(x, []).append(i)

        contributions = np.zeros((len(p_snapshots), p_samples))
        overflow_count = 0
        samples = [[] for _ in p_snapshots] if p_keep_samples else None

        for sample_index in range(p_samples):
            rng = self._rng(p_purpose, STREAM_REJECTION, p_trial, p_goal, sample_index)
            start = self._domain.start_prior().sample(rng)
            trace, status = self.roll_forward(p_state=start, p_goal=p_goal, p_rng=rng)
            trace = tuple(trace)

            if status == STATUS_OVERFLOW:
                overflow_count += 1

            elif status == STATUS_OK:
                for state in set(trace):
                    for i in index.get(state, ()):
                        contributions[i, sample_index] = 1.0 / len(trace)

            if p_keep_samples:
                for i in range(len(p_snapshots)):
                    samples[i].append(PathSample(contribution=float(contributions[i, sample_index]),
                                                 total_length=len(trace), start_state=start, trace=trace,
                                                 overflow=status == STATUS_OVERFLOW))

        estimates = [LikelihoodEstimate.from_contributions(contributions[i], p_overflow_count=overflow_count)
                     for i in range(len(p_snapshots))]
        return estimates, samples

    def _estimate_by_bdpt(self, p_snapshots, p_goal, p_samples, p_trial, p_pool, p_purpose, p_keep_samples):

        estimates = []
        samples = [] if p_keep_samples else None
        use_pool = p_pool is not None and p_pool.rollout_count > 0
        batches = p_pool.batch_count if use_pool else 1

        for x in p_snapshots:
            key = snapshot_key(self._domain, x)
            path_samples = []

            for sample_index in range(p_samples):
                rng = self._rng(p_purpose, STREAM_BDPT, p_trial, p_goal, key, sample_index)
                cache = p_pool.cache_for_sample(sample_index) if use_pool else None
                path_samples.append(self.bdpt_sample_once(p_x=x, p_goal=p_goal, p_rng=rng, p_cache=cache))

            overflow_count = sum(1 for sample in path_samples if sample.overflow)
            estimates.append(LikelihoodEstimate.from_contributions(
                [sample.contribution for sample in path_samples], p_overflow_count=overflow_count,
                p_batches=batches))

            if p_keep_samples:
                samples.append(path_samples)

        return estimates, samples

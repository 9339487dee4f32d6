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

"""Exact path-sum likelihoods for small domains by forward propagation of probability mass.

Paths are tracked together with a label summarizing them (e.g. whether the snapshot was visited).
Every path absorbed at an end state adds p(path) / len(path) to its label, p(path) including the
start prior mass.
"""

import collections

from snapshot_inference import blocks_domain
from snapshot_inference import log_handling

DEFAULT_RESIDUAL = 1e-9
DEFAULT_MAX_STEPS = 100000

logger = log_handling.get_logger(__name__)


def exact_path_statistics(p_domain, p_policy, p_goal, p_initial_label, p_update_label,
                          p_residual=DEFAULT_RESIDUAL, p_max_steps=DEFAULT_MAX_STEPS):
    """Returns a map label -> sum over absorbed paths with that label of p(path) / len(path).

    p_initial_label(state) labels a path of one state, p_update_label(label, state, next_state) extends
    it. Propagation stops once the mass not yet absorbed falls below p_residual. Mass reaching a
    state without successors is dropped."""

    result = collections.defaultdict(float)
    mass = collections.defaultdict(float)

    for state, probability in p_domain.start_prior().mass.items():
        mass[(state, p_initial_label(state))] += probability

    length = 1

    while len(mass) > 0 and length <= p_max_steps:
        next_mass = collections.defaultdict(float)

        for (state, label), probability in mass.items():
            if p_domain.is_end_state(p_state=state, p_goal=p_goal):
                result[label] += probability / length
                continue

            distribution = p_policy.step_distribution(p_state=state, p_goal=p_goal)

            for next_state, step_probability in zip(distribution.states, distribution.probabilities):
                if step_probability > 0.0:
                    next_label = p_update_label(label, state, next_state)
                    next_mass[(next_state, next_label)] += probability * step_probability

        mass = next_mass
        length += 1
        pending = sum(probability for (state, _label), probability in mass.items()
                      if not p_domain.is_end_state(p_state=state, p_goal=p_goal))

        if pending < p_residual:
            for (state, label), probability in mass.items():
                if p_domain.is_end_state(p_state=state, p_goal=p_goal):
                    result[label] += probability / length

            break

    else:
        if len(mass) > 0:
            fmt = "Exact propagation for goal '{goal}' stopped after {steps} steps"
            logger.warning(fmt.format(goal=p_goal, steps=p_max_steps))

    return dict(result)


def exact_likelihood(p_domain, p_policy, p_x, p_goal, p_residual=DEFAULT_RESIDUAL):

    statistics = exact_path_statistics(
        p_domain=p_domain, p_policy=p_policy, p_goal=p_goal,
        p_initial_label=lambda state: state == p_x,
        p_update_label=lambda label, _state, next_state: label or next_state == p_x,
        p_residual=p_residual)
    return statistics.get(True, 0.0)


def exact_likelihoods(p_domain, p_policy, p_snapshots, p_goal, p_residual=DEFAULT_RESIDUAL):
    return [exact_likelihood(p_domain=p_domain, p_policy=p_policy, p_x=x, p_goal=p_goal, p_residual=p_residual)
            for x in p_snapshots]


def exact_touched_marginals(p_domain, p_policy, p_x, p_goal, p_residual=DEFAULT_RESIDUAL):
    """Probability that each block has been moved along a path, given the path visits p_x."""

    def update(p_label, p_state, p_next_state):
        visited, touched = p_label
        letter = blocks_domain.moved_block(p_state, p_next_state)

        if letter is not None:
            touched = touched | frozenset(letter)

        return visited or p_next_state == p_x, touched

    statistics = exact_path_statistics(
        p_domain=p_domain, p_policy=p_policy, p_goal=p_goal,
        p_initial_label=lambda state: (state == p_x, frozenset()),
        p_update_label=update,
        p_residual=p_residual)

    likelihood = sum(value for (visited, _touched), value in statistics.items() if visited)

    if likelihood <= 0.0:
        return {}

    return {letter: sum(value for (visited, touched), value in statistics.items() if visited and letter in touched)
            / likelihood
            for letter in p_domain.letters}

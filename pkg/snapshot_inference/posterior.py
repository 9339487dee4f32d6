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

"""Goal posteriors from likelihood estimates, total variation and path-statistic marginals."""

import numpy as np

from snapshot_inference import configuration

STATUS_OK = "ok"
STATUS_NO_VALID_SAMPLES = "no_valid_samples"

PROBABILITY_TOLERANCE = 1e-9


class GoalPrior(object):

    def __init__(self, p_probabilities):

        total = sum(p_probabilities.values())

        if len(p_probabilities) == 0 or abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise configuration.ConfigurationException("Goal prior must sum to 1 (found {total})".format(total=total))

        if any(value < 0 for value in p_probabilities.values()):
            raise configuration.ConfigurationException("Goal prior contains negative probabilities")

        self._probabilities = dict(p_probabilities)

    @classmethod
    def uniform(cls, p_goals):
        goals = list(p_goals)
        return cls({goal: 1.0 / len(goals) for goal in goals})

    def goals(self):
        return sorted(self._probabilities)

    def __getitem__(self, p_goal):
        return self._probabilities[p_goal]

    def to_json(self):
        return dict(self._probabilities)


class GoalPosterior(object):

    def __init__(self, p_probabilities, p_status, p_per_goal_nonzero):
        self.probs = dict(p_probabilities)
        self.status = p_status
        self.per_goal_nonzero = dict(p_per_goal_nonzero)

    @property
    def is_ok(self):
        return self.status == STATUS_OK

    def goals(self):
        return sorted(self.per_goal_nonzero)

    def probability(self, p_goal):
        return self.probs.get(p_goal, 0.0)

    def argmax(self):
        if not self.is_ok:
            return None

        # ties resolve to the first goal in sorted order
        return max(sorted(self.probs), key=lambda goal: self.probs[goal])

    def to_json(self):
        return {
            "status": self.status,
            "probs": dict(self.probs),
            "per_goal_nonzero": dict(self.per_goal_nonzero),
        }


def posterior_over_goals(p_estimates, p_prior):

    if set(p_estimates) != set(p_prior.goals()):
        fmt = "Likelihood estimates cover goals {estimated} but the prior covers {prior}"
        raise configuration.ConfigurationException(fmt.format(estimated=sorted(p_estimates), prior=p_prior.goals()))

    goals = p_prior.goals()
    weights = np.array([p_estimates[goal].mean * p_prior[goal] for goal in goals])
    total = float(np.sum(weights))
    per_goal_nonzero = {goal: p_estimates[goal].nonzero_count for goal in goals}

    if total <= 0.0:
        return GoalPosterior(p_probabilities={}, p_status=STATUS_NO_VALID_SAMPLES,
                             p_per_goal_nonzero=per_goal_nonzero)

    probabilities = {goal: float(weight / total) for goal, weight in zip(goals, weights)}
    return GoalPosterior(p_probabilities=probabilities, p_status=STATUS_OK, p_per_goal_nonzero=per_goal_nonzero)


def tv_distance(p_posterior, p_other):

    if not p_posterior.is_ok or not p_other.is_ok:
        return 1.0

    if set(p_posterior.goals()) != set(p_other.goals()):
        raise configuration.ConfigurationException("Total variation needs posteriors over the same goals")

    return 0.5 * sum(abs(p_posterior.probability(goal) - p_other.probability(goal)) for goal in p_posterior.goals())


def path_statistic_marginal(p_samples, p_posterior, p_predicate):
    """Posterior-weighted fraction of paths satisfying p_predicate, self-normalized within each goal.

    p_samples maps each goal to its list of PathSample. Returns None when the posterior has no valid
    samples or a goal with posterior mass has no positive sample."""

    if not p_posterior.is_ok:
        return None

    result = 0.0

    for goal, probability in p_posterior.probs.items():
        if probability <= 0.0:
            continue

        weights = np.array([sample.contribution for sample in p_samples.get(goal, ())])
        total = float(np.sum(weights))

        if total <= 0.0:
            return None

        hits = np.array([1.0 if p_predicate(sample.trace) else 0.0 for sample in p_samples[goal]])
        result += probability * float(np.dot(weights, hits)) / total

    return min(max(result, 0.0), 1.0)

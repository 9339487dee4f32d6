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

"""Boltzmann-rational step model P(s -> s' | g) backed by value iteration or by an online backward A*."""

import abc
import collections
import heapq
import math

import numpy as np
import scipy.special

from snapshot_inference import configuration
from snapshot_inference import exceptions
from snapshot_inference import log_handling

UNREACHABLE = math.inf

MODE_VALUE_ITERATION = "vi"
MODE_ASTAR = "astar"

MODE_ALIASES = {
    "vi": MODE_VALUE_ITERATION,
    "value_iteration": MODE_VALUE_ITERATION,
    "astar": MODE_ASTAR,
    "astar_online": MODE_ASTAR,
}

DEFAULT_BETA = 2.0
DEFAULT_GAMMA = 1.0
DEFAULT_GOAL_REWARD = 0.0
DEFAULT_STEP_COST = 1.0
DEFAULT_MODE = MODE_ASTAR
DEFAULT_VI_TOLERANCE = 1e-9
DEFAULT_VI_MAX_ITERATIONS = 100000
DEFAULT_VI_MAX_STATES = 1000000


class PolicyConfigModel(configuration.ConfigModel):

    def __init__(self, p_section_name="Policy"):
        super().__init__(p_section_name=p_section_name)

        self.beta = DEFAULT_BETA
        self.gamma = DEFAULT_GAMMA
        self.goal_reward = DEFAULT_GOAL_REWARD
        self.step_cost = DEFAULT_STEP_COST
        self.mode = DEFAULT_MODE
        self.vi_tolerance = DEFAULT_VI_TOLERANCE
        self.vi_max_iterations = DEFAULT_VI_MAX_ITERATIONS
        self.vi_max_states = DEFAULT_VI_MAX_STATES

    def post_process(self):

        mode = MODE_ALIASES.get(self.mode)

        if mode is None:
            fmt = "[{section}]mode must be one of {modes} (found '{mode}')"
            raise configuration.ConfigurationException(
                fmt.format(section=self.section_name, modes=", ".join(sorted(MODE_ALIASES)), mode=self.mode))

        self.mode = mode

        if self.beta <= 0:
            raise configuration.ConfigurationException("[Policy]beta must be positive")

        if not 0 < self.gamma <= 1:
            raise configuration.ConfigurationException("[Policy]gamma must lie in (0, 1]")

        if self.vi_tolerance <= 0:
            raise configuration.ConfigurationException("[Policy]vi_tolerance must be positive")

        if self.step_cost < 0:
            raise configuration.ConfigurationException("[Policy]step_cost must not be negative")


class StepDistribution(object):
    """Successor states of one state together with their step probabilities."""

    def __init__(self, p_states, p_probabilities):
        self.states = tuple(p_states)
        self.probabilities = np.asarray(p_probabilities, dtype=float)
        self.cumulative = np.cumsum(self.probabilities)
        self._index = {state: i for i, state in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def probability(self, p_state):
        index = self._index.get(p_state)
        return 0.0 if index is None else float(self.probabilities[index])

    def sample(self, p_rng):
        if len(self.states) == 0:
            return None

        index = int(np.searchsorted(self.cumulative, p_rng.random() * self.cumulative[-1], side="right"))
        return self.states[min(index, len(self.states) - 1)]


EMPTY_DISTRIBUTION = StepDistribution((), ())


class CostOracle(object):
    """Optimal remaining cost C(x -> g) from a single backward search rooted at the goal states.

    The search is resumed whenever a queried state is not closed yet. Closed costs are exact for any
    consistent heuristic, so the open list is simply re-prioritized when the queried state changes."""

    def __init__(self, p_domain, p_goal, p_step_cost=DEFAULT_STEP_COST):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._domain = p_domain
        self._goal = p_goal
        self._step_cost = p_step_cost
        self._closed = {}
        self._best = {}
        self._open = []
        self._target = None
        self._exhausted = False
        self.expansions = 0

        for state in p_domain.goal_states(p_goal):
            self._best[state] = 0.0
            self._push(p_g=0.0, p_node=state)

    def _h(self, p_node):
        if self._target is None:
            return 0.0

        return self._step_cost * self._domain.heuristic(p_node, self._target)

    def _push(self, p_g, p_node):
        h = self._h(p_node)
        heapq.heappush(self._open, (p_g + h, h, self._domain.state_key(p_node), p_g, p_node))

    def _retarget(self, p_target):
        if p_target == self._target:
            return

        self._target = p_target
        entries = [(g, node) for _f, _h, _key, g, node in self._open
                   if node not in self._closed and g <= self._best[node]]
        self._open = []

        for g, node in entries:
            h = self._h(node)
            self._open.append((g + h, h, self._domain.state_key(node), g, node))

        heapq.heapify(self._open)

    def _expand_next(self):
        _f, _h, _key, g, node = heapq.heappop(self._open)

        if node in self._closed or g > self._best[node]:
            return None

        self._closed[node] = g
        self.expansions += 1

        for prev in self._domain.predecessor_states(p_state=node, p_goal=self._goal):
            if prev in self._closed:
                continue

            new_g = g + self._step_cost

            if new_g < self._best.get(prev, UNREACHABLE):
                self._best[prev] = new_g
                self._push(p_g=new_g, p_node=prev)

        return node

    def path_cost(self, p_state):

        cost = self._closed.get(p_state)

        if cost is not None:
            return cost

        if self._exhausted or not self._domain.is_valid_state(p_state):
            return UNREACHABLE

        self._retarget(p_state)

        while len(self._open) > 0:
            if self._expand_next() == p_state:
                return self._closed[p_state]

        self._exhausted = True
        return UNREACHABLE

    def precompute(self):
        self._retarget(None)

        while len(self._open) > 0:
            self._expand_next()

        self._exhausted = True

        fmt = "Closed {count} states for goal '{goal}'"
        self._logger.debug(fmt.format(count=len(self._closed), goal=self._goal))

    @property
    def closed_count(self):
        return len(self._closed)


class QTable(object):
    """Q-values of the live, non-end states of one goal."""

    def __init__(self, p_goal, p_q_values, p_transitions):
        self.goal = p_goal
        self._q_values = p_q_values
        self._transitions = p_transitions

    def q_value(self, p_state, p_action):
        return self._q_values[p_state][p_action]

    def actions(self, p_state):
        return sorted(self._q_values.get(p_state, {}))

    def has_state(self, p_state):
        return p_state in self._q_values

    def state_value(self, p_state):
        values = self._q_values.get(p_state)
        return max(values.values()) if values else 0.0

    def transitions(self, p_state, p_action):
        return self._transitions[p_state][p_action]

    def __len__(self):
        return len(self._q_values)


class PolicyBackend(object, metaclass=abc.ABCMeta):

    def __init__(self, p_domain, p_config):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._domain = p_domain
        self._config = p_config
        self._distributions = {}
        self._oracles = {}

    @property
    def domain(self):
        return self._domain

    @property
    def config(self):
        return self._config

    def cost_oracle(self, p_goal):
        oracle = self._oracles.get(p_goal)

        if oracle is None:
            oracle = CostOracle(p_domain=self._domain, p_goal=p_goal, p_step_cost=self._config.step_cost)
            self._oracles[p_goal] = oracle

        return oracle

    def path_cost(self, p_state, p_goal):
        return self.cost_oracle(p_goal).path_cost(p_state)

    def is_live(self, p_state, p_goal):
        return self.path_cost(p_state=p_state, p_goal=p_goal) != UNREACHABLE

    def step_distribution(self, p_state, p_goal):
        key = (p_goal, p_state)
        distribution = self._distributions.get(key)

        if distribution is None:
            if self._domain.is_end_state(p_state=p_state, p_goal=p_goal):
                distribution = EMPTY_DISTRIBUTION

            else:
                distribution = self._compute_distribution(p_state=p_state, p_goal=p_goal)

            self._distributions[key] = distribution

        return distribution

    def step_prob(self, p_state, p_next_state, p_goal):
        return self.step_distribution(p_state=p_state, p_goal=p_goal).probability(p_next_state)

    def sample_next(self, p_state, p_goal, p_rng):
        return self.step_distribution(p_state=p_state, p_goal=p_goal).sample(p_rng)

    @abc.abstractmethod
    def _compute_distribution(self, p_state, p_goal):  # pragma: no cover
        pass

    def prepare(self, p_goals=None):
        """Hook to move expensive precomputation out of the sampling loop."""
        pass


class AStarPolicy(PolicyBackend):
    """Softmax over the remaining path costs of the successors (online backward A* backend)."""

    def _utility(self, p_next_state, p_goal):
        # every path collects goal_reward exactly once, so only the remaining cost matters
        return -self.path_cost(p_state=p_next_state, p_goal=p_goal)

    def _compute_distribution(self, p_state, p_goal):
        if not self.is_live(p_state=p_state, p_goal=p_goal):
            return EMPTY_DISTRIBUTION

        states = []
        utilities = []

        for next_state in self._domain.successor_states(p_state=p_state, p_goal=p_goal):
            utility = self._utility(p_next_state=next_state, p_goal=p_goal)

            if utility != -UNREACHABLE:
                states.append(next_state)
                utilities.append(utility)

        if len(states) == 0:
            return EMPTY_DISTRIBUTION

        probabilities = scipy.special.softmax(self._config.beta * np.array(utilities))
        return StepDistribution(p_states=states, p_probabilities=probabilities)


class ValueIterationPolicy(PolicyBackend):
    """Softmax over Q-values computed by value iteration over the enumerated state space."""

    def __init__(self, p_domain, p_config):
        super().__init__(p_domain=p_domain, p_config=p_config)
        self._q_tables = {}

        if not p_domain.is_enumerable:
            fmt = "Domain '{name}' cannot be enumerated for value iteration, use policy mode '{mode}'"
            raise exceptions.UnsupportedModeException(fmt.format(name=p_domain.name, mode=MODE_ASTAR))

    def prepare(self, p_goals=None):
        for goal in p_goals or self._domain.goals():
            self.compute_q_table(p_goal=goal)

    def _live_states(self, p_goal):
        live = set()
        queue = collections.deque(self._domain.goal_states(p_goal))
        live.update(queue)

        while len(queue) > 0:
            state = queue.popleft()

            for prev in self._domain.predecessor_states(p_state=state, p_goal=p_goal):
                if prev not in live:
                    live.add(prev)
                    queue.append(prev)

        return live

    def _admissible_transitions(self, p_goal, p_live):
        """Groups the transitions of live non-end states by action, dropping actions that may lead
        into dead states. States left without actions are dropped until nothing changes."""

        transitions = {}

        for state in sorted(p_live):
            if self._domain.is_end_state(p_state=state, p_goal=p_goal):
                continue

            by_action = collections.defaultdict(list)

            for entry in self._domain.successors(p_state=state, p_goal=p_goal):
                by_action[entry.action].append((entry.next_state, entry.structural_prob))

            transitions[state] = dict(by_action)

        changed = True

        while changed:
            changed = False

            for state in list(transitions):
                actions = {action: outcomes for action, outcomes in transitions[state].items()
                           if all(next_state in p_live for next_state, _prob in outcomes)}

                if len(actions) == 0:
                    del transitions[state]
                    p_live.discard(state)
                    changed = True

                elif len(actions) < len(transitions[state]):
                    transitions[state] = actions
                    changed = True

        return transitions

    def compute_q_table(self, p_goal):
        q_table = self._q_tables.get(p_goal)

        if q_table is not None:
            return q_table

        states = self._domain.enumerate_states()

        if len(states) > self._config.vi_max_states:
            fmt = "Domain '{name}' has {count} states (limit {limit}) for value iteration, use policy mode '{mode}'"
            raise exceptions.UnsupportedModeException(fmt.format(
                name=self._domain.name, count=len(states), limit=self._config.vi_max_states, mode=MODE_ASTAR))

        live = self._live_states(p_goal)
        transitions = self._admissible_transitions(p_goal=p_goal, p_live=live)

        ordered_states = sorted(transitions)
        state_index = {state: i for i, state in enumerate(ordered_states)}
        # end states and every other live state without own Q-values share the terminal slot
        terminal_index = len(ordered_states)

        action_keys = []
        action_state = []
        triple_action = []
        triple_next = []
        triple_prob = []
        triple_reward = []

        for state in ordered_states:
            for action in sorted(transitions[state]):
                action_id = len(action_keys)
                action_keys.append((state, action))
                action_state.append(state_index[state])

                for next_state, prob in transitions[state][action]:
                    reward = -self._config.step_cost

                    if self._domain.is_end_state(p_state=next_state, p_goal=p_goal):
                        reward += self._config.goal_reward

                    triple_action.append(action_id)
                    triple_next.append(state_index.get(next_state, terminal_index))
                    triple_prob.append(prob)
                    triple_reward.append(reward)

        triple_action = np.array(triple_action, dtype=np.int64)
        triple_next = np.array(triple_next, dtype=np.int64)
        triple_prob = np.array(triple_prob, dtype=float)
        triple_reward = np.array(triple_reward, dtype=float)
        action_state = np.array(action_state, dtype=np.int64)
        action_starts = np.flatnonzero(np.r_[True, action_state[1:] != action_state[:-1]]) \
            if len(action_state) > 0 else np.array([], dtype=np.int64)

        values = np.zeros(terminal_index + 1)
        q_values = np.zeros(len(action_keys))
        iterations = 0
        delta = math.inf

        while delta >= self._config.vi_tolerance and iterations < self._config.vi_max_iterations:
            q_values = np.bincount(triple_action,
                                   weights=triple_prob * (triple_reward + self._config.gamma * values[triple_next]),
                                   minlength=len(action_keys))
            new_values = values.copy()

            if len(action_starts) > 0:
                new_values[:terminal_index] = np.maximum.reduceat(q_values, action_starts)

            delta = float(np.max(np.abs(new_values - values))) if len(values) > 0 else 0.0
            values = new_values
            iterations += 1

        if delta >= self._config.vi_tolerance:
            fmt = "Value iteration for goal '{goal}' stopped after {iterations} iterations (delta={delta})"
            self._logger.warning(fmt.format(goal=p_goal, iterations=iterations, delta=delta))

        else:
            fmt = "Value iteration for goal '{goal}' converged after {iterations} iterations over {count} states"
            self._logger.debug(fmt.format(goal=p_goal, iterations=iterations, count=len(ordered_states)))

        table = collections.defaultdict(dict)

        for (state, action), q_value in zip(action_keys, q_values):
            table[state][action] = float(q_value)

        q_table = QTable(p_goal=p_goal, p_q_values=dict(table), p_transitions=transitions)
        self._q_tables[p_goal] = q_table
        return q_table

    def _compute_distribution(self, p_state, p_goal):
        q_table = self.compute_q_table(p_goal=p_goal)

        if not q_table.has_state(p_state):
            return EMPTY_DISTRIBUTION

        actions = q_table.actions(p_state)
        action_probabilities = scipy.special.softmax(
            self._config.beta * np.array([q_table.q_value(p_state, action) for action in actions]))
        probabilities = collections.defaultdict(float)

        for action, action_probability in zip(actions, action_probabilities):
            for next_state, prob in q_table.transitions(p_state, action):
                probabilities[next_state] += action_probability * prob

        states = sorted(probabilities)
        return StepDistribution(p_states=states, p_probabilities=[probabilities[state] for state in states])


def create_policy(p_domain, p_config):

    mode = MODE_ALIASES.get(p_config.mode)

    if mode == MODE_VALUE_ITERATION:
        return ValueIterationPolicy(p_domain=p_domain, p_config=p_config)

    if mode == MODE_ASTAR:
        return AStarPolicy(p_domain=p_domain, p_config=p_config)

    raise configuration.ConfigurationException("Unknown policy mode '{mode}'".format(mode=p_config.mode))

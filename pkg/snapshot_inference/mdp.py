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

"""Abstract interface of a goal-parameterized MDP as consumed by the policies and samplers."""

import abc
import bisect
import dataclasses
import math
import typing

from snapshot_inference import exceptions
from snapshot_inference import log_handling

START_PRIOR_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class TransitionEntry(object):
    next_state: typing.Hashable
    action: str
    structural_prob: float = 1.0


class StartPrior(object):

    def __init__(self, p_mass):

        if len(p_mass) == 0:
            raise ValueError("Start prior has empty support")

        for state, mass in p_mass.items():
            if mass < 0 or math.isnan(mass):
                raise ValueError("Negative start mass {mass} for state {state}".format(mass=mass, state=state))

        total = sum(p_mass.values())

        if abs(total - 1.0) > START_PRIOR_TOLERANCE:
            raise ValueError("Start prior masses sum to {total} instead of 1".format(total=total))

        self._support = sorted(state for state, mass in p_mass.items() if mass > 0)
        self._mass = {state: p_mass[state] for state in self._support}
        self._cumulative = []

        running = 0.0

        for state in self._support:
            running += self._mass[state]
            self._cumulative.append(running)

    @classmethod
    def uniform(cls, p_states):
        states = sorted(set(p_states))

        if len(states) == 0:
            raise ValueError("Start prior has empty support")

        return cls({state: 1.0 / len(states) for state in states})

    @property
    def support(self):
        return list(self._support)

    @property
    def mass(self):
        return dict(self._mass)

    def probability(self, p_state):
        return self._mass.get(p_state, 0.0)

    def sample(self, p_rng):
        u = p_rng.random() * self._cumulative[-1]
        index = bisect.bisect_right(self._cumulative, u)
        return self._support[min(index, len(self._support) - 1)]


class DomainModel(object, metaclass=abc.ABCMeta):
    """Forward and backward dynamics of a goal-parameterized MDP.

    Instances are immutable after construction. States are hashable and totally ordered (the
    ordering is the canonical encoding used for deterministic iteration)."""

    is_enumerable = True

    def __init__(self, p_name):
        self._name = p_name
        self._logger = log_handling.get_logger(self.__class__.__name__)

    @property
    def name(self):
        return self._name

    @abc.abstractmethod
    def goals(self):  # pragma: no cover
        pass

    @abc.abstractmethod
    def start_prior(self):  # pragma: no cover
        pass

    @abc.abstractmethod
    def is_valid_state(self, p_state):  # pragma: no cover
        pass

    @abc.abstractmethod
    def is_end_state(self, p_state, p_goal):  # pragma: no cover
        pass

    @abc.abstractmethod
    def successors(self, p_state, p_goal):  # pragma: no cover
        pass

    @abc.abstractmethod
    def predecessors(self, p_state, p_goal):  # pragma: no cover
        pass

    @abc.abstractmethod
    def parse_state(self, p_text):  # pragma: no cover
        pass

    @abc.abstractmethod
    def format_state(self, p_state):  # pragma: no cover
        pass

    def enumerate_states(self):
        raise exceptions.UnsupportedModeException(
            "Domain '{name}' cannot enumerate its states".format(name=self._name))

    def goal_states(self, p_goal):
        return [state for state in self.enumerate_states() if self.is_end_state(p_state=state, p_goal=p_goal)]

    def heuristic(self, p_state, p_target):
        return 0

    def state_key(self, p_state):
        return p_state

    def successor_states(self, p_state, p_goal):
        return sorted(set(entry.next_state for entry in self.successors(p_state=p_state, p_goal=p_goal)))

    def predecessor_states(self, p_state, p_goal):
        return sorted(set(prev for prev, _action in self.predecessors(p_state=p_state, p_goal=p_goal)))

    def validate_start_prior(self):
        prior = self.start_prior()

        for state in prior.support:
            if not self.is_valid_state(p_state=state):
                fmt = "Start state {state} is not a valid state of domain '{name}'"
                raise ValueError(fmt.format(state=self.format_state(state), name=self._name))

            for goal in self.goals():
                if self.is_end_state(p_state=state, p_goal=goal):
                    fmt = "Start state {state} is an end state for goal '{goal}'"
                    raise ValueError(fmt.format(state=self.format_state(state), goal=goal))


class GridLikeDomain(DomainModel, metaclass=abc.ABCMeta):
    """Domains whose states project onto the cells of a rectangular map (used by heatmaps)."""

    @property
    @abc.abstractmethod
    def width(self):  # pragma: no cover
        pass

    @property
    @abc.abstractmethod
    def height(self):  # pragma: no cover
        pass

    @abc.abstractmethod
    def is_wall(self, p_cell):  # pragma: no cover
        pass

    @abc.abstractmethod
    def cell_of(self, p_state):  # pragma: no cover
        pass

    @abc.abstractmethod
    def state_for_cell(self, p_cell, p_template=None):  # pragma: no cover
        """Returns the state with the agent on p_cell and the non-positional parts of p_template,
        or None if that combination is not a valid state."""
        pass

    def goal_cells(self):
        return {}

    def cells(self):
        return [(row, col) for row in range(self.height) for col in range(self.width)]

    def in_bounds(self, p_cell):
        return 0 <= p_cell[0] < self.height and 0 <= p_cell[1] < self.width

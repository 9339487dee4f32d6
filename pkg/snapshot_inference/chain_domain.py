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

"""One-dimensional chain of cells used for hand-checkable examples."""

from snapshot_inference import exceptions
from snapshot_inference import mdp

MOVES_RIGHT = "right"
MOVES_BOTH = "both"
MOVE_MODES = [MOVES_RIGHT, MOVES_BOTH]


class ChainDomain(mdp.GridLikeDomain):

    def __init__(self, p_name, p_length, p_goals, p_starts, p_moves=MOVES_RIGHT):

        super().__init__(p_name=p_name)

        self._length = p_length
        self._goals = dict(p_goals)
        self._moves = p_moves

        if p_moves not in MOVE_MODES:
            raise ValueError("Unknown chain move mode '{moves}'".format(moves=p_moves))

        if p_length < 1:
            raise ValueError("Chain length must be positive")

        if len(self._goals) == 0:
            raise ValueError("Chain domain '{name}' has no goals".format(name=p_name))

        for goal, position in self._goals.items():
            if not self.is_valid_state(position):
                raise ValueError("Goal '{goal}' lies outside the chain".format(goal=goal))

        self._start_prior = mdp.StartPrior.uniform(p_starts)
        self.validate_start_prior()

    @property
    def width(self):
        return self._length

    @property
    def height(self):
        return 1

    def is_wall(self, p_cell):
        return False

    def goals(self):
        return sorted(self._goals)

    def goal_cells(self):
        return {goal: (0, position) for goal, position in self._goals.items()}

    def start_prior(self):
        return self._start_prior

    def is_valid_state(self, p_state):
        return isinstance(p_state, int) and 0 <= p_state < self._length

    def is_end_state(self, p_state, p_goal):
        return self._goals[p_goal] == p_state

    def _steps(self):
        return [("right", 1)] if self._moves == MOVES_RIGHT else [("left", -1), ("right", 1)]

    def successors(self, p_state, p_goal):
        if self.is_end_state(p_state=p_state, p_goal=p_goal):
            return []

        entries = [mdp.TransitionEntry(next_state=p_state + delta, action=action)
                   for action, delta in self._steps() if self.is_valid_state(p_state + delta)]

        return sorted(entries, key=lambda entry: (entry.next_state, entry.action))

    def predecessors(self, p_state, p_goal):
        result = []

        for action, delta in self._steps():
            prev = p_state - delta

            if self.is_valid_state(prev) and not self.is_end_state(p_state=prev, p_goal=p_goal):
                result.append((prev, action))

        return sorted(result)

    def enumerate_states(self):
        return list(range(self._length))

    def goal_states(self, p_goal):
        return [self._goals[p_goal]]

    def heuristic(self, p_state, p_target):
        return abs(p_state - p_target)

    def parse_state(self, p_text):
        try:
            state = int(p_text.strip())

        except ValueError:
            raise exceptions.InvalidSnapshotException(p_snapshot=p_text, p_reason="not an integer position")

        if not self.is_valid_state(state):
            raise exceptions.InvalidSnapshotException(p_snapshot=p_text, p_reason="position outside the chain")

        return state

    def format_state(self, p_state):
        return str(p_state)

    def cell_of(self, p_state):
        return 0, p_state

    def state_for_cell(self, p_cell, p_template=None):
        return p_cell[1] if p_cell[0] == 0 and self.is_valid_state(p_cell[1]) else None

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

from snapshot_inference import exceptions
from snapshot_inference import mdp
from snapshot_inference import tools

START_MODE_ENTRYWAYS = "entryways"
START_MODE_ANYWHERE = "anywhere"
START_MODES = [START_MODE_ENTRYWAYS, START_MODE_ANYWHERE]

MOVES = [
    ("north", (-1, 0)),
    ("south", (1, 0)),
    ("west", (0, -1)),
    ("east", (0, 1)),
]


def manhattan_distance(p_cell1, p_cell2):
    return abs(p_cell1[0] - p_cell2[0]) + abs(p_cell1[1] - p_cell2[1])


def shift(p_cell, p_delta):
    return p_cell[0] + p_delta[0], p_cell[1] + p_delta[1]


class GridDomain(mdp.GridLikeDomain):
    """Gridworld with gems as goals. A state is the agent's (row, col) cell."""

    def __init__(self, p_name, p_width, p_height, p_walls, p_gems, p_entryways=None,
                 p_start_mode=START_MODE_ENTRYWAYS):

        super().__init__(p_name=p_name)

        self._width = p_width
        self._height = p_height
        self._walls = frozenset(p_walls)
        self._gems = dict(p_gems)
        self._entryways = sorted(p_entryways or [])
        self._start_mode = p_start_mode

        if p_start_mode not in START_MODES:
            raise ValueError("Unknown start mode '{mode}'".format(mode=p_start_mode))

        if len(self._gems) == 0:
            raise ValueError("Grid domain '{name}' has no gems".format(name=p_name))

        for goal, cell in self._gems.items():
            if not self.in_bounds(cell) or cell in self._walls:
                raise ValueError("Gem '{goal}' lies on a wall or outside the map".format(goal=goal))

        if p_start_mode == START_MODE_ENTRYWAYS:
            if len(self._entryways) == 0:
                raise ValueError("Grid domain '{name}' has no entryways".format(name=p_name))

            start_cells = self._entryways

        else:
            gem_cells = set(self._gems.values())
            start_cells = [cell for cell in self.enumerate_states() if cell not in gem_cells]

        self._start_prior = mdp.StartPrior.uniform(start_cells)
        self.validate_start_prior()

    @property
    def width(self):
        return self._width

    @property
    def height(self):
        return self._height

    @property
    def start_mode(self):
        return self._start_mode

    def is_wall(self, p_cell):
        return p_cell in self._walls

    def goals(self):
        return sorted(self._gems)

    def goal_cells(self):
        return dict(self._gems)

    def start_prior(self):
        return self._start_prior

    def is_open_cell(self, p_cell):
        return self.in_bounds(p_cell) and p_cell not in self._walls

    def is_valid_state(self, p_state):
        return isinstance(p_state, tuple) and len(p_state) == 2 and self.is_open_cell(p_state)

    def is_end_state(self, p_state, p_goal):
        return self._gems[p_goal] == p_state

    def successors(self, p_state, p_goal):
        if self.is_end_state(p_state=p_state, p_goal=p_goal):
            return []

        entries = [mdp.TransitionEntry(next_state=shift(p_state, delta), action=action)
                   for action, delta in MOVES if self.is_open_cell(shift(p_state, delta))]

        return sorted(entries, key=lambda entry: (entry.next_state, entry.action))

    def predecessors(self, p_state, p_goal):
        result = []

        for action, delta in MOVES:
            prev = (p_state[0] - delta[0], p_state[1] - delta[1])

            if self.is_open_cell(prev) and not self.is_end_state(p_state=prev, p_goal=p_goal):
                result.append((prev, action))

        return sorted(result)

    def enumerate_states(self):
        return [cell for cell in self.cells() if cell not in self._walls]

    def goal_states(self, p_goal):
        return [self._gems[p_goal]]

    def heuristic(self, p_state, p_target):
        return manhattan_distance(p_state, p_target)

    def parse_state(self, p_text):
        try:
            state = tools.parse_cell(p_text)

        except ValueError as e:
            raise exceptions.InvalidSnapshotException(p_snapshot=p_text, p_reason=str(e))

        if not self.is_valid_state(state):
            raise exceptions.InvalidSnapshotException(p_snapshot=p_text,
                                                      p_reason="cell is a wall or outside the map")

        return state

    def format_state(self, p_state):
        return tools.format_cell(p_state)

    def cell_of(self, p_state):
        return p_state

    def state_for_cell(self, p_cell, p_template=None):
        return p_cell if self.is_valid_state(p_cell) else None

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

"""Doors, keys and gems: doors open only for an agent holding a key of the door's color.

A state is ``(cell, collected, opened)`` where ``collected`` is the sorted tuple of key cells picked
up so far and ``opened`` the sorted tuple of door cells opened so far. Opening a door consumes one
key of its color, so the keys currently held are the collected keys minus the opened doors per
color.
"""

import collections
import itertools

from snapshot_inference import exceptions
from snapshot_inference import grid_domain
from snapshot_inference import mdp
from snapshot_inference import tools

ACTION_PICKUP = "pickup"

FIELD_SEPARATOR = ";"
CELL_SET_SEPARATOR = "/"
FIELD_HOLDING = "holding"
FIELD_OPENED = "opened"
FIELD_COLLECTED = "collected"


def powerset(p_items):
    items = sorted(p_items)
    return itertools.chain.from_iterable(itertools.combinations(items, n) for n in range(len(items) + 1))


def format_cell_set(p_cells):
    return CELL_SET_SEPARATOR.join(tools.format_cell(cell) for cell in p_cells)


def parse_cell_set(p_text):
    if p_text.strip() == "":
        return ()

    return tuple(sorted(tools.parse_cell(part) for part in p_text.split(CELL_SET_SEPARATOR)))


class KeysDomain(mdp.GridLikeDomain):

    def __init__(self, p_name, p_width, p_height, p_walls, p_gems, p_keys, p_doors, p_entryways=None,
                 p_start_mode=grid_domain.START_MODE_ENTRYWAYS):

        super().__init__(p_name=p_name)

        self._width = p_width
        self._height = p_height
        self._walls = frozenset(p_walls)
        self._gems = dict(p_gems)
        self._keys = dict(p_keys)
        self._doors = dict(p_doors)
        self._entryways = sorted(p_entryways or [])
        self._start_mode = p_start_mode

        if len(self._gems) == 0:
            raise ValueError("Keys domain '{name}' has no gems".format(name=p_name))

        key_colors = set(self._keys.values())

        for cell, color in self._doors.items():
            if color not in key_colors:
                fmt = "Door at {cell} has color '{color}' but there is no key of that color"
                raise ValueError(fmt.format(cell=tools.format_cell(cell), color=color))

        for goal, cell in self._gems.items():
            if not self.in_bounds(cell) or cell in self._walls or cell in self._doors or cell in self._keys:
                raise ValueError("Gem '{goal}' does not lie on a floor cell".format(goal=goal))

        if p_start_mode == grid_domain.START_MODE_ENTRYWAYS:
            if len(self._entryways) == 0:
                raise ValueError("Keys domain '{name}' has no entryways".format(name=p_name))

            start_cells = self._entryways

        else:
            excluded = set(self._gems.values()) | set(self._doors)
            start_cells = [cell for cell in self.cells() if self.is_open_cell(cell) and cell not in excluded]

        self._start_prior = mdp.StartPrior.uniform([(cell, (), ()) for cell in start_cells])
        self.validate_start_prior()

    @property
    def width(self):
        return self._width

    @property
    def height(self):
        return self._height

    @property
    def keys(self):
        return dict(self._keys)

    @property
    def doors(self):
        return dict(self._doors)

    def is_wall(self, p_cell):
        return p_cell in self._walls

    def is_open_cell(self, p_cell):
        return self.in_bounds(p_cell) and p_cell not in self._walls

    def goals(self):
        return sorted(self._gems)

    def goal_cells(self):
        return dict(self._gems)

    def start_prior(self):
        return self._start_prior

    def held_keys(self, p_state):
        _cell, collected, opened = p_state
        held = collections.Counter(self._keys[cell] for cell in collected)
        held.subtract(self._doors[cell] for cell in opened)
        return held

    def is_valid_state(self, p_state):
        if not isinstance(p_state, tuple) or len(p_state) != 3:
            return False

        cell, collected, opened = p_state

        if not self.is_open_cell(cell):
            return False

        if any(key_cell not in self._keys for key_cell in collected) or \
                any(door_cell not in self._doors for door_cell in opened):
            return False

        if tuple(sorted(set(collected))) != collected or tuple(sorted(set(opened))) != opened:
            return False

        if cell in self._doors and cell not in opened:
            return False

        return all(count >= 0 for count in self.held_keys(p_state).values())

    def is_end_state(self, p_state, p_goal):
        return self._gems[p_goal] == p_state[0]

    def successors(self, p_state, p_goal):
        if self.is_end_state(p_state=p_state, p_goal=p_goal):
            return []

        cell, collected, opened = p_state
        entries = []
        held = None

        for action, delta in grid_domain.MOVES:
            next_cell = grid_domain.shift(cell, delta)

            if not self.is_open_cell(next_cell):
                continue

            if next_cell in self._doors and next_cell not in opened:
                if held is None:
                    held = self.held_keys(p_state)

                if held[self._doors[next_cell]] < 1:
                    continue

                next_state = (next_cell, collected, tuple(sorted(opened + (next_cell,))))

            else:
                next_state = (next_cell, collected, opened)

            entries.append(mdp.TransitionEntry(next_state=next_state, action=action))

        if cell in self._keys and cell not in collected:
            next_state = (cell, tuple(sorted(collected + (cell,))), opened)
            entries.append(mdp.TransitionEntry(next_state=next_state, action=ACTION_PICKUP))

        return sorted(entries, key=lambda entry: (entry.next_state, entry.action))

    def _predecessor_candidates(self, p_state):
        cell, collected, opened = p_state

        if cell in collected:
            yield (cell, tuple(c for c in collected if c != cell), opened), ACTION_PICKUP

        for action, delta in grid_domain.MOVES:
            prev_cell = (cell[0] - delta[0], cell[1] - delta[1])

            if not self.is_open_cell(prev_cell):
                continue

            yield (prev_cell, collected, opened), action

            if cell in opened:
                yield (prev_cell, collected, tuple(c for c in opened if c != cell)), action

    def predecessors(self, p_state, p_goal):
        result = []

        for prev, action in self._predecessor_candidates(p_state):
            if not self.is_valid_state(prev) or self.is_end_state(p_state=prev, p_goal=p_goal):
                continue

            if any(entry.next_state == p_state and entry.action == action
                   for entry in self.successors(p_state=prev, p_goal=p_goal)):
                result.append((prev, action))

        return sorted(result)

    def enumerate_states(self):
        states = []

        for cell in self.cells():
            if not self.is_open_cell(cell):
                continue

            for collected in powerset(self._keys):
                for opened in powerset(self._doors):
                    state = (cell, collected, opened)

                    if self.is_valid_state(state):
                        states.append(state)

        return sorted(states)

    def goal_states(self, p_goal):
        cell = self._gems[p_goal]
        states = [(cell, collected, opened) for collected in powerset(self._keys) for opened in powerset(self._doors)]
        return sorted(state for state in states if self.is_valid_state(state))

    def heuristic(self, p_state, p_target):
        return grid_domain.manhattan_distance(p_state[0], p_target[0])

    def cell_of(self, p_state):
        return p_state[0]

    def state_for_cell(self, p_cell, p_template=None):
        if p_template is None:
            p_template = (p_cell, (), ())

        state = (p_cell, p_template[1], p_template[2])
        return state if self.is_valid_state(state) else None

    def inventory_template(self, p_holding="", p_opened=()):
        """Returns a state (positioned on the first entryway) with the given keys held and doors opened."""

        opened = tuple(sorted(p_opened))
        needed = collections.Counter(p_holding)
        needed.update(self._doors[cell] for cell in opened if cell in self._doors)
        collected = []

        for color, count in sorted(needed.items()):
            candidates = sorted(cell for cell, key_color in self._keys.items() if key_color == color)

            if len(candidates) < count:
                fmt = "inventory needs {count} key(s) of color '{color}' but the map has {available}"
                raise ValueError(fmt.format(count=count, color=color, available=len(candidates)))

            collected.extend(candidates[:count])

        cell = self._entryways[0] if len(self._entryways) > 0 else self._start_prior.support[0][0]
        return cell, tuple(sorted(collected)), opened

    def _has_duplicate_key_colors(self):
        return len(set(self._keys.values())) < len(self._keys)

    def parse_state(self, p_text):
        fields = p_text.split(FIELD_SEPARATOR)

        try:
            cell = tools.parse_cell(fields[0])
            holding = ""
            opened = ()
            collected = None

            for field in fields[1:]:
                if field.strip() == "":
                    continue

                name, _, value = field.partition("=")
                name = name.strip()

                if name == FIELD_HOLDING:
                    holding = value.strip()

                elif name == FIELD_OPENED:
                    opened = parse_cell_set(value)

                elif name == FIELD_COLLECTED:
                    collected = parse_cell_set(value)

                else:
                    raise ValueError("unknown field '{name}'".format(name=name))

            if any(door_cell not in self._doors for door_cell in opened):
                raise ValueError("opened cell is not a door")

            if collected is None:
                _, collected, opened = self.inventory_template(p_holding=holding, p_opened=opened)

        except ValueError as e:
            raise exceptions.InvalidSnapshotException(p_snapshot=p_text, p_reason=str(e))

        state = (cell, collected, opened)

        if not self.is_valid_state(state):
            raise exceptions.InvalidSnapshotException(
                p_snapshot=p_text, p_reason="not a valid combination of position, keys and doors")

        return state

    def format_state(self, p_state):
        cell, collected, opened = p_state
        held = self.held_keys(p_state)
        holding = "".join(sorted(color * count for color, count in held.items() if count > 0))
        fields = [tools.format_cell(cell), "%s=%s" % (FIELD_HOLDING, holding)]

        if len(opened) > 0:
            fields.append("%s=%s" % (FIELD_OPENED, format_cell_set(opened)))

        if self._has_duplicate_key_colors():
            fields.append("%s=%s" % (FIELD_COLLECTED, format_cell_set(collected)))

        return FIELD_SEPARATOR.join(fields)

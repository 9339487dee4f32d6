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

"""Word blocks: letter blocks are picked and placed until some stack spells the goal word.

A configuration is the sorted tuple of its stacks, each stack a string read bottom to top. Stacks
stand on the table in no particular order and there are at most ``slots`` of them.
"""

from snapshot_inference import exceptions
from snapshot_inference import mdp

PRIOR_UNIFORM_SCATTER = "uniform_scatter"
PRIOR_EXPLICIT = "explicit"
PRIOR_ANYWHERE = "anywhere"
PRIORS = [PRIOR_UNIFORM_SCATTER, PRIOR_EXPLICIT, PRIOR_ANYWHERE]

STACK_SEPARATOR = "/"
TABLE = "table"


def normalize(p_stacks):
    return tuple(sorted(stack for stack in p_stacks if stack != ""))


def below_map(p_state):
    """Maps every block to the block underneath it (None for blocks standing on the table)."""

    result = {}

    for stack in p_state:
        for index, letter in enumerate(stack):
            result[letter] = stack[index - 1] if index > 0 else None

    return result


def moved_block(p_state, p_next_state):
    before = below_map(p_state)
    after = below_map(p_next_state)
    changed = [letter for letter in before if before[letter] != after.get(letter)]

    return changed[0] if len(changed) == 1 else None


def touched_blocks(p_trace):
    touched = set()

    for state, next_state in zip(p_trace, p_trace[1:]):
        letter = moved_block(state, next_state)

        if letter is not None:
            touched.add(letter)

    return touched


class BlocksDomain(mdp.DomainModel):

    def __init__(self, p_name, p_letters, p_slots, p_dictionary, p_prior=PRIOR_UNIFORM_SCATTER, p_starts=None):

        super().__init__(p_name=p_name)

        self._letters = "".join(sorted(p_letters))
        self._slots = p_slots
        self._dictionary = sorted(p_dictionary)
        self._prior = p_prior

        if len(set(self._letters)) != len(self._letters):
            raise ValueError("Block letters must be distinct")

        if p_slots < 1:
            raise ValueError("At least one table slot is required")

        if p_prior not in PRIORS:
            raise ValueError("Unknown blocks prior '{prior}'".format(prior=p_prior))

        for word in self._dictionary:
            if not self.is_spellable(word):
                raise ValueError("Word '{word}' cannot be spelled from the blocks '{letters}'".format(
                    word=word, letters=self._letters))

        if p_prior == PRIOR_UNIFORM_SCATTER:
            if p_slots < len(self._letters):
                fmt = "Scattering {count} blocks needs at least {count} slots"
                raise ValueError(fmt.format(count=len(self._letters)))

            starts = [normalize(tuple(self._letters))]

        elif p_prior == PRIOR_EXPLICIT:
            if not p_starts:
                raise ValueError("Explicit blocks prior without start configurations")

            starts = [normalize(start) for start in p_starts]

            for start in starts:
                if not self.is_valid_state(start):
                    fmt = "Start configuration '{start}' is not valid"
                    raise ValueError(fmt.format(start=self.format_state(start)))

        else:
            starts = [state for state in self.enumerate_states()
                      if not any(self.is_end_state(p_state=state, p_goal=word) for word in self._dictionary)]

        self._start_prior = mdp.StartPrior.uniform(starts)
        self.validate_start_prior()

    @property
    def letters(self):
        return self._letters

    @property
    def slots(self):
        return self._slots

    def is_spellable(self, p_word):
        return len(p_word) > 0 and len(set(p_word)) == len(p_word) and set(p_word) <= set(self._letters)

    def goals(self):
        return list(self._dictionary)

    def start_prior(self):
        return self._start_prior

    def is_valid_state(self, p_state):
        if not isinstance(p_state, tuple) or len(p_state) > self._slots:
            return False

        if any(not isinstance(stack, str) or stack == "" for stack in p_state):
            return False

        return p_state == normalize(p_state) and "".join(sorted("".join(p_state))) == self._letters

    def is_end_state(self, p_state, p_goal):
        return p_goal in p_state

    def successors(self, p_state, p_goal):
        if self.is_end_state(p_state=p_state, p_goal=p_goal):
            return []

        entries = []

        for index, stack in enumerate(p_state):
            letter = stack[-1]
            rest = p_state[:index] + p_state[index + 1:]

            if len(stack) > 1 and len(p_state) < self._slots:
                next_state = normalize(rest + (stack[:-1], letter))
                entries.append(mdp.TransitionEntry(next_state=next_state,
                                                   action="move %s to %s" % (letter, TABLE)))

            for other_index, other in enumerate(p_state):
                if other_index == index:
                    continue

                stacks = list(p_state)
                stacks[index] = stack[:-1]
                stacks[other_index] = other + letter
                entries.append(mdp.TransitionEntry(next_state=normalize(stacks),
                                                   action="move %s onto %s" % (letter, other[-1])))

        return sorted(entries, key=lambda entry: (entry.next_state, entry.action))

    def predecessors(self, p_state, p_goal):
        candidates = set()

        for index, stack in enumerate(p_state):
            letter = stack[-1]
            rest = list(p_state[:index] + p_state[index + 1:])
            remainder = stack[:-1]

            if remainder != "":
                # the block came from the table
                candidates.add(normalize(rest + [remainder, letter]))

            for other_index, other in enumerate(rest):
                stacks = list(rest)
                stacks[other_index] = other + letter
                candidates.add(normalize(stacks + [remainder]))

        result = []

        for prev in sorted(candidates):
            if not self.is_valid_state(prev) or self.is_end_state(p_state=prev, p_goal=p_goal):
                continue

            for entry in self.successors(p_state=prev, p_goal=p_goal):
                if entry.next_state == p_state:
                    result.append((prev, entry.action))

        return sorted(result)

    def enumerate_states(self):
        configurations = [()]

        for letter in self._letters:
            extended = []

            for config in configurations:
                extended.append(config + (letter,))

                for index, stack in enumerate(config):
                    for position in range(len(stack) + 1):
                        stacks = list(config)
                        stacks[index] = stack[:position] + letter + stack[position:]
                        extended.append(tuple(stacks))

            configurations = extended

        return sorted(set(normalize(config) for config in configurations if len(config) <= self._slots))

    def heuristic(self, p_state, p_target):
        before = below_map(p_state)
        target = below_map(p_target)
        return sum(1 for letter in before if before[letter] != target[letter])

    def parse_state(self, p_text):
        state = normalize(part.strip().upper() for part in p_text.split(STACK_SEPARATOR))

        if not self.is_valid_state(state):
            fmt = "must use each of the blocks '{letters}' exactly once in at most {slots} stacks"
            raise exceptions.InvalidSnapshotException(p_snapshot=p_text,
                                                      p_reason=fmt.format(letters=self._letters, slots=self._slots))

        return state

    def format_state(self, p_state):
        return STACK_SEPARATOR.join(p_state)

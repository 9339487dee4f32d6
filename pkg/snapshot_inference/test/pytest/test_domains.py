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

import numpy as np
import pytest

from snapshot_inference import blocks_domain
from snapshot_inference import chain_domain
from snapshot_inference import domain_parser
from snapshot_inference import exceptions
from snapshot_inference import grid_domain
from snapshot_inference import mdp

KEYS_START = ((7, 3), (), ())
GREEN_KEY = (4, 1)
PINK_KEY = (4, 6)
GREEN_DOOR = (2, 0)
PINK_DOOR = (2, 7)


def load(p_name):
    return domain_parser.load_domain(domain_parser.get_fixture_path(p_name))


def check_predecessors_invert_successors(p_domain, p_states):
    for goal in p_domain.goals():
        for state in p_states:
            for next_state in p_domain.successor_states(p_state=state, p_goal=goal):
                assert state in p_domain.predecessor_states(p_state=next_state, p_goal=goal)

            for prev in p_domain.predecessor_states(p_state=state, p_goal=goal):
                assert state in p_domain.successor_states(p_state=prev, p_goal=goal)


def test_start_prior():
    prior = mdp.StartPrior({"a": 0.25, "b": 0.75, "c": 0.0})

    assert ["a", "b"] == prior.support
    assert 0.75 == prior.probability("b")
    assert 0.0 == prior.probability("c")

    rng = np.random.default_rng(1)
    draws = [prior.sample(rng) for _ in range(2000)]

    assert set(draws) == {"a", "b"}
    assert 0.7 < draws.count("b") / len(draws) < 0.8


def test_start_prior_invalid():
    with pytest.raises(ValueError):
        mdp.StartPrior({})

    with pytest.raises(ValueError):
        mdp.StartPrior({"a": 0.5})

    with pytest.raises(ValueError):
        mdp.StartPrior({"a": 1.5, "b": -0.5})


def test_chain_dynamics():
    domain = load("chain.dom")

    assert ["a"] == domain.goals()
    assert [0, 1, 2] == domain.start_prior().support
    assert [2] == domain.successor_states(p_state=1, p_goal="a")
    assert [] == domain.successors(p_state=3, p_goal="a")
    assert [(0, "right")] == domain.predecessors(p_state=1, p_goal="a")
    assert [] == domain.predecessors(p_state=0, p_goal="a")
    assert 2 == domain.heuristic(1, 3)


def test_chain_twin_excludes_end_state_predecessors():
    domain = load("chain_twin.dom")

    assert ["a", "b"] == domain.goals()
    # 0 is the end state of goal b, so it cannot precede 1 on the way to b
    assert [2] == domain.predecessor_states(p_state=1, p_goal="b")
    assert [0, 2] == domain.predecessor_states(p_state=1, p_goal="a")
    check_predecessors_invert_successors(domain, domain.enumerate_states())


def test_chain_invalid():
    with pytest.raises(ValueError):
        chain_domain.ChainDomain(p_name="x", p_length=3, p_goals={"a": 5}, p_starts=[0])

    with pytest.raises(ValueError):
        # start on the goal
        chain_domain.ChainDomain(p_name="x", p_length=3, p_goals={"a": 2}, p_starts=[2])

    domain = load("chain.dom")

    with pytest.raises(exceptions.InvalidSnapshotException):
        domain.parse_state("one")


def test_grid_4x4():
    domain = load("grid_4x4.dom")

    assert ["a"] == domain.goals()
    assert [(0, 0), (0, 1), (0, 2), (0, 3)] == domain.start_prior().support
    assert [(0, 1), (1, 0)] == domain.successor_states(p_state=(0, 0), p_goal="a")
    assert [] == domain.successors(p_state=(3, 3), p_goal="a")
    assert 6 == domain.heuristic((0, 0), (3, 3))
    assert [(3, 3)] == domain.goal_states("a")
    check_predecessors_invert_successors(domain, domain.enumerate_states())


def test_grid_two_doors():
    domain = load("grid_two_doors.dom")

    assert ["b", "g", "r"] == domain.goals()
    assert [(6, 0), (6, 6)] == domain.start_prior().support
    assert domain.is_wall((2, 1))
    assert not domain.is_valid_state((2, 3))
    assert (1, 1) not in domain.successor_states(p_state=(3, 1), p_goal="g")
    assert 46 == len(domain.enumerate_states())
    check_predecessors_invert_successors(domain, domain.enumerate_states())


def test_grid_anywhere_excludes_gems():
    domain = load("grid_anywhere.dom")
    support = domain.start_prior().support

    assert 43 == len(support)
    assert (5, 3) not in support
    assert (0, 0) not in support
    assert (2, 1) not in support


def test_grid_parse_and_format():
    domain = load("grid_two_doors.dom")

    assert (3, 4) == domain.parse_state("3,4")
    assert "3,4" == domain.format_state((3, 4))

    for text in ["2,1", "9,9", "north"]:
        with pytest.raises(exceptions.InvalidSnapshotException):
            domain.parse_state(text)


def test_grid_invalid():
    with pytest.raises(ValueError):
        grid_domain.GridDomain(p_name="x", p_width=2, p_height=1, p_walls=[], p_gems={"a": (0, 1)},
                               p_entryways=[])

    with pytest.raises(ValueError):
        grid_domain.GridDomain(p_name="x", p_width=2, p_height=1, p_walls=[(0, 1)], p_gems={"a": (0, 1)},
                               p_entryways=[(0, 0)])


def test_keys_start_and_goals():
    domain = load("keys.dom")

    assert ["b", "r", "y"] == domain.goals()
    assert [KEYS_START, ((7, 4), (), ())] == domain.start_prior().support
    assert {GREEN_KEY: "G", PINK_KEY: "P"} == domain.keys
    assert {GREEN_DOOR: "G", PINK_DOOR: "P"} == domain.doors


def test_keys_pickup():
    domain = load("keys.dom")
    state = (GREEN_KEY, (), ())
    entries = domain.successors(p_state=state, p_goal="b")

    pickups = [entry for entry in entries if entry.action == "pickup"]
    assert [(GREEN_KEY, (GREEN_KEY,), ())] == [entry.next_state for entry in pickups]
    assert 1 == domain.held_keys((GREEN_KEY, (GREEN_KEY,), ()))["G"]


def test_keys_doors_need_keys():
    domain = load("keys.dom")
    below_door = (3, 0)

    without_key = domain.successor_states(p_state=(below_door, (), ()), p_goal="b")
    assert all(state[0] != GREEN_DOOR for state in without_key)

    with_key = domain.successor_states(p_state=(below_door, (GREEN_KEY,), ()), p_goal="b")
    opened = (GREEN_DOOR, (GREEN_KEY,), (GREEN_DOOR,))
    assert opened in with_key
    assert 0 == domain.held_keys(opened)["G"]

    # the pink key does not open the green door
    with_pink = domain.successor_states(p_state=(below_door, (PINK_KEY,), ()), p_goal="b")
    assert all(state[0] != GREEN_DOOR for state in with_pink)


def test_keys_validity():
    domain = load("keys.dom")

    assert domain.is_valid_state(KEYS_START)
    assert not domain.is_valid_state((GREEN_DOOR, (), ()))
    # an opened door without a collected key of its color
    assert not domain.is_valid_state(((3, 0), (), (GREEN_DOOR,)))
    assert not domain.is_valid_state(((0, 2), (), ()))


def test_keys_predecessors_invert_successors():
    domain = load("keys.dom")
    states = domain.enumerate_states()

    assert KEYS_START in states
    check_predecessors_invert_successors(domain, states)


def test_keys_parse_and_format():
    domain = load("keys.dom")

    assert (PINK_KEY, (PINK_KEY,), ()) == domain.parse_state("4,6;holding=P")
    assert "4,6;holding=P" == domain.format_state((PINK_KEY, (PINK_KEY,), ()))

    state = domain.parse_state("2,7;holding=;opened=2,7")
    assert (PINK_DOOR, (PINK_KEY,), (PINK_DOOR,)) == state
    assert "2,7;holding=;opened=2,7" == domain.format_state(state)

    assert "7,3;holding=" == domain.format_state(KEYS_START)


def test_keys_parse_invalid():
    domain = load("keys.dom")

    for text in ["2,0", "3,3;holding=GG", "3,3;opened=3,3", "3,3;colour=G"]:
        with pytest.raises(exceptions.InvalidSnapshotException):
            domain.parse_state(text)


def test_keys_inventory_template():
    domain = load("keys.dom")

    assert ((7, 3), (GREEN_KEY, PINK_KEY), ()) == domain.inventory_template(p_holding="PG")

    with pytest.raises(ValueError):
        domain.inventory_template(p_holding="X")


def test_blocks_micro():
    domain = load("blocks_micro.dom")

    assert ["AB", "BC"] == domain.goals()
    assert [("A", "B", "C")] == domain.start_prior().support
    assert 13 == len(domain.enumerate_states())
    assert domain.is_end_state(p_state=("AB", "C"), p_goal="AB")
    assert not domain.is_end_state(p_state=("BA", "C"), p_goal="AB")
    # 'AB' must be a whole stack read bottom to top
    assert not domain.is_end_state(p_state=("ABC",), p_goal="AB")


def test_blocks_successors():
    domain = load("blocks_micro.dom")
    successors = domain.successors(p_state=("A", "B", "C"), p_goal="AB")

    assert 6 == len(successors)
    assert all("onto" in entry.action for entry in successors)
    assert [("A", "BC")] == [entry.next_state for entry in successors if entry.action == "move C onto B"]

    successors = domain.successor_states(p_state=("AB", "C"), p_goal="BC")
    assert ("A", "B", "C") in successors
    assert ("ABC",) in successors


def test_blocks_slots_limit_table_moves():
    domain = blocks_domain.BlocksDomain(p_name="x", p_letters="ABC", p_slots=2, p_dictionary=["CA"],
                                        p_prior=blocks_domain.PRIOR_EXPLICIT, p_starts=[("AB", "C")])

    assert ("A", "B", "C") not in domain.successor_states(p_state=("AB", "C"), p_goal="CA")
    assert all(len(state) <= 2 for state in domain.enumerate_states())


def test_blocks_predecessors_invert_successors():
    domain = load("blocks_micro.dom")
    check_predecessors_invert_successors(domain, domain.enumerate_states())


def test_blocks_helpers():
    assert ("AB", "C") == blocks_domain.normalize(["C", "", "AB"])
    assert {"A": None, "B": "A", "C": None} == blocks_domain.below_map(("AB", "C"))
    assert "B" == blocks_domain.moved_block(("A", "B", "C"), ("AB", "C"))
    assert blocks_domain.moved_block(("A", "B", "C"), ("A", "B", "C")) is None
    assert {"B", "C"} == blocks_domain.touched_blocks([("A", "B", "C"), ("AB", "C"), ("ABC",)])


def test_blocks_heuristic():
    domain = load("blocks_micro.dom")

    assert 1 == domain.heuristic(("A", "B", "C"), ("AB", "C"))
    assert 0 == domain.heuristic(("AB", "C"), ("AB", "C"))


def test_blocks_parse_and_format():
    domain = load("blocks_micro.dom")

    assert ("AB", "C") == domain.parse_state("c/ab")
    assert "AB/C" == domain.format_state(("AB", "C"))

    for text in ["AB", "AB/C/D", "AA/BC"]:
        with pytest.raises(exceptions.InvalidSnapshotException):
            domain.parse_state(text)


def test_blocks_anywhere_prior():
    domain = blocks_domain.BlocksDomain(p_name="x", p_letters="ABC", p_slots=3, p_dictionary=["AB", "BC"],
                                        p_prior=blocks_domain.PRIOR_ANYWHERE)
    support = domain.start_prior().support

    # every configuration in which no stack spells a word
    assert 13 - 2 == len(support)
    assert ("AB", "C") not in support
    assert ("ABC",) in support


def test_blocks_invalid():
    with pytest.raises(ValueError):
        blocks_domain.BlocksDomain(p_name="x", p_letters="AB", p_slots=2, p_dictionary=["ABA"])

    with pytest.raises(ValueError):
        blocks_domain.BlocksDomain(p_name="x", p_letters="ABC", p_slots=2, p_dictionary=["AB"])


def test_non_enumerable_domain():
    class Opaque(chain_domain.ChainDomain):
        is_enumerable = False

        def enumerate_states(self):
            return mdp.DomainModel.enumerate_states(self)

    domain = Opaque(p_name="opaque", p_length=3, p_goals={"a": 2}, p_starts=[0])

    with pytest.raises(exceptions.UnsupportedModeException):
        domain.enumerate_states()

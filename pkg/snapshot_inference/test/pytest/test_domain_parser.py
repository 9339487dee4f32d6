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

import pytest

from snapshot_inference import blocks_domain
from snapshot_inference import chain_domain
from snapshot_inference import configuration
from snapshot_inference import domain_parser
from snapshot_inference import exceptions
from snapshot_inference import grid_domain
from snapshot_inference import keys_domain

FIXTURES = {
    "grid_two_doors.dom": grid_domain.GridDomain,
    "grid_anywhere.dom": grid_domain.GridDomain,
    "grid_4x4.dom": grid_domain.GridDomain,
    "keys.dom": keys_domain.KeysDomain,
    "blocks.dom": blocks_domain.BlocksDomain,
    "blocks_micro.dom": blocks_domain.BlocksDomain,
    "chain.dom": chain_domain.ChainDomain,
    "chain_twin.dom": chain_domain.ChainDomain,
}

GRID_HEADER = "!options\nkind = grid\n!map\n"
KEYS_HEADER = "!options\nkind = keys\n!map\n"


def parse(p_text):
    return domain_parser.parse_domain_file(p_text=p_text, p_default_name="test")


def parse_error(p_text):
    with pytest.raises(exceptions.DomainParseException) as e:
        parse(p_text)

    return e.value


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixtures_parse(name):
    domain = domain_parser.load_domain(domain_parser.get_fixture_path(name))

    assert isinstance(domain, FIXTURES[name])
    assert len(domain.goals()) > 0


def test_grid_with_comments_and_gem_annotation():
    domain = parse("; comment\n!options\nkind = grid   ; trailing\nname = small\n!map\n@...\n.#..\n!gems\nq 1,3\n")

    assert "small" == domain.name
    assert ["q"] == domain.goals()
    assert (1, 3) == domain.goal_cells()["q"]
    assert domain.is_wall((1, 1))


def test_default_name():
    assert "test" == parse(GRID_HEADER + "@..a\n").name


def test_keys_door_annotations():
    domain = parse(KEYS_HEADER + "a+G@\n!doors\n[G] 0,1\n")

    assert {(0, 1): "G"} == domain.doors
    assert {(0, 2): "G"} == domain.keys


def test_blocks_options():
    domain = parse("!options\nkind = blocks\nletters = A, B, C\nslots = 3\ndictionary = ab, bc\n")

    assert "ABC" == domain.letters
    assert ["AB", "BC"] == domain.goals()


def test_blocks_explicit_starts():
    domain = parse("!options\nkind = blocks\nletters = A B C\ndictionary = AB\nprior = explicit\n!starts\nba/c\n")

    assert [("BA", "C")] == domain.start_prior().support


def test_unknown_glyph():
    error = parse_error(GRID_HEADER + "@..a\n.?..\n")

    assert 5 == error.line
    assert 2 == error.column
    assert "unknown glyph" in error.message


def test_row_width_mismatch():
    error = parse_error(GRID_HEADER + "@..a\n...\n")

    assert 5 == error.line
    assert 4 == error.column


def test_duplicate_gem():
    error = parse_error(GRID_HEADER + "@.aa\n")

    assert 4 == error.line
    assert 4 == error.column
    assert "duplicate gem" in error.message


def test_gem_annotation_on_wall():
    error = parse_error(GRID_HEADER + "@.#a\n!gems\nb 0,2\n")

    assert 6 == error.line
    assert "wall" in error.message


def test_door_without_annotation():
    error = parse_error(KEYS_HEADER + "a.+G@\n")

    assert 4 == error.line
    assert 3 == error.column


def test_annotation_without_door():
    error = parse_error(KEYS_HEADER + "a.+G@\n!doors\n[G] 0,2\n[G] 0,1\n")

    assert 7 == error.line
    assert "no door" in error.message


def test_doors_in_grid_domain():
    error = parse_error(GRID_HEADER + "@..a\n!doors\n[G] 0,1\n")

    assert 6 == error.line


def test_unspellable_word():
    error = parse_error("!options\nkind = blocks\nletters = A B C\ndictionary = AB XY\n")

    assert 4 == error.line
    assert 17 == error.column
    assert "XY" in error.message


def test_starts_require_explicit_prior():
    error = parse_error("!options\nkind = blocks\nletters = A B C\ndictionary = AB\n!starts\nA/B/C\n")

    assert 6 == error.line


def test_unknown_kind():
    error = parse_error("!options\nkind = maze\n")

    assert 2 == error.line


def test_missing_kind():
    error = parse_error("!options\nname = x\n")

    assert error.line is None
    assert "kind" in str(error)


def test_option_not_valid_for_kind():
    error = parse_error("!options\nkind = grid\nmoves = both\n!map\n@..a\n")

    assert 3 == error.line


def test_unknown_section_and_orphan_content():
    assert 1 == parse_error("!legend\n").line
    assert 1 == parse_error("kind = grid\n").line


def test_missing_gems_and_entryways():
    assert "no gems" in parse_error(GRID_HEADER + "@...\n").message
    assert "entryways" in parse_error(GRID_HEADER + "...a\n").message


def test_chain_options():
    domain = parse("!options\nkind = chain\nlength = 5\nmoves = both\ngoals = a:4 b:0\nstarts = 2\n")

    assert ["a", "b"] == domain.goals()
    assert [2] == domain.start_prior().support

    error = parse_error("!options\nkind = chain\nlength = 5\ngoals = a-4\nstarts = 2\n")
    assert 4 == error.line


def test_load_domain_reports_source(tmp_path):
    filename = tmp_path / "broken.dom"
    filename.write_text("!options\nkind = maze\n", encoding="UTF-8")

    with pytest.raises(exceptions.DomainParseException) as e:
        domain_parser.load_domain(str(filename))

    assert str(e.value).startswith(str(filename) + ": line 2")


def test_load_domain_missing_file(tmp_path):
    with pytest.raises(configuration.ConfigurationException):
        domain_parser.load_domain(str(tmp_path / "missing.dom"))

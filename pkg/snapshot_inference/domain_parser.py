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

"""Parser of the plain-text domain files.

A domain file consists of sections introduced by ``!name`` lines; lines starting with ``;`` are
comments::

    !options
    kind = keys            ; grid | keys | blocks | chain
    name = doors and keys
    start = entryways      ; entryways | anywhere (grid and keys)
    !map
    b.#..#.r               ; '#' wall, '.' floor, 'a'-'z' gem, 'A'-'Z' key, '+' door, '@' entryway
    !doors
    [G] 2,0                ; color of the door at row 2, column 0
    !gems
    y 6,6                  ; gem placed by coordinate
    !starts
    ST/A/R/P/E             ; explicit start configurations of a blocks domain

Blocks domains use the options ``letters``, ``slots``, ``dictionary`` and ``prior``; chain domains
use ``length``, ``moves``, ``goals`` (``a:3 b:0``) and ``starts`` (``0 1 2``).
"""

import os
import re

from snapshot_inference import blocks_domain
from snapshot_inference import chain_domain
from snapshot_inference import configuration
from snapshot_inference import exceptions
from snapshot_inference import grid_domain
from snapshot_inference import keys_domain
from snapshot_inference import log_handling
from snapshot_inference import settings
from snapshot_inference import tools

COMMENT_PREFIX = ";"
SECTION_PREFIX = "!"

SECTION_OPTIONS = "options"
SECTION_MAP = "map"
SECTION_DOORS = "doors"
SECTION_GEMS = "gems"
SECTION_STARTS = "starts"
SECTIONS = [SECTION_OPTIONS, SECTION_MAP, SECTION_DOORS, SECTION_GEMS, SECTION_STARTS]

KIND_GRID = "grid"
KIND_KEYS = "keys"
KIND_BLOCKS = "blocks"
KIND_CHAIN = "chain"
KINDS = [KIND_GRID, KIND_KEYS, KIND_BLOCKS, KIND_CHAIN]

VALID_OPTIONS = {
    KIND_GRID: ["kind", "name", "start"],
    KIND_KEYS: ["kind", "name", "start"],
    KIND_BLOCKS: ["kind", "name", "letters", "slots", "dictionary", "prior"],
    KIND_CHAIN: ["kind", "name", "length", "moves", "goals", "starts"],
}

GLYPH_WALL = "#"
GLYPH_FLOOR = "."
GLYPH_DOOR = "+"
GLYPH_ENTRYWAY = "@"

REGEX_OPTION = re.compile(r"^([a-z_]+)\s*=\s*(.*)$")
REGEX_DOOR_ANNOTATION = re.compile(r"^\[([A-Z])\]\s+(.+)$")
REGEX_GEM_ANNOTATION = re.compile(r"^([a-z])\s+(.+)$")
REGEX_CHAIN_GOAL = re.compile(r"^([a-z]+):([0-9]+)$")
REGEX_WORD_SEPARATOR = re.compile(r"[\s,]+")

DOMAIN_FILE_EXTENSION = ".dom"


def strip_comment(p_line):
    index = p_line.find(COMMENT_PREFIX)
    return p_line if index < 0 else p_line[:index]


class Line(object):

    def __init__(self, p_number, p_text, p_column=1):
        self.number = p_number
        self.text = p_text
        self.column = p_column

    def error(self, p_message, p_offset=0):
        return exceptions.DomainParseException(p_message=p_message, p_line=self.number,
                                               p_column=self.column + p_offset)


class DomainParser(object):

    def __init__(self):
        self._logger = log_handling.get_logger(self.__class__.__name__)

    def parse(self, p_text, p_default_name="domain"):

        sections = self._split_sections(p_text)
        options = self._parse_options(sections.get(SECTION_OPTIONS, []))

        kind, kind_line = options.get("kind", (None, None))

        if kind is None:
            raise exceptions.DomainParseException(p_message="option 'kind' is missing")

        if kind not in KINDS:
            raise kind_line.error("unknown domain kind '{kind}'".format(kind=kind))

        for name, (_value, line) in options.items():
            if name not in VALID_OPTIONS[kind]:
                raise line.error("option '{name}' is not valid for {kind} domains".format(name=name, kind=kind))

        name = options.get("name", (p_default_name, None))[0]

        try:
            if kind in (KIND_GRID, KIND_KEYS):
                domain = self._build_grid_like(p_kind=kind, p_name=name, p_options=options, p_sections=sections)

            elif kind == KIND_BLOCKS:
                domain = self._build_blocks(p_name=name, p_options=options, p_sections=sections)

            else:
                domain = self._build_chain(p_name=name, p_options=options, p_sections=sections)

        except ValueError as e:
            raise exceptions.DomainParseException(p_message=str(e))

        fmt = "Parsed {kind} domain '{name}' with goals {goals}"
        self._logger.debug(fmt.format(kind=kind, name=name, goals=", ".join(domain.goals())))

        return domain

    def _split_sections(self, p_text):

        sections = {}
        current = None

        for number, raw_line in enumerate(p_text.splitlines(), start=1):
            text = strip_comment(raw_line).rstrip()

            if text.strip() == "":
                continue

            if text.startswith(SECTION_PREFIX):
                section_name = text[1:].strip()

                if section_name not in SECTIONS:
                    raise exceptions.DomainParseException(
                        p_message="unknown section '{name}'".format(name=section_name), p_line=number, p_column=1)

                if section_name in sections:
                    raise exceptions.DomainParseException(
                        p_message="duplicate section '{name}'".format(name=section_name), p_line=number, p_column=1)

                current = sections.setdefault(section_name, [])
                continue

            if current is None:
                raise exceptions.DomainParseException(p_message="content outside of a section",
                                                      p_line=number, p_column=1)

            if current is sections.get(SECTION_MAP):
                current.append(Line(p_number=number, p_text=text))

            else:
                stripped = text.lstrip()
                current.append(Line(p_number=number, p_text=stripped.rstrip(),
                                    p_column=len(text) - len(stripped) + 1))

        return sections

    def _parse_options(self, p_lines):

        options = {}

        for line in p_lines:
            match = REGEX_OPTION.match(line.text)

            if match is None:
                raise line.error("expected 'option = value'")

            name = match.group(1)

            if name in options:
                raise line.error("duplicate option '{name}'".format(name=name))

            options[name] = (match.group(2).strip(), line)

        return options

    def _build_grid_like(self, p_kind, p_name, p_options, p_sections):

        map_lines = p_sections.get(SECTION_MAP)

        if not map_lines:
            raise exceptions.DomainParseException(p_message="section '!map' is missing or empty")

        walls = set()
        gems = {}
        keys = {}
        door_cells = {}
        entryways = []
        width = len(map_lines[0].text)

        for row, line in enumerate(map_lines):
            if len(line.text) != width:
                raise line.error("map row has {found} cells instead of {width}".format(found=len(line.text),
                                                                                      width=width),
                                 p_offset=min(len(line.text), width))

            for col, glyph in enumerate(line.text):
                cell = (row, col)

                if glyph == GLYPH_WALL:
                    walls.add(cell)

                elif glyph == GLYPH_FLOOR:
                    pass

                elif glyph == GLYPH_ENTRYWAY:
                    entryways.append(cell)

                elif "a" <= glyph <= "z":
                    if glyph in gems:
                        raise line.error("duplicate gem '{gem}'".format(gem=glyph), p_offset=col)

                    gems[glyph] = cell

                elif "A" <= glyph <= "Z" and p_kind == KIND_KEYS:
                    keys[cell] = glyph

                elif glyph == GLYPH_DOOR and p_kind == KIND_KEYS:
                    door_cells[cell] = line.column + col

                else:
                    raise line.error("unknown glyph '{glyph}'".format(glyph=glyph), p_offset=col)

        height = len(map_lines)

        for line in p_sections.get(SECTION_GEMS, []):
            match = REGEX_GEM_ANNOTATION.match(line.text)

            if match is None:
                raise line.error("expected gem annotation 'x row,col'")

            cell = self._parse_annotation_cell(p_line=line, p_text=match.group(2), p_width=width, p_height=height)
            gem = match.group(1)

            if gem in gems:
                raise line.error("duplicate gem '{gem}'".format(gem=gem))

            if cell in walls:
                raise line.error("gem '{gem}' lies on a wall".format(gem=gem))

            if cell in door_cells or cell in keys or cell in gems.values():
                raise line.error("gem '{gem}' lies on an occupied cell".format(gem=gem))

            gems[gem] = cell

        doors = {}

        for line in p_sections.get(SECTION_DOORS, []):
            if p_kind != KIND_KEYS:
                raise line.error("doors are only valid in keys domains")

            match = REGEX_DOOR_ANNOTATION.match(line.text)

            if match is None:
                raise line.error("expected door annotation '[C] row,col'")

            cell = self._parse_annotation_cell(p_line=line, p_text=match.group(2), p_width=width, p_height=height)

            if cell not in door_cells:
                raise line.error("no door at {cell}".format(cell=tools.format_cell(cell)))

            if cell in doors:
                raise line.error("duplicate door annotation for {cell}".format(cell=tools.format_cell(cell)))

            doors[cell] = match.group(1)

        for cell, column in sorted(door_cells.items()):
            if cell not in doors:
                raise exceptions.DomainParseException(p_message="door without color annotation",
                                                      p_line=map_lines[cell[0]].number, p_column=column)

        if len(gems) == 0:
            raise exceptions.DomainParseException(p_message="the domain has no gems")

        start_mode, start_line = p_options.get("start", (grid_domain.START_MODE_ENTRYWAYS, None))

        if start_mode not in grid_domain.START_MODES:
            raise start_line.error("start must be one of {modes}".format(modes=", ".join(grid_domain.START_MODES)))

        if p_kind == KIND_GRID:
            return grid_domain.GridDomain(p_name=p_name, p_width=width, p_height=height, p_walls=walls, p_gems=gems,
                                          p_entryways=entryways, p_start_mode=start_mode)

        return keys_domain.KeysDomain(p_name=p_name, p_width=width, p_height=height, p_walls=walls, p_gems=gems,
                                      p_keys=keys, p_doors=doors, p_entryways=entryways, p_start_mode=start_mode)

    @staticmethod
    def _parse_annotation_cell(p_line, p_text, p_width, p_height):

        try:
            cell = tools.parse_cell(p_text)

        except ValueError as e:
            raise p_line.error(str(e))

        if not (0 <= cell[0] < p_height and 0 <= cell[1] < p_width):
            raise p_line.error("cell {cell} lies outside the map".format(cell=tools.format_cell(cell)))

        return cell

    @staticmethod
    def _int_option(p_options, p_name, p_default=None):

        value, line = p_options.get(p_name, (None, None))

        if value is None:
            if p_default is None:
                raise exceptions.DomainParseException(p_message="option '{name}' is missing".format(name=p_name))

            return p_default

        try:
            return int(value)

        except ValueError:
            raise line.error("option '{name}' must be an integer".format(name=p_name))

    def _build_blocks(self, p_name, p_options, p_sections):

        letters_text, letters_line = p_options.get("letters", (None, None))

        if letters_text is None:
            raise exceptions.DomainParseException(p_message="option 'letters' is missing")

        letters = "".join(REGEX_WORD_SEPARATOR.split(letters_text.upper()))

        if len(letters) == 0 or not letters.isalpha() or len(set(letters)) != len(letters):
            raise letters_line.error("letters must be distinct letters")

        slots = self._int_option(p_options, "slots", p_default=len(letters))

        dictionary_text, dictionary_line = p_options.get("dictionary", (None, None))

        if dictionary_text is None:
            raise exceptions.DomainParseException(p_message="option 'dictionary' is missing")

        words = []

        for match in re.finditer(r"[^\s,]+", dictionary_text):
            word = match.group(0).upper()

            if len(set(word)) != len(word) or not set(word) <= set(letters):
                offset = len(dictionary_line.text) - len(dictionary_text) + match.start()
                raise dictionary_line.error("word '{word}' cannot be spelled from the letters '{letters}'".format(
                    word=word, letters=letters), p_offset=offset)

            if word in words:
                raise dictionary_line.error("duplicate word '{word}'".format(word=word))

            words.append(word)

        if len(words) == 0:
            raise dictionary_line.error("the dictionary is empty")

        prior, prior_line = p_options.get("prior", (blocks_domain.PRIOR_UNIFORM_SCATTER, None))

        if prior not in blocks_domain.PRIORS:
            raise prior_line.error("prior must be one of {priors}".format(priors=", ".join(blocks_domain.PRIORS)))

        starts = []

        for line in p_sections.get(SECTION_STARTS, []):
            starts.append(blocks_domain.normalize(part.strip().upper()
                                                  for part in line.text.split(blocks_domain.STACK_SEPARATOR)))

        if len(starts) > 0 and prior != blocks_domain.PRIOR_EXPLICIT:
            raise p_sections[SECTION_STARTS][0].error("start configurations require 'prior = explicit'")

        return blocks_domain.BlocksDomain(p_name=p_name, p_letters=letters, p_slots=slots, p_dictionary=words,
                                          p_prior=prior, p_starts=starts)

    def _build_chain(self, p_name, p_options, p_sections):

        length = self._int_option(p_options, "length")
        moves, moves_line = p_options.get("moves", (chain_domain.MOVES_RIGHT, None))

        if moves not in chain_domain.MOVE_MODES:
            raise moves_line.error("moves must be one of {modes}".format(modes=", ".join(chain_domain.MOVE_MODES)))

        goals_text, goals_line = p_options.get("goals", (None, None))

        if goals_text is None:
            raise exceptions.DomainParseException(p_message="option 'goals' is missing")

        goals = {}

        for part in goals_text.split():
            match = REGEX_CHAIN_GOAL.match(part)

            if match is None:
                raise goals_line.error("goal '{part}' is not formatted as 'label:position'".format(part=part))

            if match.group(1) in goals:
                raise goals_line.error("duplicate goal '{goal}'".format(goal=match.group(1)))

            goals[match.group(1)] = int(match.group(2))

        starts_text, starts_line = p_options.get("starts", (None, None))

        if starts_text is None:
            raise exceptions.DomainParseException(p_message="option 'starts' is missing")

        try:
            starts = [int(part) for part in starts_text.split()]

        except ValueError:
            raise starts_line.error("starts must be a list of positions")

        return chain_domain.ChainDomain(p_name=p_name, p_length=length, p_goals=goals, p_starts=starts,
                                        p_moves=moves)


def parse_domain_file(p_text, p_default_name="domain"):
    return DomainParser().parse(p_text=p_text, p_default_name=p_default_name)


def load_domain(p_filename):

    try:
        with open(p_filename, encoding="UTF-8") as f:
            text = f.read()

    except OSError as e:
        fmt = "Cannot read domain file '{filename}': {msg}"
        raise configuration.ConfigurationException(fmt.format(filename=p_filename, msg=str(e)))

    default_name = os.path.splitext(os.path.basename(p_filename))[0]

    try:
        return parse_domain_file(p_text=text, p_default_name=default_name)

    except exceptions.DomainParseException as e:
        e.source = p_filename
        raise


def get_fixture_path(p_name):
    package_directory = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(package_directory, settings.extended_settings["fixtures_rel_directory"], p_name)

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

import io
import json
import os
import re
import sys
import time
import traceback

from snapshot_inference import configuration

REGEX_CELL = re.compile(r"^\s*(-?[0-9]+)\s*,\s*(-?[0-9]+)\s*$")

CELL_SEPARATOR = ","
CELL_LIST_SEPARATOR = ";"


def parse_cell(p_string):
    match = REGEX_CELL.match(p_string)

    if match is None:
        raise ValueError("Cell '{cell}' is not formatted as 'row,col'".format(cell=p_string))

    return int(match.group(1)), int(match.group(2))


def format_cell(p_cell):
    return "%d%s%d" % (p_cell[0], CELL_SEPARATOR, p_cell[1])


def parse_cell_list(p_string, p_separator=CELL_LIST_SEPARATOR):
    if p_string is None or p_string.strip() == "":
        return []

    return [parse_cell(part) for part in p_string.split(p_separator) if part.strip() != ""]


def read_cell_file(p_filename):
    """Reads an exclusion mask: one 'row,col' cell per line, ';' starts a comment line."""

    cells = []

    with open(p_filename, encoding="UTF-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()

            if line == "" or line.startswith(";"):
                continue

            try:
                cells.append(parse_cell(line))

            except ValueError as e:
                fmt = "Mask file '{filename}' line {line}: {msg}"
                raise configuration.ConfigurationException(
                    fmt.format(filename=p_filename, line=line_number, msg=str(e)))

    return cells


def to_json_string(p_object):
    return json.dumps(p_object, cls=ObjectEncoder, sort_keys=True, indent=2) + "\n"


class ObjectEncoder(json.JSONEncoder):

    def default(self, obj):

        if hasattr(obj, "to_json"):
            return obj.to_json()

        if isinstance(obj, (set, frozenset)):
            return sorted(obj)

        if hasattr(obj, "item"):
            # numpy scalars
            return obj.item()

        return super().default(obj)


def check_config_value(p_config, p_config_attribute_name):
    if getattr(p_config, p_config_attribute_name) is None:
        raise configuration.ConfigurationException(
            "Setting [%s]%s is missing!" % (p_config.section_name, p_config_attribute_name))


def resolve_path(p_filename, p_base_dir):
    if p_filename is None or os.path.isabs(p_filename) or p_base_dir is None:
        return p_filename

    return os.path.join(p_base_dir, p_filename)


def log_stack_trace(p_logger=None):
    (_type, _value, tb) = sys.exc_info()
    string_buffer = io.StringIO()
    traceback.print_tb(tb=tb, file=string_buffer)

    fmt = "Stack trace = %s" % str(string_buffer.getvalue())

    if p_logger is not None:
        p_logger.error(fmt)
    else:
        sys.stderr.write(fmt)


def handle_fatal_exception(p_exception, p_logger=None):
    if p_logger is not None:
        p_logger.fatal(str(p_exception))

    else:
        sys.stderr.write(str(p_exception))


class TimingContext(object):

    def __init__(self, p_result_handler):
        self._result_handler = p_result_handler

    def __enter__(self):
        self._start = time.perf_counter()

    def __exit__(self, type, value, traceback):
        self._end = time.perf_counter()
        self._result_handler(self._end - self._start)

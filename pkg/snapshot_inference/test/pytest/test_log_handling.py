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
import logging

import pytest

from snapshot_inference import log_handling


@pytest.fixture
def run_context():
    context = log_handling.RunLogContextHandler()
    log_handling.register_log_context_handler(context)
    yield context
    log_handling.register_log_context_handler(None)


def make_record():
    return logging.LogRecord(name="test", level=logging.INFO, pathname=__file__, lineno=1,
                             msg="message", args=None, exc_info=None)


@pytest.mark.parametrize("name,level", [
    ("DEBUG", logging.DEBUG),
    ("info", logging.INFO),
    ("WARN", logging.WARNING),
    ("FATAL", logging.CRITICAL),
])
def test_get_log_level_by_name(name, level):
    assert level == log_handling.get_log_level_by_name(name)


@pytest.mark.parametrize("name", ["LOUD", "Formatter", "BASIC_FORMAT"])
def test_get_log_level_by_name_unknown(name):
    assert log_handling.get_log_level_by_name(name) is None


def test_context_prefix(run_context):
    run_context.command = "benchmark"
    run_context.task = "Task_grid"
    record = make_record()

    assert log_handling.g_log_filter.filter(record)
    assert "command=benchmark - task=Task_grid - " == record.context
    assert record.raw_context["seed"] is None


def test_context_without_handler():
    log_handling.register_log_context_handler(None)
    record = make_record()

    log_handling.g_log_filter.filter(record)

    assert "" == record.context
    assert record.raw_context is None

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

"""Logging setup shared by the command line application and the test suites.

Records can carry the run context (command, benchmark task, root seed) as a prefix, so log lines
written by worker-heavy benchmark runs can be traced back to the task that produced them.
"""

import logging
import logging.handlers
import os
from os.path import join

LOG_BACKUP_COUNT = 10
LOG_MAX_BYTES = 1000000

LOG_FORMAT_WITH_CONTEXT = '%(asctime)s - %(name)s - %(levelname)s - %(context)s%(message)s'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

LEVEL_ALIASES = {
    "WARN": "WARNING",
    "FATAL": "CRITICAL",
}

g_logging_started = False


class RunLogContextHandler(object):
    """Holds what the application is currently working on."""

    def __init__(self):
        self.command = None
        self.task = None
        self.seed = None

    def get_log_context(self):
        return {
            "command": self.command,
            "task": self.task,
            "seed": self.seed,
        }


g_log_context_handler = None


class RunContextFilter(logging.Filter):

    def filter(self, record):
        context = None if g_log_context_handler is None else g_log_context_handler.get_log_context()

        record.raw_context = context
        record.context = "" if not context else "".join(
            "{key}={value} - ".format(key=key, value=value) for key, value in context.items() if value is not None)

        return True


g_log_filter = RunContextFilter()


def register_log_context_handler(p_log_context_handler):
    global g_log_context_handler

    g_log_context_handler = p_log_context_handler


def get_log_level_by_name(p_log_level_name):
    name = p_log_level_name.upper()
    level = getattr(logging, LEVEL_ALIASES.get(name, name), None)

    return level if isinstance(level, int) else None


def _create_handler(p_log_dir, p_log_file):
    if p_log_dir is None:
        return logging.StreamHandler()

    return logging.handlers.RotatingFileHandler(join(p_log_dir, p_log_file), backupCount=LOG_BACKUP_COUNT,
                                                maxBytes=LOG_MAX_BYTES, encoding="UTF-8")


def start_logging(p_log_dir=None, p_log_file=None, p_level=logging.DEBUG, p_use_filter=True):
    """Attaches a single handler to the root logger; later calls are ignored."""
    global g_logging_started

    if g_logging_started:
        return

    g_logging_started = True
    logger = get_logger()

    if isinstance(p_level, str):
        p_level = get_log_level_by_name(p_log_level_name=p_level)

    logger.setLevel(p_level)

    handler = _create_handler(p_log_dir=p_log_dir, p_log_file=p_log_file)

    if p_use_filter:
        handler.addFilter(g_log_filter)
        handler.setFormatter(logging.Formatter(LOG_FORMAT_WITH_CONTEXT))

    else:
        handler.setFormatter(logging.Formatter(LOG_FORMAT))

    logger.addHandler(handler)

    fmt = "Started logging in CWD={cwd} using module {module_name}"
    logger.info(fmt.format(cwd=os.getcwd(), module_name=__name__))


def set_level(p_log_level):
    level = get_log_level_by_name(p_log_level_name=p_log_level)

    if level is None:
        fmt = "Ignoring unknown logging level {level}"
        get_logger().warning(fmt.format(level=p_log_level))
        return

    fmt = "Set logging level to {level}"
    get_logger().info(fmt.format(level=p_log_level))

    get_logger().setLevel(level)

    for handler in get_logger().handlers:
        handler.setLevel(level)


def get_logger(p_name=None):
    logger = logging.getLogger(p_name)
    logger.addFilter(g_log_filter)
    return logger

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


class DomainParseException(Exception):

    def __init__(self, p_message, p_line=None, p_column=None):
        super().__init__(p_message)
        self.message = p_message
        self.line = p_line
        self.column = p_column
        self.source = None

    def __str__(self):
        prefix = "" if self.source is None else "%s: " % self.source

        if self.line is None:
            return prefix + self.message

        if self.column is None:
            return prefix + "line %d: %s" % (self.line, self.message)

        return prefix + "line %d, column %d: %s" % (self.line, self.column, self.message)


class InvalidSnapshotException(Exception):

    def __init__(self, p_snapshot, p_reason):
        super().__init__(p_reason)
        self._snapshot = p_snapshot
        self._reason = p_reason

    def __str__(self):
        return "Invalid snapshot '%s': %s" % (str(self._snapshot), self._reason)


class UnsupportedModeException(Exception):

    def __init__(self, p_text):
        super().__init__(p_text)


class CorrectnessFailure(Exception):

    def __init__(self, p_failed_cells, p_threshold):
        super().__init__()
        self.failed_cells = p_failed_cells
        self.threshold = p_threshold

    def __str__(self):
        return "Correctness test failed: %d comparison(s) exceed |z| <= %s" % (
            len(self.failed_cells), str(self.threshold))

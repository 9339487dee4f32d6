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

"""Posterior heatmaps of grid-like domains rendered as binary portable pixmaps (PPM)."""

import numpy as np

from snapshot_inference import exceptions
from snapshot_inference import log_handling
from snapshot_inference import mdp
from snapshot_inference import tools

GOAL_COLORS = {
    "b": (40, 90, 220),
    "r": (220, 50, 50),
    "g": (40, 170, 70),
    "y": (235, 200, 30),
    "p": (235, 105, 180),
    "o": (245, 140, 30),
}

FALLBACK_PALETTE = [
    (40, 90, 220),
    (220, 50, 50),
    (40, 170, 70),
    (235, 200, 30),
    (150, 80, 200),
    (30, 180, 180),
]

WALL_COLOR = (30, 30, 30)
MASK_COLOR = (160, 160, 160)
NO_VALID_COLOR = (255, 255, 255)
CROSS_COLOR = (60, 60, 60)

PPM_MAGIC = b"P6"
PPM_MAX_VALUE = 255


def goal_colors(p_goals):
    colors = {}
    fallback = iter(FALLBACK_PALETTE * (len(p_goals) // len(FALLBACK_PALETTE) + 1))

    for goal in p_goals:
        color = GOAL_COLORS.get(goal[:1].lower()) if len(goal) == 1 else None
        colors[goal] = color if color is not None and color not in colors.values() else next(fallback)

    return colors


def blend(p_posterior, p_colors):
    color = np.zeros(3)

    for goal, probability in p_posterior.probs.items():
        color += probability * np.array(p_colors[goal], dtype=float)

    return np.clip(np.rint(color), 0, PPM_MAX_VALUE).astype(np.uint8)


class HeatmapRenderer(object):

    def __init__(self, p_domain, p_cell_size=16):

        if not isinstance(p_domain, mdp.GridLikeDomain):
            fmt = "Heatmaps need a grid-like domain, '{name}' is not"
            raise exceptions.UnsupportedModeException(fmt.format(name=p_domain.name))

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._domain = p_domain
        self._cell_size = p_cell_size
        self._colors = goal_colors(p_domain.goals())

    @property
    def colors(self):
        return dict(self._colors)

    def _fill(self, p_image, p_cell, p_color):
        size = self._cell_size
        row, col = p_cell
        p_image[row * size:(row + 1) * size, col * size:(col + 1) * size] = p_color

    def _cross(self, p_image, p_cell):
        size = self._cell_size
        row, col = p_cell
        diagonal = np.arange(size)
        block = p_image[row * size:(row + 1) * size, col * size:(col + 1) * size]
        block[diagonal, diagonal] = CROSS_COLOR
        block[diagonal, size - 1 - diagonal] = CROSS_COLOR

    def render(self, p_results, p_mask=None):
        """Returns an RGB image array; p_results maps cells to GoalPosterior objects."""

        size = self._cell_size
        image = np.empty((self._domain.height * size, self._domain.width * size, 3), dtype=np.uint8)
        image[:, :] = MASK_COLOR
        mask = set(p_mask or [])

        for cell in self._domain.cells():
            if self._domain.is_wall(cell):
                self._fill(image, cell, WALL_COLOR)

            elif cell in mask or cell not in p_results:
                self._fill(image, cell, MASK_COLOR)

            elif not p_results[cell].is_ok:
                self._fill(image, cell, NO_VALID_COLOR)
                self._cross(image, cell)

            else:
                self._fill(image, cell, blend(p_results[cell], self._colors))

        return image

    def write_ppm(self, p_filename, p_image):
        height, width, _channels = p_image.shape
        header = b"%s\n%d %d\n%d\n" % (PPM_MAGIC, width, height, PPM_MAX_VALUE)

        with open(p_filename, "wb") as f:
            f.write(header)
            f.write(np.ascontiguousarray(p_image, dtype=np.uint8).tobytes())

        fmt = "Wrote {width}x{height} heatmap to '{filename}'"
        self._logger.info(fmt.format(width=width, height=height, filename=p_filename))


def read_ppm(p_filename):
    with open(p_filename, "rb") as f:
        data = f.read()

    magic, dimensions, max_value, pixels = data.split(b"\n", 3)

    if magic != PPM_MAGIC or int(max_value) != PPM_MAX_VALUE:
        raise ValueError("'{filename}' is not a binary 8-bit PPM file".format(filename=p_filename))

    width, height = (int(value) for value in dimensions.split())
    return np.frombuffer(pixels, dtype=np.uint8).reshape((height, width, 3))


def heatmap_report(p_domain, p_results, p_colors, p_excluded=None):

    return {
        "domain": p_domain.name,
        "width": p_domain.width,
        "height": p_domain.height,
        "colors": {goal: list(color) for goal, color in p_colors.items()},
        "excluded": [tools.format_cell(cell) for cell in sorted(p_excluded or [])],
        "cells": [dict(result.to_json(p_domain), cell=tools.format_cell(p_domain.cell_of(result.snapshot)))
                  for result in p_results],
    }

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

from os import path

from setuptools import setup

from snapshot_inference import settings

this_directory = path.abspath(path.dirname(__file__))

with open(path.join(this_directory, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

with open(path.join(this_directory, 'requirements.txt')) as f:
    install_requires = f.read().splitlines()

setup_params = {
    # standard setup configuration

    "install_requires" : install_requires,

    "scripts": [
        "run_snapshot_inference.py",
        "run_snapshot_inference_test_suite.py",
    ],

    "packages" : [ 'snapshot_inference', 'snapshot_inference.test' ],
    "package_data": {
        'snapshot_inference': [ 'fixtures/*.dom', 'fixtures/*.conf', 'fixtures/*.mask' ],
        'snapshot_inference.test': [ 'resources/*' ],
    },
    "include_package_data": True,

    "long_description" : long_description,
    "long_description_content_type" : 'text/markdown',
}

setup_params.update(settings.settings)


if __name__ == '__main__':
    setup(**setup_params)

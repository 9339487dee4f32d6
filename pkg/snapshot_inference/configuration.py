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

"""Typed INI configuration.

Every section is a ``ConfigModel`` whose attributes declare the options and their types. Values come,
in increasing precedence, from the model defaults, configuration files, environment variables
``Section__option`` and command line settings ``Section.option=value``. Sections with a registered prefix
(``[Task...]``) are handed to a ``ConfigurationSectionHandler`` that creates their models on the fly.
"""

import abc
import configparser
import re

from snapshot_inference import log_handling

REGEX_CMDLINE_PARAMETER = re.compile(r"([-a-zA-Z_0-9]+)\.([a-zA-Z_0-9]+)=(.*)")
REGEX_ENV_PARAMETER = re.compile("([a-zA-Z_0-9]+)__([a-zA-Z_0-9]+)")
REGEX_OPTION_INDEX = re.compile(r"([^[]*)\[([0-9]+)\]")

# typed options without default value
NONE_INTEGER = int
NONE_FLOAT = float
NONE_STRING = str

LIST_SEPARATOR = ","

VALID_BOOLEAN_TRUE_VALUES = ['1', 'TRUE', 'T', 'YES', 'Y', 'ON']
VALID_BOOLEAN_FALSE_VALUES = ['0', 'FALSE', 'F', 'NO', 'N', 'OFF']

IGNORED_DICT_KEYS = ['section_name']

NONE_TYPE_PREFIX = "_TYPE_"
NONE_ARRAY_TYPE_PREFIX = "_ARRAY_TYPE_"

SOURCE_FILE = "file"
SOURCE_ENVIRONMENT = "environment"
SOURCE_COMMAND_LINE = "option"
SOURCE_FLAG = "flag"
SOURCE_PROGRAM = "program"


class ConfigurationException(Exception):

    def __init__(self, p_text):
        super().__init__(p_text)


def option_label(p_section_name, p_option):
    return "[{section}]{option}".format(section=p_section_name, option=p_option)


class ConfigurationSectionHandler(object, metaclass=abc.ABCMeta):
    """Creates the models of all sections whose names start with a prefix."""

    def __init__(self, p_section_prefix):
        self._section_prefix = p_section_prefix
        self._configuration = None
        self._logger = log_handling.get_logger(self.__class__.__name__)

    @property
    def section_prefix(self):
        return self._section_prefix

    @abc.abstractmethod
    def handle_section(self, p_section_name):
        pass

    def set_configuration(self, p_configuration):
        self._configuration = p_configuration

    def scan(self, p_section):
        # registered sections are scanned directly when a file is read again
        self._configuration.add_section(p_section=p_section)
        self._configuration.scan_section(p_section_name=p_section.section_name)


class ConfigModel(object):

    def __init__(self, p_section_name):

        self.section_name = p_section_name

    def _declared_type(self, p_option_name):

        element_type = self.__dict__.get(NONE_ARRAY_TYPE_PREFIX + p_option_name)

        if element_type is not None:
            return "list_" + element_type.__name__

        value_type = self.__dict__.get(NONE_TYPE_PREFIX + p_option_name)

        if value_type is not None:
            return value_type.__name__

        return None

    def get_option_type(self, p_option_name):

        declared = self._declared_type(p_option_name)

        if declared is not None:
            return declared

        value = self.__dict__[p_option_name]

        if isinstance(value, list):
            if len(value) == 0:
                fmt = "Option '{option}' defines empty array without type"
                raise ConfigurationException(fmt.format(option=p_option_name))

            return "list_" + type(value[0]).__name__

        return type(value).__name__

    def has_option(self, p_option_name):

        return p_option_name in self.__dict__ or self._declared_type(p_option_name) is not None

    def options(self):

        names = [key for key in self.__dict__
                 if key not in IGNORED_DICT_KEYS
                 and not key.startswith(NONE_TYPE_PREFIX) and not key.startswith(NONE_ARRAY_TYPE_PREFIX)]
        names.extend(key[len(NONE_ARRAY_TYPE_PREFIX):] for key in self.__dict__
                     if key.startswith(NONE_ARRAY_TYPE_PREFIX) and key[len(NONE_ARRAY_TYPE_PREFIX):] not in names)
        names.extend(key[len(NONE_TYPE_PREFIX):] for key in self.__dict__
                     if key.startswith(NONE_TYPE_PREFIX) and key[len(NONE_TYPE_PREFIX):] not in names)
        return sorted(names)

    def to_json(self):
        return {option: getattr(self, option) for option in self.options()}

    def __getattr__(self, p_option_name):

        # only called for options that have never been assigned a value

        if p_option_name.startswith("__"):
            raise AttributeError(p_option_name)

        if NONE_TYPE_PREFIX + p_option_name in self.__dict__:
            return None

        if NONE_ARRAY_TYPE_PREFIX + p_option_name in self.__dict__:
            return []

        fmt = "unknown option name '{name}' in section '[{section}]'"
        raise AttributeError(fmt.format(name=p_option_name, section=self.__dict__.get("section_name")))

    def __setattr__(self, p_option_name, p_value):

        if isinstance(p_value, list) and len(p_value) == 1 and isinstance(p_value[0], type):
            self.__dict__[NONE_ARRAY_TYPE_PREFIX + p_option_name] = p_value[0]

        elif isinstance(p_value, type):
            self.__dict__[NONE_TYPE_PREFIX + p_option_name] = p_value

        else:
            self.__dict__[p_option_name] = p_value

    def post_process(self):

        pass


def _convert_boolean(p_label, p_value):

    upper_value = p_value.strip().upper()

    if upper_value in VALID_BOOLEAN_TRUE_VALUES:
        return True

    if upper_value in VALID_BOOLEAN_FALSE_VALUES:
        return False

    fmt = "Invalid Boolean value '{value}' in setting {label}"
    raise ConfigurationException(fmt.format(value=p_value, label=p_label))


def _convert_number(p_label, p_value, p_type):

    try:
        return p_type(p_value.strip())

    except ValueError as e:
        fmt = "Invalid numerical value '{value}' in setting {label}: {msg}"
        raise ConfigurationException(fmt.format(value=p_value, label=p_label, msg=str(e)))


def convert_value(p_section_name, p_option, p_option_value, p_option_type):

    label = option_label(p_section_name, p_option)

    if 'bool' in p_option_type:
        return _convert_boolean(label, p_option_value)

    if 'int' in p_option_type:
        return _convert_number(label, p_option_value, int)

    if 'float' in p_option_type:
        return _convert_number(label, p_option_value, float)

    return p_option_value.strip()


class Configuration(object):

    def __init__(self):

        self._sections = {}
        self._sources = {}
        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._section_handlers = []
        self.config = configparser.ConfigParser(strict=False, interpolation=None)
        self.config.optionxform = str  # case sensitive options

    def add_section(self, p_section):

        if p_section.section_name in self._sections:
            fmt = "Overwriting existing section '{section}'"
            self._logger.warning(fmt.format(section=p_section.section_name))

        self._sections[p_section.section_name] = p_section

    def register_section_handler(self, p_section_handler):

        self._section_handlers.append(p_section_handler)
        p_section_handler.set_configuration(p_configuration=self)

    def __getitem__(self, p_key):

        if p_key not in self._sections:
            fmt = "No section '{section}' configured"
            raise ConfigurationException(fmt.format(section=p_key))

        return self._sections[p_key]

    @property
    def sources(self):
        """Maps 'Section.option' to where its current value was set, for options not at their default."""
        return dict(self._sources)

    def set_config_value(self, p_section_name, p_option, p_option_value, p_source=SOURCE_PROGRAM):

        section = self._sections.get(p_section_name)
        append_to_list = False

        if section is None:
            raise ConfigurationException("Invalid section name '{section}'".format(section=p_section_name))

        match = REGEX_OPTION_INDEX.match(p_option)

        if match is not None:
            append_to_list = int(match.group(2)) > 0
            p_option = match.group(1)

        if not section.has_option(p_option_name=p_option):
            fmt = "Configuration contains invalid setting {label}"
            raise ConfigurationException(fmt.format(label=option_label(p_section_name, p_option)))

        option_type = section.get_option_type(p_option_name=p_option)

        if 'list' not in option_type:
            setattr(section, p_option, convert_value(p_section_name, p_option, p_option_value, option_type))

        elif append_to_list:
            getattr(section, p_option).append(convert_value(p_section_name, p_option, p_option_value, option_type))

        elif p_option_value.strip() == "":
            section.__dict__[p_option] = []

        else:
            section.__dict__[p_option] = [convert_value(p_section_name, p_option, value, option_type)
                                          for value in p_option_value.split(LIST_SEPARATOR)]

        self._sources["{section}.{option}".format(section=p_section_name, option=p_option)] = p_source

    def scan_section(self, p_section_name, p_source=SOURCE_FILE):

        if p_section_name not in self._sections:
            raise ConfigurationException("Invalid section name '{section}'".format(section=p_section_name))

        fmt = "Scanning settings for section '{section}'"
        self._logger.debug(fmt.format(section=p_section_name))

        for option in self.config.options(p_section_name):
            self.set_config_value(p_section_name=p_section_name, p_option=option,
                                  p_option_value=self.config.get(p_section_name, option), p_source=p_source)

    def handle_section(self, p_section_name, p_ignore_invalid_sections=False):

        for section_handler in self._section_handlers:
            if p_section_name.startswith(section_handler.section_prefix):
                section_handler.handle_section(p_section_name=p_section_name)
                return

        if not p_ignore_invalid_sections:
            raise ConfigurationException(
                "Configuration file contains invalid section '{section}'".format(section=p_section_name))

        fmt = "Ignoring section '{section}' without model or handler"
        self._logger.debug(fmt.format(section=p_section_name))

    def read_config_file(self, p_filename, p_ignore_invalid_sections=False):

        fmt = "Reading configuration file from '{filename}'"
        self._logger.info(fmt.format(filename=p_filename))

        try:
            files_read = self.config.read([p_filename], encoding="UTF-8")

        except configparser.Error as e:
            fmt = "Error '{msg}' while reading configuration file '{filename}'"
            raise ConfigurationException(fmt.format(msg=str(e), filename=p_filename))

        if len(files_read) != 1:
            fmt = "Cannot read configuration file '{filename}' (file probably does not exist)"
            raise ConfigurationException(fmt.format(filename=p_filename))

        for section_name in self.config.sections():
            if section_name in self._sections:
                self.scan_section(section_name)

            else:
                self.handle_section(p_section_name=section_name, p_ignore_invalid_sections=p_ignore_invalid_sections)

    def read_command_line_parameters(self, p_parameters):

        for parameter in p_parameters:
            result = REGEX_CMDLINE_PARAMETER.match(parameter)

            if result is None:
                fmt = "Incorrectly formatted command line setting '{parameter}' (expected SECTION.option=value)"
                raise ConfigurationException(fmt.format(parameter=parameter))

            section_name, option_name, value = result.groups()

            fmt = "Command line setting: set {label} to value '{value}'"
            self._logger.info(fmt.format(label=option_label(section_name, option_name), value=value))

            self.set_config_value(p_section_name=section_name, p_option=option_name, p_option_value=value,
                                  p_source=SOURCE_COMMAND_LINE)

    def read_environment_parameters(self, p_environment_dict):

        for name, value in dict(p_environment_dict).items():
            result = REGEX_ENV_PARAMETER.match(name)

            if result is None or result.group(1) not in self._sections:
                continue

            section_name, option_name = result.groups()

            fmt = "Environment setting: set {label} to value '{value}'"
            self._logger.info(fmt.format(label=option_label(section_name, option_name), value=value))

            self.set_config_value(p_section_name=section_name, p_option=option_name, p_option_value=value,
                                  p_source=SOURCE_ENVIRONMENT)

    def post_process(self):

        for section in self._sections.values():
            section.post_process()

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

import os.path
import unittest

from snapshot_inference import configuration
from snapshot_inference import experiments
from snapshot_inference import policy
from snapshot_inference import samplers
from snapshot_inference.test import base_test

SECTION_NAME = "MySection"
INT_VALUE = 123
NEW_INT_VALUE = 456
FLOAT_VALUE = 0.5
STRING_VALUE = "Hello"
BOOLEAN_VALUE = True


class SomeTestConfigModel(configuration.ConfigModel):

    def __init__(self):
        super(SomeTestConfigModel, self).__init__(p_section_name=SECTION_NAME)

        self.string = STRING_VALUE

        self.int = INT_VALUE
        self.none_int = configuration.NONE_INTEGER

        self.float = FLOAT_VALUE
        self.none_float = configuration.NONE_FLOAT

        self.bool = BOOLEAN_VALUE

        self.int_array = [1, 2]
        self.empty_string_array = [configuration.NONE_STRING]


class TestConfiguration(base_test.BaseTestCase):

    def test_configuration_types(self):

        model = SomeTestConfigModel()

        self.assertEqual(model.get_option_type("int"), "int")
        self.assertEqual(model.get_option_type("none_int"), "int")
        self.assertEqual(model.get_option_type("float"), "float")
        self.assertEqual(model.get_option_type("none_float"), "float")
        self.assertEqual(model.get_option_type("int_array"), "list_int")
        self.assertIsNone(model.none_float)
        self.assertEqual(0, len(model.empty_string_array))

    def test_configuration_unknown_option(self):

        model = SomeTestConfigModel()

        with self.assertRaises(AttributeError):
            model.some_option

    def test_invalid_float(self):

        config = configuration.Configuration()
        config.add_section(p_section=SomeTestConfigModel())

        with self.assertRaises(configuration.ConfigurationException) as context:
            config.set_config_value(p_section_name=SECTION_NAME, p_option="float", p_option_value="half")

        self.assertIn("Invalid numerical value", str(context.exception))

    def test_invalid_boolean(self):

        config = configuration.Configuration()
        config.add_section(p_section=SomeTestConfigModel())

        with self.assertRaises(configuration.ConfigurationException) as context:
            config.set_config_value(p_section_name=SECTION_NAME, p_option="bool", p_option_value="123")

        self.assertIn("Invalid Boolean value", str(context.exception))

    def test_list_values(self):

        model = SomeTestConfigModel()
        config = configuration.Configuration()
        config.add_section(p_section=model)

        config.set_config_value(p_section_name=SECTION_NAME, p_option="int_array", p_option_value="3,4,5")
        self.assertEqual([3, 4, 5], model.int_array)

        config.set_config_value(p_section_name=SECTION_NAME, p_option="int_array[1]", p_option_value="6")
        self.assertEqual([3, 4, 5, 6], model.int_array)

    def test_unknown_setting(self):

        config = configuration.Configuration()
        config.add_section(p_section=SomeTestConfigModel())

        with self.assertRaises(configuration.ConfigurationException):
            config.set_config_value(p_section_name=SECTION_NAME, p_option="colour", p_option_value="red")

    def test_load_configuration(self):

        config = self.configuration_factory()
        handler = experiments.TaskSectionHandler()
        config.register_section_handler(handler)
        config.read_config_file(p_filename=os.path.join(self.get_test_data_path(), "test.config"))
        config.post_process()

        self.assertEqual(1.5, config["Policy"].beta)
        self.assertEqual(policy.MODE_VALUE_ITERATION, config["Policy"].mode)
        self.assertEqual(50, config["Sampler"].samples)
        self.assertEqual(4.0, config["Sampler"].depth)
        self.assertFalse(config["Sampler"].use_cache)
        self.assertEqual([10, 100], config["Run"].eval_samples)
        self.assertEqual(experiments.OUTPUT_FORMAT_JSON, config["Run"].output_format)

        self.check_list_length(handler.tasks, 1)
        task = handler.tasks[0]
        self.assertEqual("Task_chain", task.label)
        self.assertEqual("chain.dom", task.domain)
        self.assertEqual("1 2", task.snapshots)
        self.assertIsNone(task.mask)

    def test_override_by_command_line_options(self):

        config = self.configuration_factory()

        config.read_command_line_parameters(["Sampler.samples=%d" % NEW_INT_VALUE, "Policy.mode=vi"])
        config.post_process()

        self.assertEqual(NEW_INT_VALUE, config["Sampler"].samples)
        self.assertEqual(policy.MODE_VALUE_ITERATION, config["Policy"].mode)

    def test_malformed_command_line_option(self):

        config = self.configuration_factory()

        with self.assertRaises(configuration.ConfigurationException):
            config.read_command_line_parameters(["Sampler.samples"])

    def test_override_by_environment(self):

        config = self.configuration_factory()

        environment = {
            "Sampler__seed": "17",
            "Unrelated__seed": "18",
            "PATH": "/usr/bin",
        }

        config.read_environment_parameters(p_environment_dict=environment)

        self.assertEqual(17, config["Sampler"].seed)

    def test_defaults(self):

        config = self.configuration_factory()
        config.post_process()

        self.assertEqual(policy.DEFAULT_BETA, config["Policy"].beta)
        self.assertEqual(1.0, config["Policy"].gamma)
        self.assertEqual(policy.MODE_ASTAR, config["Policy"].mode)
        self.assertEqual(samplers.DEFAULT_DEPTH, config["Sampler"].depth)
        self.assertEqual(samplers.DEFAULT_CACHE_BATCHES, config["Sampler"].cache_batches)
        self.assertEqual(experiments.DEFAULT_CORRECTNESS_CACHE_BATCHES, config["Run"].correctness_cache_batches)
        self.assertEqual(samplers.METHOD_BDPT, config["Run"].method)
        self.assertIsNone(config["Run"].output_format)

    def test_invalid_values(self):

        invalid_settings = [
            ("Sampler", "depth", "1.0"),
            ("Sampler", "alpha", "-1"),
            ("Sampler", "samples", "0"),
            ("Sampler", "cache_batches", "0"),
            ("Run", "correctness_cache_batches", "0"),
            ("Run", "invariance_depths", "1.0,2.0"),
            ("Policy", "beta", "0"),
            ("Policy", "gamma", "1.5"),
            ("Policy", "mode", "qlearning"),
            ("Run", "method", "mcmc"),
            ("Run", "output_format", "xml"),
            ("Run", "trials", "0"),
            ("Run", "z_threshold", "-3"),
            ("Run", "log_level", "LOUD"),
        ]

        for section, option, value in invalid_settings:
            config = self.configuration_factory()
            config.set_config_value(p_section_name=section, p_option=option, p_option_value=value)

            with self.assertRaises(configuration.ConfigurationException, msg="[%s]%s=%s" % (section, option, value)):
                config.post_process()

    def test_setting_sources(self):

        config = self.configuration_factory()
        config.read_config_file(os.path.join(self.get_test_data_path(), "test.config"),
                                p_ignore_invalid_sections=True)
        config.read_environment_parameters(p_environment_dict={"Sampler__seed": "5"})
        config.read_command_line_parameters(["Sampler.samples=7"])
        config.set_config_value(p_section_name="Run", p_option="trials", p_option_value="2",
                                p_source=configuration.SOURCE_FLAG)

        sources = config.sources

        self.assertEqual(configuration.SOURCE_FILE, sources["Policy.beta"])
        self.assertEqual(configuration.SOURCE_ENVIRONMENT, sources["Sampler.seed"])
        self.assertEqual(configuration.SOURCE_COMMAND_LINE, sources["Sampler.samples"])
        self.assertEqual(configuration.SOURCE_FLAG, sources["Run.trials"])
        self.assertNotIn("Sampler.alpha", sources)

    def test_section_to_json(self):

        model = SomeTestConfigModel()

        result = model.to_json()

        self.assertEqual(INT_VALUE, result["int"])
        self.assertIsNone(result["none_int"])
        self.assertEqual([], result["empty_string_array"])
        self.assertNotIn("section_name", result)


if __name__ == '__main__':
    unittest.main()

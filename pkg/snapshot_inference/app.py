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

import argparse
import csv
import io
import os
import sys

from snapshot_inference import blocks_domain
from snapshot_inference import configuration
from snapshot_inference import domain_parser
from snapshot_inference import exceptions
from snapshot_inference import experiments
from snapshot_inference import heatmap
from snapshot_inference import log_handling
from snapshot_inference import policy
from snapshot_inference import posterior
from snapshot_inference import samplers
from snapshot_inference import settings
from snapshot_inference import tools

APP_NAME = "snapshot-inference"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_FILE = "%s.log" % APP_NAME
DEFAULT_NO_LOG_FILTER = False
DEFAULT_SUITE = "benchmark.conf"
IMAGE_EXTENSION = ".ppm"

COMMAND_INFER = "infer"
COMMAND_BENCHMARK = "benchmark"
COMMAND_CORRECTNESS = "correctness"
COMMAND_HEATMAP = "heatmap"

EXIT_SUCCESS = 0
EXIT_FATAL = 1
EXIT_CONFIGURATION_ERROR = 2
EXIT_CORRECTNESS_FAILURE = 3

# command line flags overriding configuration settings: (argument name, section, option)
FLAG_SETTINGS = [
    ("method", "Run", "method"),
    ("trials", "Run", "trials"),
    ("workers", "Run", "workers"),
    ("output_format", "Run", "output_format"),
    ("eval_samples", "Run", "eval_samples"),
    ("samples", "Sampler", "samples"),
    ("alpha", "Sampler", "alpha"),
    ("depth", "Sampler", "depth"),
    ("seed", "Sampler", "seed"),
    ("cache_rollouts", "Sampler", "cache_rollouts"),
    ("cache_batches", "Sampler", "cache_batches"),
    ("max_forward_steps", "Sampler", "max_forward_steps"),
    ("beta", "Policy", "beta"),
    ("gamma", "Policy", "gamma"),
    ("policy", "Policy", "mode"),
]

# switches setting boolean options to a fixed value: (argument name, section, option, value)
SWITCH_SETTINGS = [
    ("no_cache", "Sampler", "use_cache", "false"),
    ("rejection_truth", "Run", "rejection_truth", "true"),
    ("report_timing", "Run", "report_timing", "true"),
]


def get_run_options_parser():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--config', nargs='*', dest='configurations', default=[],
                        help='file names of the configuration files')
    parser.add_argument('--option', nargs='*', dest='cmd_line_options', default=[],
                        help='Additional configuration settings formatted as '
                             'SECTION.OPTION=VALUE (overriding settings in configuration files)')
    parser.add_argument('--logdir', dest='log_dir', default=None,
                        help='base path for logging files')
    parser.add_argument('--loglevel', dest='log_level', default=DEFAULT_LOG_LEVEL,
                        help='logging level', choices=['WARN', 'INFO', 'DEBUG'])
    parser.add_argument('--no-log-filter', dest='no_log_filter', default=DEFAULT_NO_LOG_FILTER,
                        action='store_const', const=True,
                        help='deactivate log filter showing command, task and seed information')
    parser.add_argument('--domain', dest='domain', default=None, help='domain file')
    parser.add_argument('--method', dest='method', default=None, choices=samplers.METHODS,
                        help='likelihood estimator')
    parser.add_argument('--samples', dest='samples', type=int, default=None, help='samples per goal')
    parser.add_argument('--alpha', dest='alpha', type=float, default=None,
                        help='strength of importance sampling of predecessors')
    parser.add_argument('--depth', dest='depth', type=float, default=None,
                        help='mean Russian roulette depth (> 1)')
    parser.add_argument('--beta', dest='beta', type=float, default=None, help='softmax inverse temperature')
    parser.add_argument('--gamma', dest='gamma', type=float, default=None, help='discount of value iteration')
    parser.add_argument('--policy', dest='policy', default=None, choices=[policy.MODE_VALUE_ITERATION,
                                                                          policy.MODE_ASTAR],
                        help='step model backend')
    parser.add_argument('--cache-rollouts', dest='cache_rollouts', type=int, default=None,
                        help='number of forward rollouts stored in the cache')
    parser.add_argument('--no-cache', dest='no_cache', action='store_const', const=True, default=False,
                        help='do not connect backward walks to cached forward rollouts')
    parser.add_argument('--cache-batches', dest='cache_batches', type=int, default=None,
                        help='number of independent caches per goal (samples are spread over them)')
    parser.add_argument('--max-forward-steps', dest='max_forward_steps', type=int, default=None,
                        help='cap on forward rollouts (0 = automatic)')
    parser.add_argument('--trials', dest='trials', type=int, default=None, help='number of repetitions')
    parser.add_argument('--seed', dest='seed', type=int, default=None, help='root random seed')
    parser.add_argument('--workers', dest='workers', type=int, default=None, help='number of worker processes')
    parser.add_argument('--format', dest='output_format', default=None, choices=experiments.OUTPUT_FORMATS,
                        help='output format')
    parser.add_argument('--out', dest='out', default=None, help='output file (default: standard output)')
    parser.add_argument('--mask', dest='mask', default=None, help='file of cells excluded from sweeps')
    parser.add_argument('--holding', dest='holding', default=None,
                        help='key colors held by the agent in sweeps of keys domains')
    parser.add_argument('--report-timing', dest='report_timing', action='store_const', const=True, default=False,
                        help='write wall-clock times into the reports')
    return parser


def get_argument_parser(p_app_name=APP_NAME):
    run_options = get_run_options_parser()
    parser = argparse.ArgumentParser(prog=p_app_name, description=settings.settings["description"])
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    infer = subparsers.add_parser(COMMAND_INFER, parents=[run_options],
                                  help='goal posterior of a single snapshot')
    infer.add_argument('--snapshot', dest='snapshot', default=None, help='snapshot state literal')

    benchmark = subparsers.add_parser(COMMAND_BENCHMARK, parents=[run_options],
                                      help='total variation of few-sample posteriors against a converged posterior')
    benchmark.add_argument('--suite', dest='suite', default=None, help='benchmark suite file')
    benchmark.add_argument('--rejection-truth', dest='rejection_truth', action='store_const', const=True,
                           default=False, help='also compare against a converged rejection posterior')
    benchmark.add_argument('--eval-samples', dest='eval_samples', default=None,
                           help='comma separated sample counts to evaluate')

    correctness = subparsers.add_parser(COMMAND_CORRECTNESS, parents=[run_options],
                                        help='compare converged likelihoods of all estimators on the 4x4 grid')
    correctness.add_argument('--invariance', dest='invariance', action='store_const', const=True, default=False,
                             help='check bdpt means across alpha and depth settings on the 7x7 grid instead')

    heatmap_parser = subparsers.add_parser(COMMAND_HEATMAP, parents=[run_options],
                                           help='posterior of every cell of a grid-like domain')
    heatmap_parser.add_argument('--image', dest='image', default=None, help='PPM image file')

    return parser


class SnapshotInferenceApp(object):

    def __init__(self, p_arguments, p_log_context=None):

        self._arguments = p_arguments
        self._log_context = p_log_context
        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._config = None
        self._task_handler = None

    @property
    def config(self):
        return self._config

    def configuration_factory(self):

        config = configuration.Configuration()
        config.add_section(policy.PolicyConfigModel())
        config.add_section(samplers.SamplerConfigModel())
        config.add_section(experiments.RunConfigModel())

        self._task_handler = experiments.TaskSectionHandler()
        config.register_section_handler(self._task_handler)

        return config

    def suite_filename(self):
        suite = getattr(self._arguments, "suite", None)
        return suite if suite is not None else domain_parser.get_fixture_path(DEFAULT_SUITE)

    def prepare_configuration(self, p_configuration):

        # settings of later files win, so the suite comes first
        if self._arguments.command == COMMAND_BENCHMARK:
            p_configuration.read_config_file(self.suite_filename())

        for afile in self._arguments.configurations:
            p_configuration.read_config_file(afile)

        p_configuration.read_environment_parameters(p_environment_dict=os.environ)
        p_configuration.read_command_line_parameters(p_parameters=self._arguments.cmd_line_options)

        for name, section, option in FLAG_SETTINGS:
            value = getattr(self._arguments, name, None)

            if value is not None:
                p_configuration.set_config_value(p_section_name=section, p_option=option, p_option_value=str(value),
                                                p_source=configuration.SOURCE_FLAG)

        for name, section, option, value in SWITCH_SETTINGS:
            if getattr(self._arguments, name, False):
                p_configuration.set_config_value(p_section_name=section, p_option=option, p_option_value=value,
                                                p_source=configuration.SOURCE_FLAG)

        p_configuration.post_process()

        run_config = p_configuration["Run"]

        if run_config.log_level is not None:
            log_handling.set_level(run_config.log_level)

        if self._log_context is not None:
            self._log_context.seed = p_configuration["Sampler"].seed

        return p_configuration

    def load_configuration(self):

        self._config = self.prepare_configuration(self.configuration_factory())

    def run(self):

        handlers = {
            COMMAND_INFER: self.cmd_infer,
            COMMAND_BENCHMARK: self.cmd_benchmark,
            COMMAND_CORRECTNESS: self.cmd_correctness,
            COMMAND_HEATMAP: self.cmd_heatmap,
        }

        fmt = "Running command '{command}'..."
        self._logger.info(fmt.format(command=self._arguments.command))

        return handlers[self._arguments.command]()

    def _load_domain(self):

        if self._arguments.domain is None:
            raise configuration.ConfigurationException("Option --domain is required")

        return domain_parser.load_domain(self._arguments.domain)

    def _load_mask(self):

        if self._arguments.mask is None:
            return None

        return tools.read_cell_file(self._arguments.mask)

    def _output_format(self, p_default=experiments.OUTPUT_FORMAT_JSON):

        output_format = self._config["Run"].output_format
        return p_default if output_format is None else output_format

    def _settings_report(self):

        return {
            "policy": self._config["Policy"].to_json(),
            "sampler": self._config["Sampler"].to_json(),
            "overrides": self._config.sources,
        }

    def write_output(self, p_text, p_filename=None):

        if p_filename is None:
            sys.stdout.write(p_text)
            sys.stdout.flush()
            return

        with open(p_filename, "w", encoding="UTF-8", newline="") as f:
            f.write(p_text)

        fmt = "Wrote output to '{filename}'"
        self._logger.info(fmt.format(filename=p_filename))

    @staticmethod
    def _csv_text(p_fieldnames, p_rows):
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=p_fieldnames, lineterminator="\n")
        writer.writeheader()

        for row in p_rows:
            writer.writerow({key: "%.6f" % value if isinstance(value, float) else value
                             for key, value in row.items()})

        return buffer.getvalue()

    def _add_timing(self, p_report, p_seconds):

        fmt = "Command '{command}' took {seconds:.3f}s"
        self._logger.info(fmt.format(command=self._arguments.command, seconds=p_seconds))

        if self._config["Run"].report_timing:
            p_report["wall_clock_seconds"] = p_seconds

    def cmd_infer(self):

        if self._arguments.snapshot is None:
            raise configuration.ConfigurationException("Option --snapshot is required")

        domain = self._load_domain()
        snapshot = domain.parse_state(self._arguments.snapshot)
        run_config = self._config["Run"]
        keep_samples = isinstance(domain, blocks_domain.BlocksDomain)
        engine = experiments.InferenceEngine(p_domain=domain, p_policy_config=self._config["Policy"],
                                             p_sampler_config=self._config["Sampler"])
        timing = {}

        with tools.TimingContext(lambda seconds: timing.update(seconds=seconds)):
            result = engine.infer(p_snapshots=[snapshot], p_method=run_config.method,
                                  p_keep_samples=keep_samples)[0]

        report = {
            "command": COMMAND_INFER,
            "domain": domain.name,
            "method": run_config.method,
            "goals": domain.goals(),
            "max_forward_steps": engine.sampler.max_forward_steps,
            "no_valid_samples": not result.posterior.is_ok,
            "argmax": result.posterior.argmax(),
        }
        report.update(self._settings_report())
        report.update(result.to_json(domain))

        if keep_samples:
            report["touched_blocks"] = {
                letter: posterior.path_statistic_marginal(
                    p_samples=result.samples, p_posterior=result.posterior,
                    p_predicate=lambda trace, letter=letter: letter in blocks_domain.touched_blocks(trace))
                for letter in domain.letters}

        self._add_timing(report, timing["seconds"])

        if self._output_format() == experiments.OUTPUT_FORMAT_CSV:
            rows = [{
                "goal": goal,
                "likelihood": estimate.mean,
                "standard_error": estimate.standard_error,
                "nonzero_count": estimate.nonzero_count,
                "posterior": result.posterior.probability(goal),
                "status": result.posterior.status,
            } for goal, estimate in sorted(result.estimates.items())]
            text = self._csv_text(["goal", "likelihood", "standard_error", "nonzero_count", "posterior", "status"],
                                  rows)

        else:
            text = tools.to_json_string(report)

        self.write_output(text, self._arguments.out)
        return report

    def cmd_benchmark(self):

        suite = self.suite_filename()
        runner = experiments.BenchmarkRunner(p_policy_config=self._config["Policy"],
                                             p_sampler_config=self._config["Sampler"],
                                             p_run_config=self._config["Run"],
                                             p_base_dir=os.path.dirname(os.path.abspath(suite)),
                                             p_log_context=self._log_context)
        tasks = self._task_handler.tasks

        if len(tasks) == 0:
            fmt = "Benchmark suite '{suite}' contains no [Task...] sections"
            raise configuration.ConfigurationException(fmt.format(suite=suite))

        timing = {}

        with tools.TimingContext(lambda seconds: timing.update(seconds=seconds)):
            rows = runner.run(p_tasks=tasks)

        report = {"command": COMMAND_BENCHMARK, "tasks": rows}
        report.update(self._settings_report())
        self._add_timing(report, timing["seconds"])

        if self._output_format(p_default=experiments.OUTPUT_FORMAT_CSV) == experiments.OUTPUT_FORMAT_CSV:
            text = self._csv_text(runner.fieldnames(), rows)

        else:
            text = tools.to_json_string(report)

        self.write_output(text, self._arguments.out)
        return report

    def cmd_correctness(self):

        runner_class = experiments.InvarianceRunner if self._arguments.invariance else experiments.CorrectnessRunner
        runner = runner_class(p_policy_config=self._config["Policy"], p_sampler_config=self._config["Sampler"],
                              p_run_config=self._config["Run"])
        domain = self._load_domain() if self._arguments.domain is not None else None
        timing = {}

        with tools.TimingContext(lambda seconds: timing.update(seconds=seconds)):
            report = runner.run(p_domain=domain)

        report.update(self._settings_report())
        self._add_timing(report, timing["seconds"])
        self.write_output(tools.to_json_string(report), self._arguments.out)

        if not report["passed"]:
            raise exceptions.CorrectnessFailure(p_failed_cells=report["failures"],
                                                p_threshold=report["z_threshold"])

        return report

    def cmd_heatmap(self):

        domain = self._load_domain()
        run_config = self._config["Run"]
        renderer = heatmap.HeatmapRenderer(p_domain=domain, p_cell_size=run_config.cell_size)
        mask = self._load_mask()
        snapshots = experiments.sweep_snapshots(
            p_domain=domain, p_mask=mask,
            p_template=experiments.inventory_template(p_domain=domain, p_holding=self._arguments.holding))
        timing = {}

        with tools.TimingContext(lambda seconds: timing.update(seconds=seconds)):
            results = experiments.infer_snapshots(p_domain=domain, p_policy_config=self._config["Policy"],
                                                  p_sampler_config=self._config["Sampler"], p_snapshots=snapshots,
                                                  p_method=run_config.method, p_workers=run_config.workers)

        report = heatmap.heatmap_report(p_domain=domain, p_results=results, p_colors=renderer.colors,
                                        p_excluded=mask)
        report.update({"command": COMMAND_HEATMAP, "method": run_config.method,
                       "holding": self._arguments.holding or ""})
        report.update(self._settings_report())
        self._add_timing(report, timing["seconds"])

        image_filename = self._arguments.image

        if image_filename is None and self._arguments.out is not None:
            image_filename = os.path.splitext(self._arguments.out)[0] + IMAGE_EXTENSION

        if image_filename is not None:
            posteriors = {domain.cell_of(result.snapshot): result.posterior for result in results}
            renderer.write_ppm(p_filename=image_filename, p_image=renderer.render(p_results=posteriors,
                                                                                  p_mask=mask))

        self.write_output(tools.to_json_string(report), self._arguments.out)
        return report


def main(p_argv=None):

    process_result = EXIT_SUCCESS
    logger = log_handling.get_logger()
    arguments = get_argument_parser().parse_args(p_argv)

    log_context = log_handling.RunLogContextHandler()
    log_context.command = arguments.command
    log_handling.register_log_context_handler(log_context)

    try:
        log_handling.start_logging(p_level=arguments.log_level, p_log_dir=arguments.log_dir,
                                   p_log_file=DEFAULT_LOG_FILE, p_use_filter=not arguments.no_log_filter)
        logger = log_handling.get_logger()

        app = SnapshotInferenceApp(p_arguments=arguments, p_log_context=log_context)
        app.load_configuration()
        app.run()

    except exceptions.CorrectnessFailure as e:
        logger.error(str(e))
        process_result = EXIT_CORRECTNESS_FAILURE

    except (configuration.ConfigurationException, exceptions.DomainParseException,
            exceptions.InvalidSnapshotException, exceptions.UnsupportedModeException) as e:
        logger.error(str(e))
        process_result = EXIT_CONFIGURATION_ERROR

    except Exception as e:
        tools.handle_fatal_exception(p_exception=e, p_logger=logger)
        tools.log_stack_trace(p_logger=logger)
        process_result = EXIT_FATAL

    fmt = 'Terminated with exit code %d' % process_result
    logger.info(fmt)

    return process_result

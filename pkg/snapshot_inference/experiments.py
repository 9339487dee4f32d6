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

import concurrent.futures
import copy
import math

from snapshot_inference import configuration
from snapshot_inference import domain_parser
from snapshot_inference import exceptions
from snapshot_inference import log_handling
from snapshot_inference import mdp
from snapshot_inference import oracle
from snapshot_inference import policy
from snapshot_inference import posterior
from snapshot_inference import samplers
from snapshot_inference import tools

SNAPSHOTS_ALL = "all"

OUTPUT_FORMAT_JSON = "json"
OUTPUT_FORMAT_CSV = "csv"
OUTPUT_FORMATS = [OUTPUT_FORMAT_JSON, OUTPUT_FORMAT_CSV]

CORRECTNESS_FIXTURE = "grid_4x4.dom"
INVARIANCE_FIXTURE = "grid_two_doors.dom"
INVARIANCE_SNAPSHOTS = "5,1 5,2 6,2"

DEFAULT_TRIALS = 100
DEFAULT_WORKERS = 1
DEFAULT_GROUND_TRUTH_SAMPLES = 1000
DEFAULT_REJECTION_TRUTH_SAMPLES = 10000
DEFAULT_EVAL_SAMPLES = 10
DEFAULT_CORRECTNESS_SAMPLES = 25000
DEFAULT_CORRECTNESS_CACHE_ROLLOUTS = 200
DEFAULT_CORRECTNESS_CACHE_BATCHES = 100
DEFAULT_INVARIANCE_SAMPLES = 4000
DEFAULT_INVARIANCE_ALPHAS = [0.0, 1.0, 5.0]
DEFAULT_INVARIANCE_DEPTHS = [2.0, 5.0, 20.0]
DEFAULT_Z_THRESHOLD = 3.0
DEFAULT_CELL_SIZE = 16

ESTIMATOR_REJECTION = "rejection"
ESTIMATOR_BDPT = "bdpt"
ESTIMATOR_BDPT_CACHE = "bdpt_cache"
ESTIMATORS = [ESTIMATOR_REJECTION, ESTIMATOR_BDPT, ESTIMATOR_BDPT_CACHE]


class RunConfigModel(configuration.ConfigModel):

    def __init__(self, p_section_name="Run"):
        super().__init__(p_section_name=p_section_name)

        self.method = samplers.METHOD_BDPT
        self.trials = DEFAULT_TRIALS
        self.output_format = configuration.NONE_STRING
        self.workers = DEFAULT_WORKERS
        self.ground_truth_samples = DEFAULT_GROUND_TRUTH_SAMPLES
        self.rejection_truth = False
        self.rejection_truth_samples = DEFAULT_REJECTION_TRUTH_SAMPLES
        self.eval_samples = [DEFAULT_EVAL_SAMPLES]
        self.correctness_samples = DEFAULT_CORRECTNESS_SAMPLES
        self.correctness_cache_rollouts = DEFAULT_CORRECTNESS_CACHE_ROLLOUTS
        self.correctness_cache_batches = DEFAULT_CORRECTNESS_CACHE_BATCHES
        self.invariance_snapshots = INVARIANCE_SNAPSHOTS
        self.invariance_samples = DEFAULT_INVARIANCE_SAMPLES
        self.invariance_alphas = list(DEFAULT_INVARIANCE_ALPHAS)
        self.invariance_depths = list(DEFAULT_INVARIANCE_DEPTHS)
        self.z_threshold = DEFAULT_Z_THRESHOLD
        self.report_timing = False
        self.cell_size = DEFAULT_CELL_SIZE
        self.log_level = configuration.NONE_STRING

    def post_process(self):

        if self.method not in samplers.METHODS:
            fmt = "[Run]method must be one of {methods}"
            raise configuration.ConfigurationException(fmt.format(methods=", ".join(samplers.METHODS)))

        if self.output_format is not None and self.output_format not in OUTPUT_FORMATS:
            fmt = "[Run]output_format must be one of {formats}"
            raise configuration.ConfigurationException(fmt.format(formats=", ".join(OUTPUT_FORMATS)))

        for name in ["trials", "workers", "ground_truth_samples", "rejection_truth_samples",
                     "correctness_samples", "correctness_cache_batches", "invariance_samples", "cell_size"]:
            if getattr(self, name) < 1:
                raise configuration.ConfigurationException("[Run]{name} must be at least 1".format(name=name))

        if len(self.eval_samples) == 0 or any(n < 1 for n in self.eval_samples):
            raise configuration.ConfigurationException("[Run]eval_samples must list positive sample counts")

        if self.correctness_cache_rollouts < 0:
            raise configuration.ConfigurationException("[Run]correctness_cache_rollouts must not be negative")

        if len(self.invariance_alphas) == 0 or any(alpha < 0 for alpha in self.invariance_alphas):
            raise configuration.ConfigurationException("[Run]invariance_alphas must list non-negative values")

        if len(self.invariance_depths) == 0 or any(depth <= 1 for depth in self.invariance_depths):
            raise configuration.ConfigurationException("[Run]invariance_depths must list values greater than 1")

        if self.z_threshold <= 0:
            raise configuration.ConfigurationException("[Run]z_threshold must be positive")

        if self.log_level is not None and log_handling.get_log_level_by_name(self.log_level) is None:
            fmt = "[Run]log_level '{level}' is not a logging level"
            raise configuration.ConfigurationException(fmt.format(level=self.log_level))


class TaskConfigModel(configuration.ConfigModel):

    def __init__(self, p_section_name):
        super().__init__(p_section_name=p_section_name)

        self.label = configuration.NONE_STRING
        self.domain = configuration.NONE_STRING
        self.snapshots = SNAPSHOTS_ALL
        self.holding = ""
        self.mask = configuration.NONE_STRING

    def post_process(self):
        tools.check_config_value(p_config=self, p_config_attribute_name="domain")

        if self.label is None:
            self.label = self.section_name


class TaskSectionHandler(configuration.ConfigurationSectionHandler):

    def __init__(self, p_section_prefix="Task"):
        super().__init__(p_section_prefix=p_section_prefix)
        self._tasks = []

    def handle_section(self, p_section_name):
        task = TaskConfigModel(p_section_name=p_section_name)
        self.scan(p_section=task)
        self._tasks.append(task)

        fmt = "Registered benchmark task '{name}'"
        self._logger.debug(fmt.format(name=p_section_name))

    @property
    def tasks(self):
        return list(self._tasks)


class SnapshotResult(object):

    def __init__(self, p_snapshot, p_estimates, p_posterior, p_samples=None):
        self.snapshot = p_snapshot
        self.estimates = p_estimates
        self.posterior = p_posterior
        self.samples = p_samples

    def to_json(self, p_domain):
        return {
            "snapshot": p_domain.format_state(self.snapshot),
            "likelihoods": {goal: estimate.to_json() for goal, estimate in self.estimates.items()},
            "posterior": self.posterior.to_json(),
        }


def inventory_template(p_domain, p_holding):
    if p_holding is None or p_holding.strip() == "":
        return p_domain.inventory_template() if hasattr(p_domain, "inventory_template") else None

    if not hasattr(p_domain, "inventory_template"):
        fmt = "Domain '{name}' has no key inventory (holding '{holding}')"
        raise configuration.ConfigurationException(fmt.format(name=p_domain.name, holding=p_holding))

    try:
        return p_domain.inventory_template(p_holding=p_holding.strip())

    except ValueError as e:
        raise configuration.ConfigurationException(str(e))


def sweep_snapshots(p_domain, p_mask=None, p_template=None):
    """All states of a grid-like domain with the agent on a non-wall, non-masked cell."""

    if not isinstance(p_domain, mdp.GridLikeDomain):
        fmt = "Domain '{name}' is not grid-like and cannot be swept cell by cell"
        raise exceptions.UnsupportedModeException(fmt.format(name=p_domain.name))

    mask = set(p_mask or [])
    snapshots = []

    for cell in p_domain.cells():
        if p_domain.is_wall(cell) or cell in mask:
            continue

        state = p_domain.state_for_cell(cell, p_template)

        if state is not None:
            snapshots.append(state)

    return snapshots


def resolve_snapshots(p_domain, p_spec, p_holding=None, p_mask=None):

    if p_spec is None or p_spec.strip() == "":
        raise configuration.ConfigurationException("No snapshot given")

    if p_spec.strip() == SNAPSHOTS_ALL:
        return sweep_snapshots(p_domain=p_domain, p_mask=p_mask,
                               p_template=inventory_template(p_domain=p_domain, p_holding=p_holding))

    return [p_domain.parse_state(text) for text in p_spec.split()]


class InferenceEngine(object):
    """Goal posteriors of snapshots: per-goal likelihood estimates combined with a goal prior."""

    def __init__(self, p_domain, p_policy_config, p_sampler_config, p_policy=None, p_prior=None):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._domain = p_domain
        self._policy = p_policy or policy.create_policy(p_domain=p_domain, p_config=p_policy_config)
        self._policy.prepare()
        self._sampler = samplers.LikelihoodSampler(p_domain=p_domain, p_policy=self._policy,
                                                   p_config=p_sampler_config)
        self._sampler_config = p_sampler_config
        self._prior = p_prior or posterior.GoalPrior.uniform(p_domain.goals())

    @property
    def domain(self):
        return self._domain

    @property
    def policy(self):
        return self._policy

    @property
    def sampler(self):
        return self._sampler

    def build_caches(self, p_trial=0, p_purpose=samplers.PURPOSE_EVALUATION, p_rollouts=None, p_batches=None):
        return {goal: self._sampler.build_cache_pool(p_goal=goal, p_trial=p_trial, p_purpose=p_purpose,
                                                     p_rollouts=p_rollouts, p_batches=p_batches)
                for goal in self._domain.goals()}

    def default_caches(self, p_method, p_trial=0, p_purpose=samplers.PURPOSE_EVALUATION):
        """Cache pools per goal if the configured bdpt run uses them, None otherwise."""

        if p_method != samplers.METHOD_BDPT or not self._sampler_config.use_cache \
                or self._sampler_config.cache_rollouts == 0:
            return None

        return self.build_caches(p_trial=p_trial, p_purpose=p_purpose)

    def infer(self, p_snapshots, p_method, p_samples=None, p_trial=0, p_purpose=samplers.PURPOSE_EVALUATION,
              p_keep_samples=False, p_caches=None):

        caches = p_caches

        if caches is None:
            caches = self.default_caches(p_method=p_method, p_trial=p_trial, p_purpose=p_purpose)

        per_goal_estimates = {}
        per_goal_samples = {}

        for goal in self._domain.goals():
            estimates, samples = self._sampler.estimate_likelihoods(
                p_snapshots=p_snapshots, p_goal=goal, p_method=p_method, p_trial=p_trial,
                p_cache=None if caches is None else caches.get(goal), p_samples=p_samples,
                p_purpose=p_purpose, p_keep_samples=p_keep_samples)
            per_goal_estimates[goal] = estimates
            per_goal_samples[goal] = samples

        results = []

        for index, snapshot in enumerate(p_snapshots):
            estimates = {goal: per_goal_estimates[goal][index] for goal in self._domain.goals()}
            goal_posterior = posterior.posterior_over_goals(p_estimates=estimates, p_prior=self._prior)
            samples = {goal: per_goal_samples[goal][index] for goal in self._domain.goals()} \
                if p_keep_samples else None
            results.append(SnapshotResult(p_snapshot=snapshot, p_estimates=estimates, p_posterior=goal_posterior,
                                          p_samples=samples))

        no_valid = sum(1 for result in results if not result.posterior.is_ok)

        if no_valid > 0:
            fmt = "{count} of {total} snapshot(s) had no valid samples ({method})"
            self._logger.warning(fmt.format(count=no_valid, total=len(results), method=p_method))

        return results


def column_name(p_method, p_samples, p_suffix=""):
    return "{method}@{samples}{suffix}".format(method=p_method, samples=p_samples, suffix=p_suffix)


def _evaluate_trial(p_arguments):
    """Runs one benchmark trial; module level so that it can be sent to worker processes."""

    (engine, snapshots, eval_samples, truths, trial) = p_arguments
    outcome = {}

    for method in [samplers.METHOD_BDPT, samplers.METHOD_REJECTION]:
        for n in eval_samples:
            results = engine.infer(p_snapshots=snapshots, p_method=method, p_samples=n, p_trial=trial)
            no_valid = sum(1 for result in results if not result.posterior.is_ok)

            for truth_name, truth in truths.items():
                distances = [posterior.tv_distance(result.posterior, reference)
                             for result, reference in zip(results, truth)]
                outcome[(method, n, truth_name)] = sum(distances)

            outcome[(method, n, "no_valid")] = no_valid

    return outcome


class BenchmarkRunner(object):

    def __init__(self, p_policy_config, p_sampler_config, p_run_config, p_base_dir=None, p_log_context=None):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._policy_config = p_policy_config
        self._sampler_config = p_sampler_config
        self._run_config = p_run_config
        self._base_dir = p_base_dir
        self._log_context = p_log_context

    def fieldnames(self):
        names = ["task", "label", "policy", "snapshots", "skipped", "trials", "ground_truth"]

        for method in [samplers.METHOD_BDPT, samplers.METHOD_REJECTION]:
            for n in self._run_config.eval_samples:
                names.append(column_name(method, n))
                names.append(column_name(method, n, "_no_valid"))

                if self._run_config.rejection_truth:
                    names.append(column_name(method, n, "_vs_rejection"))

        return names

    def run(self, p_tasks):
        return [self.run_task(p_task=task) for task in p_tasks]

    def run_task(self, p_task):

        if self._log_context is not None:
            self._log_context.task = p_task.section_name

        domain = domain_parser.load_domain(tools.resolve_path(p_task.domain, self._base_dir))
        mask = tools.read_cell_file(tools.resolve_path(p_task.mask, self._base_dir)) \
            if p_task.mask is not None else None
        snapshots = resolve_snapshots(p_domain=domain, p_spec=p_task.snapshots, p_holding=p_task.holding,
                                      p_mask=mask)

        fmt = "Task '{task}': {count} snapshot(s), {trials} trial(s)"
        self._logger.info(fmt.format(task=p_task.label, count=len(snapshots), trials=self._run_config.trials))

        engine = InferenceEngine(p_domain=domain, p_policy_config=self._policy_config,
                                 p_sampler_config=self._sampler_config)
        ground_truth = engine.infer(p_snapshots=snapshots, p_method=samplers.METHOD_BDPT,
                                    p_samples=self._run_config.ground_truth_samples,
                                    p_purpose=samplers.PURPOSE_GROUND_TRUTH)
        valid = [index for index, result in enumerate(ground_truth) if result.posterior.is_ok]
        truths = {"bdpt": [ground_truth[index].posterior for index in valid]}

        if self._run_config.rejection_truth:
            rejection_truth = engine.infer(p_snapshots=[snapshots[index] for index in valid],
                                           p_method=samplers.METHOD_REJECTION,
                                           p_samples=self._run_config.rejection_truth_samples,
                                           p_purpose=samplers.PURPOSE_REJECTION_TRUTH)
            truths["rejection"] = [result.posterior for result in rejection_truth]

        skipped = len(snapshots) - len(valid)

        if skipped > 0:
            fmt = "Task '{task}': skipping {count} snapshot(s) without valid ground truth samples"
            self._logger.warning(fmt.format(task=p_task.label, count=skipped))

        evaluated = [snapshots[index] for index in valid]
        arguments = [(engine, evaluated, self._run_config.eval_samples, truths, trial)
                     for trial in range(self._run_config.trials)]

        if self._run_config.workers > 1 and len(arguments) > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=self._run_config.workers) as executor:
                outcomes = list(executor.map(_evaluate_trial, arguments))

        else:
            outcomes = [_evaluate_trial(argument) for argument in arguments]

        row = {
            "task": p_task.section_name,
            "label": p_task.label,
            "policy": self._policy_config.mode,
            "snapshots": len(evaluated),
            "skipped": skipped,
            "trials": self._run_config.trials,
            "ground_truth": column_name(samplers.METHOD_BDPT, self._run_config.ground_truth_samples),
        }
        cells = max(1, len(evaluated) * len(outcomes))

        for method in [samplers.METHOD_BDPT, samplers.METHOD_REJECTION]:
            for n in self._run_config.eval_samples:
                row[column_name(method, n)] = sum(outcome[(method, n, "bdpt")] for outcome in outcomes) / cells
                row[column_name(method, n, "_no_valid")] = \
                    sum(outcome[(method, n, "no_valid")] for outcome in outcomes) / cells

                if self._run_config.rejection_truth:
                    row[column_name(method, n, "_vs_rejection")] = \
                        sum(outcome[(method, n, "rejection")] for outcome in outcomes) / cells

        fmt = "Task '{task}' finished: {summary}"
        self._logger.info(fmt.format(task=p_task.label, summary=", ".join(
            "{name}={value:.4f}".format(name=name, value=row[name])
            for name in self.fieldnames() if "@" in name and name != row["ground_truth"])))

        if self._log_context is not None:
            self._log_context.task = None

        return row


def z_score(p_mean1, p_se1, p_mean2, p_se2):
    scale = math.sqrt(p_se1 ** 2 + p_se2 ** 2)

    if scale == 0.0:
        return 0.0 if p_mean1 == p_mean2 else math.inf

    return (p_mean1 - p_mean2) / scale


def relative_deviation(p_value1, p_value2):
    largest = max(abs(p_value1), abs(p_value2))
    return 0.0 if largest == 0.0 else abs(p_value1 - p_value2) / largest


def _estimate_bdpt_chunk(p_arguments):
    (engine, snapshots, goal, samples, cache_rollouts, cache_batches) = p_arguments
    cache = None

    if cache_rollouts > 0:
        cache = engine.sampler.build_cache_pool(p_goal=goal, p_rollouts=cache_rollouts, p_batches=cache_batches)

    estimates, _samples = engine.sampler.estimate_likelihoods(p_snapshots=snapshots, p_goal=goal,
                                                              p_method=samplers.METHOD_BDPT, p_cache=cache,
                                                              p_samples=samples)
    return estimates


class CorrectnessRunner(object):
    """Compares converged likelihoods of all estimators, and the exact path sums, cell by cell."""

    def __init__(self, p_policy_config, p_sampler_config, p_run_config):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._policy_config = p_policy_config
        self._sampler_config = p_sampler_config
        self._run_config = p_run_config

    def _bdpt_estimates(self, p_engine, p_snapshots, p_goal, p_cache_rollouts):

        samples = self._run_config.correctness_samples
        workers = self._run_config.workers
        cache_batches = self._run_config.correctness_cache_batches

        if workers > 1 and len(p_snapshots) > 1:
            chunks = [p_snapshots[index::workers] for index in range(workers)]
            arguments = [(p_engine, chunk, p_goal, samples, p_cache_rollouts, cache_batches)
                         for chunk in chunks if len(chunk) > 0]

            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
                chunk_estimates = list(executor.map(_estimate_bdpt_chunk, arguments))

            by_snapshot = {}

            for (_e, chunk, _g, _n, _r, _b), estimates in zip(arguments, chunk_estimates):
                by_snapshot.update(zip(chunk, estimates))

            return [by_snapshot[snapshot] for snapshot in p_snapshots]

        return _estimate_bdpt_chunk((p_engine, p_snapshots, p_goal, samples, p_cache_rollouts, cache_batches))

    def run(self, p_domain=None):

        domain = p_domain or domain_parser.load_domain(domain_parser.get_fixture_path(CORRECTNESS_FIXTURE))
        engine = InferenceEngine(p_domain=domain, p_policy_config=self._policy_config,
                                 p_sampler_config=self._sampler_config)
        snapshots = domain.enumerate_states()
        threshold = self._run_config.z_threshold
        samples = self._run_config.correctness_samples
        cells = []
        failures = []
        max_deviation = 0.0

        for goal in domain.goals():
            fmt = "Correctness check for goal '{goal}': {count} cells, {samples} samples per estimator"
            self._logger.info(fmt.format(goal=goal, count=len(snapshots), samples=samples))

            estimates = {
                ESTIMATOR_REJECTION: engine.sampler.estimate_likelihoods(
                    p_snapshots=snapshots, p_goal=goal, p_method=samplers.METHOD_REJECTION, p_samples=samples)[0],
                ESTIMATOR_BDPT: self._bdpt_estimates(p_engine=engine, p_snapshots=snapshots, p_goal=goal,
                                                     p_cache_rollouts=0),
                ESTIMATOR_BDPT_CACHE: self._bdpt_estimates(p_engine=engine, p_snapshots=snapshots, p_goal=goal,
                                                           p_cache_rollouts=self._run_config.correctness_cache_rollouts),
            }
            exact = oracle.exact_likelihoods(p_domain=domain, p_policy=engine.policy, p_snapshots=snapshots,
                                             p_goal=goal)

            for index, snapshot in enumerate(snapshots):
                entry = {
                    "goal": goal,
                    "snapshot": domain.format_state(snapshot),
                    "exact": exact[index],
                    "estimates": {name: estimates[name][index].to_json() for name in ESTIMATORS},
                    "z_scores": {},
                    "z_exact": {},
                }

                for position, name1 in enumerate(ESTIMATORS):
                    estimate1 = estimates[name1][index]
                    entry["z_exact"][name1] = z_score(estimate1.mean, estimate1.standard_error, exact[index], 0.0)

                    for name2 in ESTIMATORS[position + 1:]:
                        estimate2 = estimates[name2][index]
                        z = z_score(estimate1.mean, estimate1.standard_error,
                                    estimate2.mean, estimate2.standard_error)
                        pair = "{name1}:{name2}".format(name1=name1, name2=name2)
                        entry["z_scores"][pair] = z
                        max_deviation = max(max_deviation, relative_deviation(estimate1.mean, estimate2.mean))

                        if abs(z) > threshold:
                            failures.append((goal, entry["snapshot"], pair, z))

                cells.append(entry)

        passed = len(failures) == 0

        if passed:
            fmt = "All {count} cells agree within |z| <= {threshold}"
            self._logger.info(fmt.format(count=len(cells), threshold=threshold))

        else:
            for goal, snapshot, pair, z in failures:
                fmt = "Goal '{goal}', cell {snapshot}: {pair} differ with z={z:.2f}"
                self._logger.warning(fmt.format(goal=goal, snapshot=snapshot, pair=pair, z=z))

        report = {
            "command": "correctness",
            "domain": domain.name,
            "samples": samples,
            "cache_rollouts": self._run_config.correctness_cache_rollouts,
            "cache_batches": self._run_config.correctness_cache_batches,
            "z_threshold": threshold,
            "max_relative_deviation": max_deviation,
            "passed": passed,
            "failures": [{"goal": goal, "snapshot": snapshot, "pair": pair, "z": z}
                         for goal, snapshot, pair, z in failures],
            "cells": cells,
        }
        return report


class InvarianceRunner(object):
    """Converged bdpt means under other alpha and depth settings, against the exact path sums.

    Runs without the forward cache so that the backward walk carries the whole estimate; the
    report lists the sample variance of every setting next to its mean."""

    def __init__(self, p_policy_config, p_sampler_config, p_run_config):

        self._logger = log_handling.get_logger(self.__class__.__name__)
        self._policy_config = p_policy_config
        self._sampler_config = p_sampler_config
        self._run_config = p_run_config

    def settings(self):
        settings = [(alpha, self._sampler_config.depth) for alpha in self._run_config.invariance_alphas]
        settings.extend((self._sampler_config.alpha, depth) for depth in self._run_config.invariance_depths
                        if (self._sampler_config.alpha, depth) not in settings)
        return settings

    def sampler_for(self, p_engine, p_alpha, p_depth):
        config = copy.copy(self._sampler_config)
        config.alpha = p_alpha
        config.depth = p_depth
        return samplers.LikelihoodSampler(p_domain=p_engine.domain, p_policy=p_engine.policy, p_config=config,
                                          p_max_forward_steps=p_engine.sampler.max_forward_steps)

    def run(self, p_domain=None):

        domain = p_domain or domain_parser.load_domain(domain_parser.get_fixture_path(INVARIANCE_FIXTURE))
        engine = InferenceEngine(p_domain=domain, p_policy_config=self._policy_config,
                                 p_sampler_config=self._sampler_config)
        snapshots = resolve_snapshots(p_domain=domain, p_spec=self._run_config.invariance_snapshots)
        samples = self._run_config.invariance_samples
        threshold = self._run_config.z_threshold
        rows = []
        failures = []

        for goal in domain.goals():
            exact = oracle.exact_likelihoods(p_domain=domain, p_policy=engine.policy, p_snapshots=snapshots,
                                             p_goal=goal)

            for alpha, depth in self.settings():
                fmt = "Invariance sweep for goal '{goal}': alpha={alpha}, depth={depth}, {samples} samples"
                self._logger.info(fmt.format(goal=goal, alpha=alpha, depth=depth, samples=samples))

                sampler = self.sampler_for(p_engine=engine, p_alpha=alpha, p_depth=depth)
                estimates, _samples = sampler.estimate_likelihoods(p_snapshots=snapshots, p_goal=goal,
                                                                   p_method=samplers.METHOD_BDPT, p_samples=samples)

                for index, estimate in enumerate(estimates):
                    z = z_score(estimate.mean, estimate.standard_error, exact[index], 0.0)
                    row = {
                        "goal": goal,
                        "snapshot": domain.format_state(snapshots[index]),
                        "alpha": alpha,
                        "depth": depth,
                        "mean": estimate.mean,
                        "standard_error": estimate.standard_error,
                        "variance": estimate.variance,
                        "exact": exact[index],
                        "z_exact": z,
                    }
                    rows.append(row)

                    if abs(z) > threshold:
                        failures.append(row)

        lowest_variance_alpha = {}

        for row in rows:
            if row["depth"] != self._sampler_config.depth or row["exact"] == 0.0:
                continue

            key = "{goal}:{snapshot}".format(goal=row["goal"], snapshot=row["snapshot"])
            best = lowest_variance_alpha.get(key)

            if best is None or row["variance"] < best[1]:
                lowest_variance_alpha[key] = (row["alpha"], row["variance"])

        for row in failures:
            fmt = "Goal '{goal}', cell {snapshot}: alpha={alpha}, depth={depth} misses the exact value with z={z:.2f}"
            self._logger.warning(fmt.format(goal=row["goal"], snapshot=row["snapshot"], alpha=row["alpha"],
                                            depth=row["depth"], z=row["z_exact"]))

        return {
            "command": "correctness",
            "check": "invariance",
            "domain": domain.name,
            "samples": samples,
            "z_threshold": threshold,
            "passed": len(failures) == 0,
            "failures": [{"goal": row["goal"], "snapshot": row["snapshot"],
                          "pair": "alpha={alpha},depth={depth}:exact".format(alpha=row["alpha"], depth=row["depth"]),
                          "z": row["z_exact"]} for row in failures],
            "lowest_variance_alpha": {key: alpha for key, (alpha, _variance) in lowest_variance_alpha.items()},
            "rows": rows,
        }


def _infer_chunk(p_arguments):
    (engine, snapshots, method, samples, caches) = p_arguments
    return engine.infer(p_snapshots=snapshots, p_method=method, p_samples=samples, p_caches=caches)


def infer_snapshots(p_domain, p_policy_config, p_sampler_config, p_snapshots, p_method, p_samples=None,
                    p_workers=1):
    """Posteriors of many snapshots, split into contiguous chunks over worker processes if requested.

    Per-snapshot RNG streams make the results independent of the number of workers."""

    engine = InferenceEngine(p_domain=p_domain, p_policy_config=p_policy_config, p_sampler_config=p_sampler_config)
    caches = engine.default_caches(p_method=p_method)

    if p_workers <= 1 or len(p_snapshots) <= 1:
        return _infer_chunk((engine, p_snapshots, p_method, p_samples, caches))

    chunk_size = int(math.ceil(len(p_snapshots) / p_workers))
    arguments = [(engine, p_snapshots[start:start + chunk_size], p_method, p_samples, caches)
                 for start in range(0, len(p_snapshots), chunk_size)]

    with concurrent.futures.ProcessPoolExecutor(max_workers=p_workers) as executor:
        chunks = list(executor.map(_infer_chunk, arguments))

    return [result for chunk in chunks for result in chunk]

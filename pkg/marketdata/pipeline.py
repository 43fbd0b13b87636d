"""
Shared plumbing of the pipeline's management commands: run configuration,
output directory, error translation, the manifest entry, and readers for
the artifacts one command hands to the next.
"""
# Standard library
import logging
import os
import time
from argparse import ArgumentParser

# Third-party
from django.core.management import BaseCommand, CommandError

# First-party/Local
from dlm.exceptions import ForecastingError
from dlm.filtering import DiscountSet
from marketdata import DISCOUNTS_FILE, PARENTS_FILE, RETURNS_FILE
from marketdata.artifacts import read_table, require_artifact, write_manifest
from marketdata.config import ConfigError, load_run_config
from marketdata.panel import load_returns
from sgdlm.coupling import ParentStructure

logger = logging.getLogger(__name__)


class RunCommand(BaseCommand):
    """
    Base of the pipeline commands. Subclasses implement run(**options),
    which may return extra manifest fields, and may extend
    add_run_arguments.
    """

    command_name = None

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument(
            "--config",
            help="TOML run configuration overriding settings.SGDLM.",
        )
        parser.add_argument(
            "--output-dir",
            help="Directory for this run's artifacts (default: "
            "paths.output_dir of the configuration).",
        )
        self.add_run_arguments(parser)

    def add_run_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        self.verbosity = int(options.get("verbosity", 1))
        try:
            self.config = load_run_config(options.get("config"))
        except ConfigError as error:
            raise CommandError(f"configuration: {error}") from error
        self.output_dir = options.get("output_dir") or self.config.output_dir
        os.makedirs(self.output_dir, exist_ok=True)

        logger.info("%s: starting in %s", self.command_name, self.output_dir)
        started = time.monotonic()
        try:
            extra = self.run(**options) or {}
        except ForecastingError as error:
            raise CommandError(f"{type(error).__name__}: {error}") from error
        seconds = time.monotonic() - started
        write_manifest(
            self.output_dir, self.command_name, self.config, seconds, **extra
        )
        logger.info("%s: finished in %.1f s", self.command_name, seconds)
        self.stdout.write(
            self.style.SUCCESS(
                f"{self.command_name} finished in {seconds:.1f} s"
            )
        )

    def run(self, **options):
        raise NotImplementedError

    def log(self, message, level=1):
        if self.verbosity >= level:
            self.stdout.write(message)

    def artifact(self, filename, producer):
        return require_artifact(self.output_dir, filename, producer)

    def load_panel(self):
        return load_returns(self.artifact(RETURNS_FILE, "phase1"))

    def phase_rows(self, panel, phase):
        start, end = self.config.ranges[phase]
        return panel.rows_between(start, end)

    def load_structure(self, m):
        frame = read_table(self.artifact(PARENTS_FILE, "phase1"))
        structure = structure_from_table(frame, m)
        if structure.k != self.config.k:
            raise CommandError(
                f"parents were selected with k={structure.k} but the "
                f"configuration asks for k={self.config.k}: rerun phase1"
            )
        return structure

    def load_discounts(self):
        frame = read_table(self.artifact(DISCOUNTS_FILE, "phase2"))
        return discounts_from_table(frame)


def structure_from_table(frame, m):
    chosen = frame[frame["chosen"].astype(bool)].sort_values(
        ["series", "rank"]
    )
    parents = [[] for _ in range(m)]
    for series, candidate in zip(chosen["series"], chosen["candidate"]):
        parents[int(series)].append(int(candidate))
    return ParentStructure(parents=tuple(tuple(sp) for sp in parents))


def discounts_from_table(frame):
    """The last cross-series mean recorded for each factor."""
    means = frame[frame["ticker"] == "mean"]
    values = {}
    for factor, value in zip(means["factor"], means["value"]):
        values[factor] = float(value)
    missing = {"beta", "delta_phi", "delta_gamma"} - set(values)
    if missing:
        raise CommandError(
            f"{DISCOUNTS_FILE} has no value for {', '.join(sorted(missing))}"
        )
    return DiscountSet(**values)

# Standard library
import os

# Third-party
from django.core.management import CommandError

# First-party/Local
from evaluation.metrics import compare_parent_counts
from marketdata import COVERAGE_FILE, ERRORS_FILE, PARENT_COUNTS_FILE
from marketdata.artifacts import artifact_path, read_table, write_table
from marketdata.pipeline import RunCommand


def parse_run(value):
    """'2=runs/k2' -> (2, 'runs/k2')"""
    k, separator, directory = value.partition("=")
    if not separator or not k.strip().isdigit() or not directory:
        raise CommandError(f"--run expects k=DIRECTORY, got {value!r}")
    return int(k), directory


class Command(RunCommand):
    """
    Put evaluated runs that differ only in the number of simultaneous
    parents side by side in parent_counts.csv.

    Example:
        ./manage.py compare_parents --run 1=runs/k1 --run 2=runs/k2
    """

    help = "Compare evaluated runs with different numbers of parents."
    command_name = "compare_parents"

    def add_run_arguments(self, parser):
        parser.add_argument(
            "--run",
            action="append",
            default=[],
            help="k=DIRECTORY of an evaluated run; repeat for every k.",
        )

    def run(self, **options):
        runs = {}
        for value in options["run"]:
            k, directory = parse_run(value)
            if k in runs:
                raise CommandError(f"k={k} is given twice")
            paths = [
                os.path.join(directory, filename)
                for filename in (COVERAGE_FILE, ERRORS_FILE)
            ]
            for path in paths:
                if not os.path.exists(path):
                    raise CommandError(
                        f"{path} is missing: run `manage.py evaluate` for "
                        f"k={k} first"
                    )
            runs[k] = tuple(read_table(path) for path in paths)
        if not runs:
            raise CommandError("give at least one --run k=DIRECTORY")

        table = compare_parent_counts(runs)
        write_table(table, artifact_path(self.output_dir, PARENT_COUNTS_FILE))
        aggregate = table[table["ticker"] == "aggregate"]
        for _, row in aggregate.iterrows():
            self.log(
                f"k={row['k']}: rmse {row['sgdlm_rmse']:.6f}, "
                f"mad {row['sgdlm_mad']:.6f}"
            )
        return {"parent_counts": sorted(runs)}

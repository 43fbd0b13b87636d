# Third-party
import numpy as np

# First-party/Local
from marketdata import RETURNS_FILE, TRUTH_FILE
from marketdata.artifacts import artifact_path
from marketdata.panel import (
    business_dates,
    export_returns,
    prices_from_returns,
    write_prices,
)
from marketdata.pipeline import RunCommand
from marketdata.simulation import (
    VOLATILITY_MODELS,
    generate_truth,
    random_structure,
    simulate_synthetic,
)
from sgdlm import PHASE_SEED_TAGS


class Command(RunCommand):
    """
    Draw a synthetic panel from the simultaneous model with known parents
    and parameters.

    Writes prices.csv (starting at 100, dated on business days from the
    start of the phase-1 range, ready for phase1 --prices), returns.csv and
    truth.json with the true parents and parameter paths.
    """

    help = "Simulate a synthetic price panel with known structure."
    command_name = "simulate"

    def add_run_arguments(self, parser):
        parser.add_argument("--series", type=int, default=5)
        parser.add_argument(
            "--parents",
            type=int,
            help="Simultaneous parents per series (default: k).",
        )
        parser.add_argument("--days", type=int, default=1000)
        parser.add_argument("--coupling", type=float, default=0.6)
        parser.add_argument("--level", type=float, default=0.0)
        parser.add_argument("--precision", type=float, default=1e4)
        parser.add_argument(
            "--drift",
            type=float,
            default=0.0,
            help="Step size of the random walks of phi and gamma.",
        )
        parser.add_argument(
            "--volatility", choices=VOLATILITY_MODELS, default="static"
        )
        parser.add_argument("--seed", type=int, help="Default: seed.")

    def run(self, **options):
        config = self.config
        seed = config.seed if options["seed"] is None else options["seed"]
        k = config.k if options["parents"] is None else options["parents"]
        rng = np.random.default_rng([seed, PHASE_SEED_TAGS["simulate"]])

        structure = random_structure(options["series"], k, rng)
        truth = generate_truth(
            structure,
            options["days"],
            rng,
            level=options["level"],
            coupling=options["coupling"],
            precision=options["precision"],
            drift=options["drift"],
            volatility=options["volatility"],
            beta=config.beta,
        )
        dates = business_dates(
            options["days"] + 1, start=config.ranges["phase1"][0]
        )
        panel, truth = simulate_synthetic(truth, rng, dates=dates[1:])

        prices_path = artifact_path(self.output_dir, "prices.csv")
        write_prices(
            prices_from_returns(panel, start_date=dates[0]), prices_path
        )
        export_returns(panel, artifact_path(self.output_dir, RETURNS_FILE))
        truth.dump(artifact_path(self.output_dir, TRUTH_FILE))
        self.log(
            f"{len(panel)} days of {panel.m} series ending {panel.dates[-1]}"
            f" written to {prices_path}"
        )
        return {"simulation_seed": seed, "series": panel.m, "parents": k}

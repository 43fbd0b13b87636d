# Third-party
import pandas as pd

# First-party/Local
from marketdata import PARENTS_FILE, RETURNS_FILE
from marketdata.artifacts import artifact_path, write_table
from marketdata.panel import export_returns, ingest_prices
from marketdata.pipeline import RunCommand
from sgdlm.selection import select_parents, starting_prior


class Command(RunCommand):
    """
    Select the simultaneous parents of every series from the phase-1 range
    of the price file.

    Writes returns.csv (the whole ingested panel, read by the later
    phases) and parents.csv (every candidate of every series, ranked by
    effect size, with the chosen ones flagged).
    """

    help = "Phase 1: ingest prices and select simultaneous parents."
    command_name = "phase1"

    def add_run_arguments(self, parser):
        parser.add_argument(
            "--prices",
            help="Price CSV to ingest (default: paths.prices of the "
            "configuration).",
        )

    def run(self, **options):
        config = self.config
        prices = options.get("prices") or config.prices
        panel = ingest_prices(prices, forward_fill=config.forward_fill)
        export_returns(panel, artifact_path(self.output_dir, RETURNS_FILE))
        self.log(
            f"{panel.price_rows} price rows, {len(panel)} returns, "
            f"{panel.m} tickers"
        )

        first, last = self.phase_rows(panel, "phase1")
        prior = starting_prior(
            panel.m,
            config.prior["R_phi"],
            config.prior["R_gamma"],
            config.prior["r0"],
            config.prior["c0"],
        )
        reports = select_parents(
            panel.values[first : last + 1],
            config.k,
            prior,
            config.discounts,
            workers=config.workers,
        )

        rows = []
        for report in reports:
            chosen = set(report.chosen)
            for rank, (candidate, effect) in enumerate(report.ranking, 1):
                rows.append(
                    {
                        "series": report.series,
                        "ticker": panel.tickers[report.series],
                        "rank": rank,
                        "candidate": candidate,
                        "candidate_ticker": panel.tickers[candidate],
                        "effect_size": effect,
                        "chosen": candidate in chosen,
                    }
                )
            self.log(
                f"{panel.tickers[report.series]}: "
                + ", ".join(panel.tickers[j] for j in report.chosen),
                level=2,
            )
        write_table(
            pd.DataFrame(rows), artifact_path(self.output_dir, PARENTS_FILE)
        )
        return {
            "price_rows": panel.price_rows,
            "return_rows": len(panel),
            "training_rows": last - first + 1,
        }

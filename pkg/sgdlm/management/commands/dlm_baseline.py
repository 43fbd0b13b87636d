# Third-party
import pandas as pd

# First-party/Local
from marketdata import BASELINE_FILE
from marketdata.artifacts import artifact_path, write_table
from marketdata.pipeline import RunCommand
from sgdlm.selection import dlm_baseline, starting_prior


class Command(RunCommand):
    """
    Univariate local-level DLM for every series: discounts chosen on the
    phase-2 range, one-step forecasts over the phase-3 range. Writes
    baseline_forecasts.csv in the layout of forecasts.csv.
    """

    help = "Forecast every series with its own local-level DLM."
    command_name = "dlm_baseline"

    def run(self, **options):
        config = self.config
        panel = self.load_panel()
        train = self.phase_rows(panel, "phase2")
        test = self.phase_rows(panel, "phase3")
        prior = starting_prior(
            1,
            config.prior["R_phi"],
            config.prior["R_gamma"],
            config.prior["r0"],
            config.prior["c0"],
        )
        baseline = dlm_baseline(
            panel.values,
            prior,
            config.grids,
            train,
            test,
            provisional=config.discounts,
            workers=config.workers,
        )

        rows = []
        for offset, t in enumerate(range(test[0], test[1] + 1)):
            for i, ticker in enumerate(panel.tickers):
                rows.append(
                    {
                        "date": str(panel.dates[t]),
                        "ticker": ticker,
                        "y_hat": baseline.y_hat[offset, i],
                        "variance": baseline.variance[offset, i],
                        "observed": panel.values[t, i],
                    }
                )
        for ticker, discounts in zip(panel.tickers, baseline.discounts):
            self.log(
                f"{ticker}: beta {discounts.beta:.3f}, "
                f"delta {discounts.delta_phi:.3f}",
                level=2,
            )
        write_table(
            pd.DataFrame(rows), artifact_path(self.output_dir, BASELINE_FILE)
        )
        return {"forecast_days": test[1] - test[0] + 1}

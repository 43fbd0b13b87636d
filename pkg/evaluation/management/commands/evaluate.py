# Standard library
import os

# Third-party
from django.core.management import CommandError

# First-party/Local
from evaluation.metrics import (
    coverage,
    diagnostics_series,
    errors_table,
    interval_specs,
    trend_table,
)
from marketdata import (
    BASELINE_FILE,
    COVERAGE_FILE,
    DIAGNOSTICS_FILE,
    ERRORS_FILE,
    FORECASTS_FILE,
    PHASE3_STATE_FILE,
    SMA_FILE,
)
from marketdata.artifacts import (
    StateStore,
    artifact_path,
    read_table,
    write_table,
)
from marketdata.pipeline import RunCommand
from sgdlm.engine import DayDiagnostics


def wide(frame, column):
    """T x m array of `column` from a long forecasts table."""
    table = frame.pivot(index="date", columns="ticker", values=column)
    return table.sort_index()


class Command(RunCommand):
    """
    Score the phase-3 forecasts: interval coverage at every configured
    level, RMSE/MAD against the local-level baseline when its forecasts are
    present, moving-average trends and the daily importance-sampling
    diagnostics.
    """

    help = "Write coverage, error, trend and diagnostics tables."
    command_name = "evaluate"

    def run(self, **options):
        config = self.config
        forecasts = read_table(self.artifact(FORECASTS_FILE, "phase3"))
        if forecasts.empty:
            raise CommandError(f"{FORECASTS_FILE} is empty: run phase3")
        tickers = list(dict.fromkeys(forecasts["ticker"]))
        observed = wide(forecasts, "observed")[tickers]
        y_hat = wide(forecasts, "y_hat")[tickers]
        variance = wide(forecasts, "variance")[tickers]

        specs = interval_specs(
            config.levels, config.z_values, config.full_precision_z
        )
        table = coverage(
            observed.to_numpy(),
            y_hat.to_numpy(),
            variance.to_numpy(),
            config.big_k,
            specs,
            tickers=tickers,
        )
        write_table(
            table.to_frame(), artifact_path(self.output_dir, COVERAGE_FILE)
        )
        for spec, value in zip(specs, table.aggregate):
            self.log(f"{spec.label}% intervals: {value:.1f}% coverage")

        baseline = None
        baseline_path = artifact_path(self.output_dir, BASELINE_FILE)
        if os.path.exists(baseline_path):
            baseline_frame = read_table(baseline_path)
            baseline = wide(baseline_frame, "y_hat")[tickers]
            if not baseline.index.equals(y_hat.index):
                raise CommandError(
                    f"{BASELINE_FILE} and {FORECASTS_FILE} cover different "
                    "days: rerun dlm_baseline"
                )
            baseline = baseline.to_numpy()
        write_table(
            errors_table(
                tickers, observed.to_numpy(), y_hat.to_numpy(), baseline
            ),
            artifact_path(self.output_dir, ERRORS_FILE),
        )

        window = min(config.sma_window, len(observed))
        write_table(
            trend_table(
                observed.index,
                tickers,
                observed.to_numpy(),
                y_hat.to_numpy(),
                window,
            ),
            artifact_path(self.output_dir, SMA_FILE),
        )

        store = StateStore(self.artifact(PHASE3_STATE_FILE, "phase3"))
        days = store.days()
        diagnostics = [
            DayDiagnostics(
                ess=record["ess"],
                kl=record["kl"],
                kl_bound=record["kl_bound"],
                sample_size=record["sample_size"],
            )
            for _, _, _, record in days
        ]
        frame = diagnostics_series(
            diagnostics,
            [date for _, date, _, _ in days],
            config.ess_flag_fraction,
        )
        write_table(frame, artifact_path(self.output_dir, DIAGNOSTICS_FILE))
        flagged = int(frame["flagged"].sum())
        if flagged:
            self.log(f"{flagged} days with a low effective sample size")
        return {
            "forecast_days": len(observed),
            "baseline": baseline is not None,
            "flagged_days": flagged,
        }

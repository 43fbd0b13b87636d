# Standard library
import logging

# Third-party
import pandas as pd
from django.core.management import CommandError

# First-party/Local
from marketdata import FORECASTS_FILE, PHASE2_STATE_FILE, PHASE3_STATE_FILE
from marketdata.artifacts import StateStore, artifact_path, write_table
from marketdata.pipeline import RunCommand
from sgdlm.engine import forecast_days

logger = logging.getLogger(__name__)


def forecasts_frame(panel, store):
    """forecasts.csv rows from the completed days of the state log."""
    rows = []
    for day, date, _, diagnostics in store.days():
        for i, ticker in enumerate(panel.tickers):
            rows.append(
                {
                    "date": date,
                    "ticker": ticker,
                    "y_hat": diagnostics["y_hat"][i],
                    "variance": diagnostics["variance"][i],
                    "observed": panel.values[day, i],
                }
            )
    return pd.DataFrame(
        rows, columns=["date", "ticker", "y_hat", "variance", "observed"]
    )


class Command(RunCommand):
    """
    Run the daily SGDLM forecast loop over the phase-3 range, starting from
    the phase-2 priors.

    Every finished day is appended to phase3_state.jsonl (next-day priors,
    forecast and diagnostics), so an interrupted run picks up after its
    last finished day; --restart throws the log away instead. forecasts.csv
    is rebuilt from the log at the end.
    """

    help = "Phase 3: daily one-step forecasts with the SGDLM."
    command_name = "phase3"

    def add_run_arguments(self, parser):
        parser.add_argument(
            "--restart",
            action="store_true",
            help="Discard any saved progress and start from the first day.",
        )
        parser.add_argument(
            "--days",
            type=int,
            help="Stop after this many more days (the run can be resumed).",
        )

    def run(self, **options):
        config = self.config
        panel = self.load_panel()
        structure = self.load_structure(panel.m)
        discounts = self.load_discounts()
        first, last = self.phase_rows(panel, "phase3")
        total = last - first + 1

        starting = StateStore(self.artifact(PHASE2_STATE_FILE, "phase2"))
        start = starting.last_complete_day()
        if start is None:
            raise CommandError(
                f"{starting.path} holds no priors: rerun phase2"
            )
        priors = start[2]

        store = StateStore(artifact_path(self.output_dir, PHASE3_STATE_FILE))
        if options.get("restart"):
            store.reset()
        store.discard_incomplete()
        resumed = store.last_complete_day()
        if resumed is not None:
            day, date, priors, _ = resumed
            if not first <= day <= last:
                raise CommandError(
                    f"{store.path} ends on {date}, outside the phase-3 range: "
                    "use --restart"
                )
            first = day + 1
            logger.info("resuming after %s", date)
            self.log(f"Resuming after {date}")

        days = range(first, last + 1)
        if options.get("days") is not None:
            days = days[: options["days"]]
        for t, result in forecast_days(
            panel.values,
            structure,
            discounts,
            priors,
            config.big_k,
            config.big_n,
            config.seed,
            days,
            config.ess_floor,
        ):
            diagnostics = result.diagnostics
            if diagnostics.ess < config.ess_flag_fraction * config.big_n:
                logger.warning(
                    "%s: effective sample size %.0f of %d",
                    panel.dates[t],
                    diagnostics.ess,
                    config.big_n,
                )
            store.append_day(
                t,
                panel.dates[t],
                panel.tickers,
                result.next_priors,
                {
                    "ess": diagnostics.ess,
                    "kl": diagnostics.kl,
                    "kl_bound": diagnostics.kl_bound,
                    "sample_size": diagnostics.sample_size,
                    "singular_fraction": result.forecast.singular_fraction,
                    "y_hat": result.forecast.y_hat.tolist(),
                    "variance": result.forecast.variances.tolist(),
                },
            )
            self.log(f"{panel.dates[t]}: ess {diagnostics.ess:.0f}", level=2)

        frame = forecasts_frame(panel, store)
        write_table(frame, artifact_path(self.output_dir, FORECASTS_FILE))
        done = frame["date"].nunique()
        self.log(f"{done} of {total} days forecast")
        return {"forecast_days": done}

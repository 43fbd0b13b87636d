# Third-party
import numpy as np
import pandas as pd

# First-party/Local
from marketdata import DISCOUNTS_FILE, PHASE2_STATE_FILE
from marketdata.artifacts import StateStore, artifact_path, write_table
from marketdata.pipeline import RunCommand
from sgdlm.selection import run_phase2, select_discounts, starting_prior


class Command(RunCommand):
    """
    Select the discount factors on the phase-2 range, then run the update
    half of the SGDLM cycle over the same range to get the phase-3
    starting priors.

    Writes discounts.csv (per-series argmax of every sweep, then the
    cross-series mean applied to all series) and phase2_state.jsonl (the
    starting priors).
    """

    help = "Phase 2: select discount factors and phase-3 starting priors."
    command_name = "phase2"

    def run(self, **options):
        config = self.config
        panel = self.load_panel()
        structure = self.load_structure(panel.m)
        first, last = self.phase_rows(panel, "phase2")
        prior = starting_prior(
            structure.state_dimension,
            config.prior["R_phi"],
            config.prior["R_gamma"],
            config.prior["r0"],
            config.prior["c0"],
        )

        discounts, choices = select_discounts(
            panel.values,
            structure,
            prior,
            config.discounts,
            config.grids,
            search_order=config.search_order,
            iterations=config.iterations,
            rows=(first, last),
            workers=config.workers,
        )
        rows = []
        for sweep, choice in enumerate(choices):
            for ticker, value in zip(panel.tickers, choice.per_series):
                rows.append((sweep, choice.factor, ticker, value))
            rows.append((sweep, choice.factor, "mean", choice.mean))
            self.log(f"{choice.factor} = {choice.mean:.6f}")
        write_table(
            pd.DataFrame(rows, columns=["sweep", "factor", "ticker", "value"]),
            artifact_path(self.output_dir, DISCOUNTS_FILE),
        )

        priors, diagnostics = run_phase2(
            panel.values,
            structure,
            discounts,
            prior,
            config.big_n,
            config.seed,
            range(first, last + 1),
            config.ess_floor,
        )
        store = StateStore(artifact_path(self.output_dir, PHASE2_STATE_FILE))
        store.reset()
        store.append_day(
            last,
            panel.dates[last],
            panel.tickers,
            priors,
            {
                **discounts.as_dict(),
                "mean_ess": float(np.mean([d.ess for d in diagnostics])),
                "min_ess": float(np.min([d.ess for d in diagnostics])),
            },
        )
        return discounts.as_dict()

STATE_RECORD_VERSION = 1

# Artifact file names inside a run's output directory.
RETURNS_FILE = "returns.csv"
PARENTS_FILE = "parents.csv"
DISCOUNTS_FILE = "discounts.csv"
PHASE2_STATE_FILE = "phase2_state.jsonl"
PHASE3_STATE_FILE = "phase3_state.jsonl"
FORECASTS_FILE = "forecasts.csv"
DIAGNOSTICS_FILE = "diagnostics.csv"
BASELINE_FILE = "baseline_forecasts.csv"
COVERAGE_FILE = "coverage.csv"
ERRORS_FILE = "errors.csv"
SMA_FILE = "sma.csv"
PARENT_COUNTS_FILE = "parent_counts.csv"
MANIFEST_FILE = "manifest.txt"
TRUTH_FILE = "truth.json"

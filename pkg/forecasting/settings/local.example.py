# First-party/Local
from forecasting.settings.dev import *  # noqa: F401, F403

# Override settings here
# SGDLM["workers"] = 4  # noqa: F405
# SGDLM["paths"]["prices"] = "/path/to/prices.csv"  # noqa: F405

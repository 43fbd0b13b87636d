# Use **ONLY** for ephemeral deployments (ex. GitHub Actions).

# Standard library
import os
import tempfile

# Third-party
from django.core.management.utils import get_random_secret_key

# First-party/Local
from forecasting.settings.base import *  # noqa: F403

DEBUG = True

SECRET_KEY = get_random_secret_key()

# Keep CI artifacts out of the checkout.
SGDLM["paths"]["output_dir"] = os.getenv(  # noqa: F405
    "SGDLM_OUTPUT_DIR", os.path.join(tempfile.gettempdir(), "sgdlm-runs")
)

LOGGING["root"]["level"] = "WARNING"  # noqa: F405

# Standard library
import os
import sys

# First-party/Local
from forecasting.settings.base import *  # noqa: F403

DEBUG = True

SECRET_KEY = os.environ.get(
    "SECRET_KEY", "dev-only-8v#k2w!q0m3z@x7n1c$r5t9y4u6i"
)

# Special test settings
if "test" in sys.argv:
    LOGGING["root"]["handlers"] = []  # noqa: F405

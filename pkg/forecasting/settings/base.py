"""
Django settings for the forecasting project.
"""
# Standard library
import os

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
# SETTINGS_DIR is where this settings file is
SETTINGS_DIR = os.path.dirname(os.path.abspath(__file__))
# PROJECT_DIR is the directory under root that contains the settings directory
#             and other global stuff.
PROJECT_DIR = os.path.dirname(SETTINGS_DIR)
# ROOT_DIR is the top directory under source control
ROOT_DIR = os.path.dirname(PROJECT_DIR)

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("SECRET_KEY")

# Application definition

INSTALLED_APPS = [
    "dlm",
    "sgdlm",
    "evaluation",
    "marketdata",
]

# The engine keeps all of its state in flat files (see marketdata.artifacts),
# there is no database.
DATABASES = {}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "basic": {
            "format": "%(asctime)s %(name)-20s %(levelname)-8s %(message)s",
        },
    },
    "handlers": {
        "console": {
            "level": "INFO",
            "class": "logging.StreamHandler",
            "formatter": "basic",
        },
    },
    "loggers": {
        # Per-day importance sampling chatter is DEBUG; keep it quiet unless
        # asked for.
        "sgdlm.engine": {
            "level": "INFO",
            "propagate": True,
        },
    },
    "root": {
        "handlers": [
            "console",
        ],
        "level": "INFO",
    },
}

USE_I18N = False

USE_TZ = False

TIME_ZONE = "UTC"

# Where a run writes its artifacts (parents.csv, forecasts.csv, ...) unless
# the run configuration names another directory.
SGDLM_OUTPUT_DIR = os.getenv(
    "SGDLM_OUTPUT_DIR", os.path.join(ROOT_DIR, "runs", "default")
)

# Daily closing prices, header "date,TICKER1,TICKER2,...".
SGDLM_PRICES = os.getenv(
    "SGDLM_PRICES", os.path.join(ROOT_DIR, "data", "prices.csv")
)

# Defaults for every run configuration key. A run's TOML file overrides
# these, see marketdata.config.load_run_config.
SGDLM = {
    # number of simultaneous parents per series
    "k": 1,
    # forecast simulation size and importance sample size
    "big_k": 2000,
    "big_n": 2000,
    "seed": 0,
    # Provisional discount factors held fixed while another factor is
    # searched.
    "beta": 0.95,
    "delta_phi": 0.99,
    "delta_gamma": 0.95,
    "grid": {
        "delta_gamma": [0.859, 0.894, 0.929, 0.964, 0.999],
        "delta_phi": [round(0.85 + 0.005 * i, 3) for i in range(30)]
        + [0.999],
        "beta": [round(0.85 + 0.005 * i, 3) for i in range(30)] + [0.999],
    },
    "search_order": ["delta_gamma", "delta_phi", "beta"],
    "iterations": 1,
    # decouple refuses to fit from fewer effective draws than this
    "ess_floor": 10.0,
    # days with ess below this fraction of N are flagged
    "ess_flag_fraction": 0.66,
    "prior": {
        "r0": 5.0,
        "c0": 0.001,
        "R_phi": 0.0001,
        "R_gamma": 0.01,
    },
    "levels": [99, 95, 90, 80, 50, 20, 10],
    # explicit z per level; empty uses the rounded normal quantiles
    "z_values": [],
    "full_precision_z": False,
    "sma_window": 100,
    "workers": 1,
    "data": {
        "forward_fill": False,
    },
    "phase1": {"range": ["2014-01-01", "2016-12-31"]},
    "phase2": {"range": ["2017-01-01", "2018-12-31"]},
    "phase3": {"range": ["2019-01-01", "2022-06-30"]},
    "paths": {
        "prices": SGDLM_PRICES,
        "output_dir": SGDLM_OUTPUT_DIR,
    },
}

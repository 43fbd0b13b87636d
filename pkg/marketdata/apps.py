# Third-party
from django.apps import AppConfig


class MarketdataConfig(AppConfig):
    name = "marketdata"  # required: must be the Full dotted path to the app
    label = "marketdata"  # optional: app label, must be unique in project
    verbose_name = "Market data"  # optional

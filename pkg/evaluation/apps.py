# Third-party
from django.apps import AppConfig


class EvaluationConfig(AppConfig):
    name = "evaluation"  # required: must be the Full dotted path to the app
    label = "evaluation"  # optional: app label, must be unique in project
    verbose_name = "Forecast evaluation"  # optional

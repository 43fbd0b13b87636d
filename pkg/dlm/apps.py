# Third-party
from django.apps import AppConfig


class DlmConfig(AppConfig):
    name = "dlm"  # required: must be the Full dotted path to the app
    label = "dlm"  # optional: app label, must be unique in Django project
    verbose_name = "Dynamic linear models"  # optional

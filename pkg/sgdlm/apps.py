# Third-party
from django.apps import AppConfig


class SgdlmConfig(AppConfig):
    name = "sgdlm"  # required: must be the Full dotted path to the app
    label = "sgdlm"  # optional: app label, must be unique in Django project
    verbose_name = "Simultaneous graphical DLM"  # optional

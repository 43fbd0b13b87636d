# Configure Django for pytest the same way manage.py does.

# Standard library
import os

# Third-party
import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "forecasting.settings.dev")
django.setup()

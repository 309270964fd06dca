"""
Django settings for the wstate_lab project.

There is no web surface: Django provides the settings layer, the
``manage.py`` command runner for the ``linopt`` commands and the test runner.
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

SECRET_KEY = os.getenv("SECRET_KEY", "wstate-lab-not-a-web-app")

DEBUG = False

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'linopt.apps.LinoptConfig',
]

# No models are persisted; results go to flat files.
DATABASES = {}

# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

LINOPT_DEBUG = os.getenv("LINOPT_DEBUG", "False") == "True"
LINOPT_LOG_LEVEL = "DEBUG" if LINOPT_DEBUG else os.getenv("LINOPT_LOG_LEVEL", "INFO")

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'linopt': {
            'handlers': ['console'],
            'level': LINOPT_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Simulator configuration record, read through linopt.conf.get_config()
LINOPT = {
    'TOTAL_CUTOFF': 2,
    'TOLERANCES': {
        'hermitian': 1e-12,
        'psd': 1e-10,
        'trace': 1e-12,
        'unitary': 1e-12,
        'normalization': 1e-12,
        'violation': 1e-12,
        'agreement': 1e-12,
    },
    'QUADRATURE_NODES': 4,
    'PHASE_NODES': 4,
    'MONTE_CARLO_SAMPLES': 10 ** 6,
    'GOLDEN_TOL': 1e-10,
    'BISECTION_XTOL': 1e-10,
    'SCHEMA_VERSION': '1.0',
    'DEFAULT_SEED': int(os.getenv("LINOPT_SEED", 20061)),
}

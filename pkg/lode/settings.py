"""
Django settings for the lode project.

Two-view container localisation and dimension estimation, driven through
management commands. Runtime knobs for the pipeline live in ``LODE``.
"""
from __future__ import annotations

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Security and environment
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'dev-secret-key-change')
DEBUG = os.getenv('DJANGO_DEBUG', '1') == '1'
ALLOWED_HOSTS: list[str] = os.getenv('DJANGO_ALLOWED_HOSTS', 'localhost,127.0.0.1').split(',')

# Application definition
INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    # Third-party
    'rest_framework',
    # Local apps
    'lode_app',
]

# Database - default sqlite for dev, Postgres via env for stored evaluation runs
if os.getenv('POSTGRES_DB'):
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': os.getenv('POSTGRES_DB'),
            'USER': os.getenv('POSTGRES_USER', 'postgres'),
            'PASSWORD': os.getenv('POSTGRES_PASSWORD', ''),
            'HOST': os.getenv('POSTGRES_HOST', 'localhost'),
            'PORT': os.getenv('POSTGRES_PORT', '5432'),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
        }
    }

# Pipeline runtime configuration. Outputs never depend on these values.
LODE = {
    'WORKERS': max(1, int(os.getenv('LODE_WORKERS', '1'))),
    'RENDER_CHUNK_ROWS': max(1, int(os.getenv('LODE_RENDER_CHUNK_ROWS', '64'))),
}

# Logging: diagnostics go to stderr, stdout is reserved for command JSON output
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'lode_app': {
            'handlers': ['console'],
            'level': os.getenv('LODE_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

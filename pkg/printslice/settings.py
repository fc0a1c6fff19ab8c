"""
Django settings for the printslice project.

Slicing knobs live in the SLICER dict at the bottom; every entry can be
overridden from the environment or from a .env file next to manage.py.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')


def env_bool(name, default):
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-printslice-local-development-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = env_bool('DEBUG', True)

ALLOWED_HOSTS = [h for h in os.getenv('ALLOWED_HOSTS', '').split(',') if h]


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'django.contrib.humanize',

    # My apps
    'meshes',
    'slicing',
    'microstructure',

    # Third-party apps
    'crispy_forms',
    'crispy_bootstrap5',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'printslice.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [BASE_DIR / 'templates'],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'printslice.wsgi.application'


# Database
# https://docs.djangoproject.com/en/5.1/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.1/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Static files (CSS, JavaScript, Images)
STATIC_URL = '/static/'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Crispy Forms
CRISPY_ALLOWED_TEMPLATE_PACKS = ["bootstrap5"]
CRISPY_TEMPLATE_PACK = "bootstrap5"


# Logging
LOG_LEVEL = os.getenv('SLICER_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
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
        'meshes': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'slicing': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'microstructure': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
        'utils': {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False},
    },
}


# Slicer
SLICER = {
    'DEFAULT_NU': int(os.getenv('SLICER_DEFAULT_NU', 5)),
    'LOOP_MODE': os.getenv('SLICER_LOOP_MODE', 'sound'),
    # Adds the Cartesian second differences to the offset stencil
    'WIDENED_STENCIL': env_bool('SLICER_WIDENED_STENCIL', False),
    'ROUNDING_GUARD_ULPS': int(os.getenv('SLICER_ROUNDING_GUARD_ULPS', 16)),
    'VALIDATION_SAMPLES': int(os.getenv('SLICER_VALIDATION_SAMPLES', 512)),
    'TEMPLATE': os.getenv('SLICER_TEMPLATE', 'edge-frame'),
    'RADIUS_FRACTION': float(os.getenv('SLICER_RADIUS_FRACTION', 0.1)),
    'SAMPLES_PER_BEAM': int(os.getenv('SLICER_SAMPLES_PER_BEAM', 5)),
    'SLAB': float(os.getenv('SLICER_SLAB', 0.0)),
    'JOBS': int(os.getenv('SLICER_JOBS', 1)),
    'ORACLE_MAX_N': int(os.getenv('SLICER_ORACLE_MAX_N', 64)),
}

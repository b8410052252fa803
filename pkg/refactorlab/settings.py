from pathlib import Path

import os
from dotenv import load_dotenv

# Cargar las variables del archivo .env
load_dotenv()


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only management commands run in this project; the key never signs anything
# that leaves the process.
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'refactorlab-local-only')

DEBUG = os.getenv('DJANGO_DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'denoising',
]

# No models are stored; experiment results are plot tables on disk.
DATABASES = {}

USE_I18N = False

USE_TZ = True

TIME_ZONE = 'UTC'


# Simulation defaults. Every value can be overridden from the environment
# (or a .env file) and, per run, from a command's --config file or flags.

DENOISING = {
    'REPLICATES': int(os.getenv('DENOISING_REPLICATES', 50)),
    'THREADS': int(os.getenv('DENOISING_THREADS', 1)),
    'MASTER_SEED': int(os.getenv('DENOISING_MASTER_SEED', 0)),
    'VERIFY_MIN_FREQUENCY': float(os.getenv('DENOISING_VERIFY_MIN_FREQUENCY', 0.95)),
    'THEORY_C': float(os.getenv('DENOISING_THEORY_C', 64)),
    'THEORY_C0': float(os.getenv('DENOISING_THEORY_C0', 0.05)),
    'THEORY_ALPHA': float(os.getenv('DENOISING_THEORY_ALPHA', 4)),
    'THEORY_EPSILON': float(os.getenv('DENOISING_THEORY_EPSILON', 0.1)),
    'TABLE_DIGITS': int(os.getenv('DENOISING_TABLE_DIGITS', 12)),
}


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
        'denoising': {
            'handlers': ['console'],
            'level': os.getenv('DENOISING_LOG_LEVEL', 'INFO'),
        },
    },
}

from pathlib import Path
import os
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('CADENCE_SECRET_KEY', 'cadence-offline-pipeline')

DEBUG = False

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'rest_framework',
    'core',
    'numcore',
    'tokenizer',
    'datapipe',
    'model',
    'trainer',
    'evaluator',
]

# The pipeline is file based; nothing touches a database.
DATABASES = {}

USE_TZ = True


# Cadence pipeline
# Log level for every module logger: error, info or debug.

CADENCE_LOG = os.environ.get('CADENCE_LOG', 'info').lower()

if CADENCE_LOG not in ('error', 'info', 'debug'):
    CADENCE_LOG = 'info'

CADENCE_DEFAULT_SEED = int(os.environ.get('CADENCE_DEFAULT_SEED', '0'))

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
            'stream': 'ext://sys.stderr',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': CADENCE_LOG.upper(),
    },
}

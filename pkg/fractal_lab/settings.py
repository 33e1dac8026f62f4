"""
Django settings for the fractal_lab project.

The project hosts the numerical apps (ifs_core, grassmannian, dimension,
sweep, transversality) and the experiments app whose management commands are
the command-line surface.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# No request is ever served in production; the key only satisfies Django's checks.
SECRET_KEY = os.environ.get('FRACTAL_SECRET_KEY', 'django-insecure-fractal-lab-local-only')

DEBUG = os.environ.get('FRACTAL_DEBUG', 'False') == 'True'

ALLOWED_HOSTS = ['localhost', '127.0.0.1']


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'rest_framework',
    'ifs_core',
    'grassmannian',
    'dimension',
    'sweep',
    'transversality',
    'experiments',
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

ROOT_URLCONF = 'fractal_lab.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
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


# Database
# Run summaries and verdicts are kept in a local SQLite file.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


STATIC_URL = '/static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
# Project apps log through the console handler; FRACTAL_LOG_LEVEL tunes verbosity.

FRACTAL_LOG_LEVEL = os.environ.get('FRACTAL_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': FRACTAL_LOG_LEVEL,
            'propagate': False,
        }
        for app in ('ifs_core', 'grassmannian', 'dimension', 'sweep', 'transversality', 'experiments')
    },
}


# REST Framework Settings
# Serializers are only used to validate system files and experiment configs.
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
}


# Attractor generation
# Maximum number of cylinder words a single point cloud may enumerate.
CLOUD_POINT_BUDGET = 2_000_000

# Orthogonal parts and subspace frames must be orthonormal within this tolerance.
ORTHOGONALITY_TOLERANCE = 1e-12

# Transformation groups: matrices closer than the tolerance are the same
# element; closure stops (possibly infinite group) past the budget.
GROUP_MATRIX_TOLERANCE = 1e-9
GROUP_ELEMENT_BUDGET = 10_000

# Strong separation certificate: deepest cylinder level and the most words
# examined per level.
SEPARATION_MAX_DEPTH = 6
SEPARATION_WORD_BUDGET = 5_000

# Grassmannian nets
NET_MEMBER_BUDGET = 20_000
NET_OVERSAMPLE_FACTOR = 4.0

# Box counting
BOX_COUNT_JITTERS = 4
BOX_COUNT_MIN_CELLS = 10

# Hausdorff content: the multi-scale cover never uses more cells than this.
CONTENT_COVER_BUDGET = 50_000

# Sweeps: eta = ETA_FACTOR * delta in the fixed mode; fibers with fewer
# points than MIN_FIBER_POINTS are not regressed.
ETA_FACTOR = 4.0
MIN_FIBER_POINTS = 8
ALMOST_DC_TOLERANCE = 0.1

# Transversality scan: words enumerated per depth and candidate word pairs kept.
TRANSVERSALITY_WORD_BUDGET = 300_000
TRANSVERSALITY_PAIR_BUDGET = 200_000

# Experiments
EXPERIMENT_WORKERS = os.cpu_count() or 1
EXPERIMENT_OUTPUT_DIR = Path(os.environ.get('FRACTAL_OUTPUT_DIR', BASE_DIR / 'artifacts'))

# If True, every CLI run stores its verdicts in the database (best effort).
RECORD_EXPERIMENT_RUNS = True

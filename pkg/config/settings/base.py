"""
Base django settings for the layered transport solver.
These settings are shared across all environments.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Load environment variables
# Try to load .env.local first, then .env as a fallback
env_files = [BASE_DIR / '.env.local', BASE_DIR / '.env']
for env_file in env_files:
    if env_file.exists():
        load_dotenv(env_file)
        break

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-change-me-in-production')

DEBUG = os.getenv('DEBUG', 'False').lower() in ('1', 'true', 'yes')

# Application definition
INSTALLED_APPS = [
    # Local apps
    'apps.transport',
]

# The solvers keep no state between runs
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'Europe/London'
USE_I18N = True
USE_TZ = True

# Numerical Laplace inversion (number of poles of the rational approximation)
INVERSION_ORDER = int(os.getenv('INVERSION_ORDER', '14'))

# Rational approximation construction
CF_CHEBYSHEV_TERMS = int(os.getenv('CF_CHEBYSHEV_TERMS', '75'))
CF_FFT_POINTS = int(os.getenv('CF_FFT_POINTS', '1024'))
CF_SCALE = float(os.getenv('CF_SCALE', '9'))

# Warn when max v*thickness/D exceeds this value
ADVECTION_WARNING_PECLET = float(os.getenv('ADVECTION_WARNING_PECLET', '100'))

# Finite volume reference solver
FVM_NODES = int(os.getenv('FVM_NODES', '601'))
FVM_RTOL = float(os.getenv('FVM_RTOL', '1e-8'))
FVM_ATOL = float(os.getenv('FVM_ATOL', '1e-10'))

# Output files
OUTPUT_DIR = Path(os.getenv('OUTPUT_DIR', BASE_DIR / 'output'))
CSV_SIGNIFICANT_DIGITS = int(os.getenv('CSV_SIGNIFICANT_DIGITS', '9'))

import os
import sys
from pathlib import Path

import django

sys.path.insert(0, str(Path(__file__).resolve().parent / 'app'))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'cadence.settings')
django.setup()

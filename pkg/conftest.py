import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'wstate_lab.settings.develop')
django.setup()

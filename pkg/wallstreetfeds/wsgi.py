"""
WSGI config for the WallStreetFeds simulator.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'wallstreetfeds.settings')

application = get_wsgi_application()

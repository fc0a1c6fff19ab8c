"""
WSGI entry point for serving the slicer's web pages (mesh import, slice runs).
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'printslice.settings')

application = get_wsgi_application()

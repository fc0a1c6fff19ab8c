"""
ASGI entry point; the slice views are synchronous, so this is only a wrapper.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'printslice.settings')

application = get_asgi_application()

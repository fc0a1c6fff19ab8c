from django.apps import AppConfig


class MicrostructureConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'microstructure'

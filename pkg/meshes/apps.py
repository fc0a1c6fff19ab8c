from django.apps import AppConfig


class MeshesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'meshes'
    verbose_name = 'Deformation meshes'

from django.contrib import admin
from .models import Mesh, DeformationMap


class DeformationMapInline(admin.TabularInline):
    model = DeformationMap
    fields = ['map_id', 'z_min', 'z_max', 'mu_z', 'jacobian_min', 'jacobian_ok']
    readonly_fields = fields
    extra = 0
    can_delete = False


@admin.register(Mesh)
class MeshAdmin(admin.ModelAdmin):
    list_display = ['name', 'version', 'degree', 'created_at']
    search_fields = ['name', 'description']
    inlines = [DeformationMapInline]


admin.site.register(DeformationMap)

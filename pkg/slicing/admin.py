from django.contrib import admin
from .models import SliceRun, PlaneStat


class PlaneStatInline(admin.TabularInline):
    model = PlaneStat
    fields = ['index', 'z', 'active_maps', 'activations', 'cuboid_tests', 'wall_time']
    readonly_fields = fields
    extra = 0
    can_delete = False


@admin.register(SliceRun)
class SliceRunAdmin(admin.ModelAdmin):
    list_display = ['id', 'mesh', 'nu', 'loop_mode', 'status', 'total_activations', 'created_at']
    list_filter = ['status', 'loop_mode', 'template']
    search_fields = ['mesh__name']
    inlines = [PlaneStatInline]


admin.site.register(PlaneStat)

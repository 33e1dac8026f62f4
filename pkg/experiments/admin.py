from django.contrib import admin

from .models import ExperimentRun, VerdictRecord


class VerdictRecordInline(admin.TabularInline):
    model = VerdictRecord
    extra = 0
    readonly_fields = ['check_name', 'outcome', 'measured', 'bound', 'detail']


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['kind', 'system_name', 'seed', 'exit_code', 'created_at']
    list_filter = ['kind', 'exit_code', 'created_at']
    search_fields = ['system_name', 'output_dir']
    readonly_fields = ['created_at', 'updated_at']
    inlines = [VerdictRecordInline]
    fieldsets = (
        ('Run', {
            'fields': ('kind', 'system_name', 'seed', 'exit_code')
        }),
        ('Configuration', {
            'fields': ('config', 'output_dir')
        }),
        ('Timestamps', {
            'fields': ('created_at', 'updated_at'),
            'classes': ('collapse',)
        }),
    )


@admin.register(VerdictRecord)
class VerdictRecordAdmin(admin.ModelAdmin):
    list_display = ['run', 'check_name', 'outcome', 'measured', 'bound']
    list_filter = ['outcome', 'check_name']
    search_fields = ['check_name', 'run__system_name']
    readonly_fields = ['created_at']

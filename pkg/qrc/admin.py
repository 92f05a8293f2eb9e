from django.contrib import admin
from .models import ExperimentRun, BenchmarkResult


class BenchmarkResultInline(admin.TabularInline):
    model = BenchmarkResult
    extra = 0
    readonly_fields = ('task', 'scheme', 'm_used', 'mse', 'digitized_errors', 'training_mse', 'baseline_mse', 'effective_rank')


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display=('id', 'command', 'seed', 'status', 'output_dir', 'created_at', 'finished_at')
    list_filter=('command', 'status')
    search_fields=('output_dir',)
    inlines=[BenchmarkResultInline]

@admin.register(BenchmarkResult)
class BenchmarkResultAdmin(admin.ModelAdmin):
    list_display=('id', 'run', 'task', 'scheme', 'm_used', 'mse', 'digitized_errors')
    list_filter=('task', 'scheme', 'm_used')
    search_fields=('task',)

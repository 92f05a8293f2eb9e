# Generated by Django 5.2.5 on 2026-10-17 12:00

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32)),
                ('config', models.JSONField(help_text='Resolved experiment config; re-running it reproduces the artifacts.')),
                ('seed', models.BigIntegerField()),
                ('output_dir', models.CharField(max_length=512)),
                ('status', models.CharField(choices=[('running', 'Running'), ('succeeded', 'Succeeded'), ('failed', 'Failed')], default='running', max_length=16)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='BenchmarkResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('task', models.CharField(max_length=64)),
                ('scheme', models.CharField(max_length=1)),
                ('m_used', models.PositiveIntegerField()),
                ('mse', models.FloatField()),
                ('digitized_errors', models.IntegerField(blank=True, null=True)),
                ('training_mse', models.FloatField(default=0.0)),
                ('baseline_mse', models.FloatField(default=0.0)),
                ('effective_rank', models.PositiveIntegerField(default=0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='results', to='qrc.experimentrun')),
            ],
            options={
                'ordering': ['id'],
                'constraints': [models.UniqueConstraint(fields=('run', 'task', 'scheme', 'm_used'), name='unique_result_per_run_task_m'), models.CheckConstraint(condition=models.Q(('mse__gte', 0)), name='result_mse_gte_0'), models.CheckConstraint(condition=models.Q(('m_used__gte', 1)), name='result_m_used_gte_1')],
            },
        ),
    ]

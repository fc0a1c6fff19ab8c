# Generated by Django 5.1.7 on 2026-10-17 11:40

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
        ('meshes', '0001_initial'),
    ]

    operations = [
        migrations.CreateModel(
            name='SliceRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('nu', models.PositiveSmallIntegerField(help_text='n = 2**nu')),
                ('loop_mode', models.CharField(choices=[('sound', 'sound'), ('paper-det', 'paper-det'), ('always-scan', 'always-scan')], default='sound', max_length=20)),
                ('template', models.CharField(choices=[('edge-frame', 'edge-frame'), ('octet', 'octet'), ('diagonal-cross', 'diagonal-cross')], default='edge-frame', max_length=20)),
                ('slab', models.FloatField(default=0.0)),
                ('planes', models.JSONField(default=list, help_text='Ascending plane heights')),
                ('plane_step', models.FloatField(blank=True, help_text='Set for uniform stacks', null=True)),
                ('cache_active', models.BooleanField(default=False)),
                ('jobs', models.PositiveSmallIntegerField(default=1)),
                ('status', models.CharField(choices=[('PENDING', 'Pending'), ('COMPLETED', 'Completed'), ('FAILED', 'Failed')], default='PENDING', max_length=20)),
                ('error', models.TextField(blank=True)),
                ('total_activations', models.PositiveBigIntegerField(default=0)),
                ('total_cuboid_tests', models.PositiveBigIntegerField(default=0)),
                ('cells_generated', models.PositiveBigIntegerField(default=0)),
                ('samples_evaluated', models.PositiveBigIntegerField(default=0)),
                ('wall_time', models.FloatField(default=0.0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
                ('mesh', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='runs', to='meshes.mesh')),
            ],
            options={
                'verbose_name': 'Slice Run',
                'verbose_name_plural': 'Slice Runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='PlaneStat',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('index', models.PositiveIntegerField()),
                ('z', models.FloatField()),
                ('active_maps', models.PositiveIntegerField(default=0)),
                ('activations', models.PositiveIntegerField(default=0)),
                ('cuboid_tests', models.PositiveIntegerField(default=0)),
                ('wall_time', models.FloatField(default=0.0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='plane_stats', to='slicing.slicerun')),
            ],
            options={
                'ordering': ['run', 'index'],
                'unique_together': {('run', 'index')},
            },
        ),
    ]

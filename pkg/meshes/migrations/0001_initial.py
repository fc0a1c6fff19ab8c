# Generated by Django 5.1.7 on 2026-10-17 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Mesh',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=200, unique=True)),
                ('description', models.TextField(blank=True)),
                ('version', models.PositiveSmallIntegerField(default=1)),
                ('degree', models.PositiveSmallIntegerField(default=3)),
                ('rotation', models.JSONField(blank=True, help_text='Row-major 3x3 rotation applied at load', null=True)),
                ('document', models.TextField(help_text='Mesh JSON as uploaded')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Mesh',
                'verbose_name_plural': 'Meshes',
                'ordering': ['name'],
            },
        ),
        migrations.CreateModel(
            name='DeformationMap',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('map_id', models.IntegerField()),
                ('coefficients', models.JSONField(help_text='20 [x, y, z] triples, canonical order')),
                ('z_min', models.FloatField()),
                ('z_max', models.FloatField()),
                ('mu_x', models.FloatField(default=0.0)),
                ('mu_y', models.FloatField(default=0.0)),
                ('mu_z', models.FloatField(default=0.0)),
                ('jacobian_min', models.FloatField()),
                ('jacobian_max', models.FloatField()),
                ('jacobian_ok', models.BooleanField(default=True)),
                ('mesh', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='maps', to='meshes.mesh')),
            ],
            options={
                'ordering': ['mesh', 'map_id'],
                'unique_together': {('mesh', 'map_id')},
            },
        ),
    ]

# Generated by Django 5.2.11 on 2026-10-18 14:02

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SweepRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('seed', models.CharField(max_length=24)),
                ('model', models.CharField(choices=[('monotone', 'monotono'), ('binary', 'binario')], max_length=10)),
                ('count', models.PositiveIntegerField()),
                ('spec', models.JSONField()),
                ('bound_report', models.JSONField()),
                ('violation_count', models.PositiveIntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('index', models.PositiveIntegerField()),
                ('scenario', models.JSONField()),
                ('met', models.BooleanField(default=False)),
                ('time_from_later_start', models.CharField(blank=True, max_length=64)),
                ('summary', models.JSONField()),
                ('sweep', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='runs', to='rendezvous.sweeprecord')),
            ],
            options={
                'ordering': ['index'],
                'constraints': [models.UniqueConstraint(fields=('sweep', 'index'), name='unique_run_per_sweep')],
            },
        ),
    ]

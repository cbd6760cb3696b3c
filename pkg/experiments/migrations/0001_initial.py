# Generated by Django 5.1.2 on 2026-10-19 09:00

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
                ('command', models.CharField(choices=[('run', 'Run'), ('ablate', 'Ablate'), ('masksweep', 'Masksweep')], default='run', max_length=20)),
                ('label', models.CharField(blank=True, max_length=100)),
                ('status', models.CharField(choices=[('PENDING', 'Pending'), ('RUNNING', 'Running'), ('COMPLETED', 'Completed'), ('FAILED', 'Failed')], default='PENDING', max_length=20)),
                ('mode', models.CharField(choices=[('FEDAVG', 'FEDAVG'), ('FEDAVG_PL', 'FEDAVG_PL'), ('FEDMLP', 'FEDMLP')], max_length=20)),
                ('seed', models.IntegerField()),
                ('config', models.JSONField()),
                ('output_dir', models.CharField(max_length=500)),
                ('final_bacc', models.FloatField(blank=True, null=True)),
                ('final_auc', models.FloatField(blank=True, null=True)),
                ('final_map', models.FloatField(blank=True, null=True)),
                ('error_message', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
        ),
        migrations.CreateModel(
            name='RoundMetric',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('round_index', models.IntegerField()),
                ('stage', models.CharField(choices=[('baseline', 'Baseline'), ('warmup', 'Warmup'), ('detection', 'Detection')], max_length=20)),
                ('bacc', models.FloatField(blank=True, null=True)),
                ('auc', models.FloatField(blank=True, null=True)),
                ('map', models.FloatField(blank=True, null=True)),
                ('coverage', models.FloatField(default=0.0)),
                ('tag_precision', models.FloatField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='round_metrics', to='experiments.experimentrun')),
            ],
            options={
                'ordering': ['round_index'],
                'unique_together': {('run', 'round_index')},
            },
        ),
    ]

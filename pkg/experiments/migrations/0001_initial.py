# Generated by Django 5.2.8 on 2026-10-18 09:12

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
                ('kind', models.CharField(choices=[('dim', 'Dimension estimate'), ('sweep', 'Exceptional directions'), ('energy', 'Energy ladder'), ('counting', 'Counting bound'), ('almost-dc', 'Almost dimension conservation'), ('transversality', 'Transversality scan')], max_length=20)),
                ('system_name', models.CharField(blank=True, max_length=100)),
                ('seed', models.IntegerField()),
                ('config', models.JSONField(default=dict)),
                ('exit_code', models.IntegerField(default=0)),
                ('output_dir', models.CharField(max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='VerdictRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('check_name', models.CharField(max_length=100)),
                ('outcome', models.CharField(choices=[('PASS', 'Pass'), ('FAIL', 'Fail'), ('SCALE-LIMITED', 'Scale-limited')], max_length=20)),
                ('measured', models.FloatField(blank=True, null=True)),
                ('bound', models.FloatField(blank=True, null=True)),
                ('detail', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='verdicts', to='experiments.experimentrun')),
            ],
            options={
                'verbose_name': 'Verdict',
                'verbose_name_plural': 'Verdicts',
                'ordering': ['run', 'id'],
            },
        ),
    ]

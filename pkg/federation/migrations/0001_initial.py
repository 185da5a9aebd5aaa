# Generated by Django 4.2.25 on 2026-10-17 09:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ScenarioRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scenario_id', models.CharField(db_index=True, help_text='Scenario identifier used as the token id prefix (e.g., wsf)', max_length=100, unique=True)),
                ('use_case', models.CharField(max_length=200)),
                ('aggregation', models.CharField(default='fedavg', max_length=50)),
                ('incentive_method', models.CharField(choices=[('equal', 'Equal'), ('linear', 'Linear (dataset size)'), ('performance', 'Performance'), ('shapley', 'Shapley value')], default='shapley', max_length=20)),
                ('reward_type', models.CharField(choices=[('pre_established', 'Pre-established total'), ('per_round', 'Per-round amounts')], max_length=20)),
                ('reward_total', models.BigIntegerField(help_text='Total reward in numeraire micro-units')),
                ('rounds', models.PositiveIntegerField()),
                ('n_clients_expected', models.PositiveIntegerField()),
                ('token_supply_per_client', models.PositiveIntegerField(default=1000)),
                ('metadata', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'verbose_name': 'Scenario',
                'verbose_name_plural': 'Scenarios',
                'db_table': 'wsf_scenario',
                'ordering': ['scenario_id'],
            },
        ),
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('seed', models.CharField(max_length=20)),
                ('config_path', models.CharField(max_length=500)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('status', models.CharField(choices=[('C', 'Completed'), ('F', 'Failed')], default='C', max_length=1)),
                ('rounds', models.PositiveIntegerField(default=0)),
                ('total_emitted', models.BigIntegerField(default=0)),
                ('total_paid', models.BigIntegerField(default=0)),
                ('final_utility', models.FloatField(blank=True, null=True)),
                ('events_digest', models.CharField(blank=True, help_text='SHA-256 of events.jsonl', max_length=64)),
                ('error_message', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('scenario', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='runs', to='federation.scenariorecord')),
            ],
            options={
                'verbose_name': 'Simulation Run',
                'verbose_name_plural': 'Simulation Runs',
                'db_table': 'wsf_simulation_run',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='ClientToken',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('client_id', models.CharField(max_length=100)),
                ('supply', models.PositiveIntegerField()),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('scenario', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='tokens', to='federation.scenariorecord')),
            ],
            options={
                'verbose_name': 'Client Token',
                'verbose_name_plural': 'Client Tokens',
                'db_table': 'wsf_client_token',
                'ordering': ['scenario', 'client_id'],
                'unique_together': {('scenario', 'client_id')},
            },
        ),
    ]

"""
Admin configuration for the Orchestrator logbook.
"""
from django.contrib import admin
from .models import ClientToken, ScenarioRecord, SimulationRun


@admin.register(ScenarioRecord)
class ScenarioRecordAdmin(admin.ModelAdmin):
    list_display = ['scenario_id', 'use_case', 'incentive_method', 'reward_type', 'reward_total', 'rounds', 'created_at']
    list_filter = ['incentive_method', 'reward_type', 'created_at']
    search_fields = ['scenario_id', 'use_case']
    readonly_fields = ['created_at', 'updated_at']
    ordering = ['scenario_id']


@admin.register(ClientToken)
class ClientTokenAdmin(admin.ModelAdmin):
    list_display = ['scenario', 'client_id', 'supply', 'created_at']
    list_filter = ['scenario']
    search_fields = ['client_id', 'scenario__scenario_id']
    readonly_fields = ['created_at']
    ordering = ['scenario', 'client_id']


@admin.register(SimulationRun)
class SimulationRunAdmin(admin.ModelAdmin):
    list_display = ['id', 'scenario', 'seed', 'status', 'rounds', 'total_emitted', 'total_paid', 'final_utility', 'created_at']
    list_filter = ['status', 'created_at']
    search_fields = ['scenario__scenario_id', 'config_path', 'events_digest']
    readonly_fields = ['events_digest', 'created_at']
    ordering = ['-created_at']

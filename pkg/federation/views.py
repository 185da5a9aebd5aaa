"""
Read-only JSON views over the Orchestrator logbook.
"""
from django.http import HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404
from django.views.decorators.http import require_GET

from .models import ScenarioRecord, SimulationRun


def _scenario_summary(scenario):
    return {
        'scenario_id': scenario.scenario_id,
        'use_case': scenario.use_case,
        'incentive_method': scenario.incentive_method,
        'reward_type': scenario.reward_type,
        'reward_total': scenario.reward_total,
        'rounds': scenario.rounds,
        'n_clients_expected': scenario.n_clients_expected,
    }


def _run_summary(run):
    return {
        'id': run.pk,
        'scenario': run.scenario.scenario_id if run.scenario else None,
        'seed': run.seed,
        'status': run.get_status_display(),
        'rounds': run.rounds,
        'total_emitted': run.total_emitted,
        'total_paid': run.total_paid,
        'final_utility': run.final_utility,
        'events_digest': run.events_digest,
        'created_at': run.created_at.isoformat(),
    }


@require_GET
def scenario_list(request):
    scenarios = [_scenario_summary(s) for s in ScenarioRecord.objects.all()]
    return JsonResponse({'scenarios': scenarios})


@require_GET
def scenario_detail(request, scenario_id):
    """
    One scenario with its minted tokens and recorded runs.
    """
    scenario = get_object_or_404(ScenarioRecord, scenario_id=scenario_id)
    data = _scenario_summary(scenario)
    data.update({
        'aggregation': scenario.aggregation,
        'token_supply_per_client': scenario.token_supply_per_client,
        'metadata': scenario.metadata,
        'tokens': [
            {'token': token.token_id, 'client_id': token.client_id, 'supply': token.supply}
            for token in scenario.tokens.all()
        ],
        'runs': [_run_summary(run) for run in scenario.runs.all()],
    })
    return JsonResponse(data)


@require_GET
def run_detail(request, run_id):
    run = get_object_or_404(SimulationRun, pk=run_id)
    data = _run_summary(run)
    data.update({
        'config_path': run.config_path,
        'output_dir': run.output_dir,
        'error_message': run.error_message,
    })
    return JsonResponse(data)


def health_check(request):
    """
    Health check endpoint for monitoring.
    """
    return HttpResponse('OK')

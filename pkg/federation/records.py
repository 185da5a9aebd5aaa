"""
Persist simulation summaries to the Orchestrator logbook.
"""
import hashlib
import logging

from django.db import transaction

from .events import EventKind
from .models import ClientToken, ScenarioRecord, SimulationRun

logger = logging.getLogger(__name__)


def events_digest(events):
    return hashlib.sha256(events.to_jsonl().encode('utf-8')).hexdigest()


def _save_scenario(spec):
    schedule = spec.reward_schedule
    scenario, _ = ScenarioRecord.objects.update_or_create(
        scenario_id=spec.scenario_id,
        defaults={
            'use_case': spec.use_case,
            'aggregation': spec.aggregation,
            'incentive_method': spec.incentive_method,
            'reward_type': schedule.kind,
            'reward_total': schedule.total,
            'rounds': schedule.rounds,
            'n_clients_expected': spec.n_clients_expected,
            'token_supply_per_client': spec.token_supply_per_client,
            'metadata': dict(spec.metadata),
        },
    )
    return scenario


@transaction.atomic
def record_run(result, config_path, output_dir=''):
    """Store the scenario, its minted tokens and the run summary in one transaction."""
    scenario = None
    for spec in result.orchestrator.list_scenarios():
        scenario = _save_scenario(spec)
        for event in result.events.of_kind(EventKind.CLIENT_JOINED):
            if event.payload['minted']:
                ClientToken.objects.update_or_create(
                    scenario=scenario,
                    client_id=event.payload['client'],
                    defaults={'supply': event.payload['minted']},
                )

    run = SimulationRun.objects.create(
        scenario=scenario,
        seed=str(result.config.seed),
        config_path=str(config_path),
        output_dir=str(output_dir or ''),
        status=SimulationRun.STATUS_COMPLETED,
        rounds=len(result.events.of_kind(EventKind.ROUND_STARTED)),
        total_emitted=result.total_emitted,
        total_paid=result.total_paid,
        final_utility=result.final_utility,
        events_digest=events_digest(result.events),
    )
    logger.info('recorded run %s for scenario %s', run.pk,
                scenario.scenario_id if scenario else '-')
    return run


def record_failure(config_path, seed, error):
    run = SimulationRun.objects.create(
        seed=str(seed),
        config_path=str(config_path),
        status=SimulationRun.STATUS_FAILED,
        error_message=str(error),
    )
    logger.warning('recorded failed run %s: %s', run.pk, error)
    return run

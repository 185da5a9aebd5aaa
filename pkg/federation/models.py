"""
Orchestrator logbook: registered scenarios, minted tokens and simulation runs.
"""
from django.db import models

from .contribution import IncentiveMethod
from .ledger import RewardType


class ScenarioRecord(models.Model):
    """
    A federated-learning scenario as registered with the Orchestrator.
    """
    scenario_id = models.CharField(
        max_length=100,
        unique=True,
        db_index=True,
        help_text="Scenario identifier used as the token id prefix (e.g., wsf)"
    )
    use_case = models.CharField(max_length=200)
    aggregation = models.CharField(max_length=50, default='fedavg')
    incentive_method = models.CharField(
        max_length=20,
        choices=IncentiveMethod.choices,
        default=IncentiveMethod.SHAPLEY,
    )
    reward_type = models.CharField(max_length=20, choices=RewardType.choices)
    reward_total = models.BigIntegerField(help_text="Total reward in numeraire micro-units")
    rounds = models.PositiveIntegerField()
    n_clients_expected = models.PositiveIntegerField()
    token_supply_per_client = models.PositiveIntegerField(default=1000)

    # data scheme, epochs and similar federation details
    metadata = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = 'wsf_scenario'
        ordering = ['scenario_id']
        verbose_name = 'Scenario'
        verbose_name_plural = 'Scenarios'

    def __str__(self):
        return f"{self.scenario_id} - {self.use_case}"


class ClientToken(models.Model):
    """
    A client's token minted when it joined a scenario.
    """
    scenario = models.ForeignKey(ScenarioRecord, on_delete=models.CASCADE, related_name='tokens')
    client_id = models.CharField(max_length=100)
    supply = models.PositiveIntegerField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'wsf_client_token'
        ordering = ['scenario', 'client_id']
        unique_together = [('scenario', 'client_id')]
        verbose_name = 'Client Token'
        verbose_name_plural = 'Client Tokens'

    @property
    def token_id(self):
        return f"{self.scenario.scenario_id}/{self.client_id}"

    def __str__(self):
        return f"{self.token_id} ({self.supply})"


class SimulationRun(models.Model):
    """
    Summary of one simulation run; the full record stays in events.jsonl.
    """
    STATUS_COMPLETED = 'C'
    STATUS_FAILED = 'F'

    STATUS_CHOICES = [
        (STATUS_COMPLETED, 'Completed'),
        (STATUS_FAILED, 'Failed'),
    ]

    scenario = models.ForeignKey(
        ScenarioRecord, on_delete=models.SET_NULL, null=True, blank=True, related_name='runs'
    )
    # 64-bit unsigned seeds overflow a signed BIGINT
    seed = models.CharField(max_length=20)
    config_path = models.CharField(max_length=500)
    output_dir = models.CharField(max_length=500, blank=True)
    status = models.CharField(max_length=1, choices=STATUS_CHOICES, default=STATUS_COMPLETED)
    rounds = models.PositiveIntegerField(default=0)
    total_emitted = models.BigIntegerField(default=0)
    total_paid = models.BigIntegerField(default=0)
    final_utility = models.FloatField(null=True, blank=True)
    events_digest = models.CharField(max_length=64, blank=True, help_text="SHA-256 of events.jsonl")
    error_message = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'wsf_simulation_run'
        ordering = ['-created_at']
        verbose_name = 'Simulation Run'
        verbose_name_plural = 'Simulation Runs'

    def __str__(self):
        scenario = self.scenario.scenario_id if self.scenario else '-'
        return f"{scenario} - seed {self.seed} - {self.get_status_display()}"

"""
Experiment configuration: one YAML file describes one simulation.

Parsing is deliberately lenient and only checks the document's shape;
:func:`validate_config` reports every value-level problem as data so a
single pass shows the operator all of them.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import List, Optional, Union

import yaml

from .agents import InvestorKind
from .amm import Curve
from .contribution import IncentiveMethod, exact_client_cap
from .exceptions import ConfigError
from .flcore import UTILITY_METRICS, TrainConfig
from .ledger import RewardType, ScenarioSpec, schedule_from_dict


def client_id(index):
    return f'client-{index:02d}'


@dataclass
class FederationConfig:
    n_clients: int = 5
    samples_per_client: int = 200
    classes: int = 2
    dim: int = 2
    dirichlet_alpha: float = 1.0
    separation: float = 3.0
    test_samples: Optional[int] = None
    local_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.1
    rounds: int = 10
    utility_metric: str = 'accuracy'

    def train_config(self, seed):
        return TrainConfig(
            local_epochs=self.local_epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            rounds=self.rounds,
            seed=seed,
        )


@dataclass
class ScenarioConfig:
    scenario_id: str = 'wsf'
    use_case: str = 'synthetic-classification'
    aggregation: str = 'fedavg'
    incentive_method: str = IncentiveMethod.SHAPLEY.value
    token_supply_per_client: int = 1000
    mint: bool = True
    reward: dict = field(default_factory=lambda: {
        'type': RewardType.PRE_ESTABLISHED.value, 'total': 1_000_000, 'rounds': 10,
    })

    def spec(self, federation):
        return ScenarioSpec(
            scenario_id=self.scenario_id,
            use_case=self.use_case,
            reward_schedule=schedule_from_dict(self.reward),
            n_clients_expected=federation.n_clients,
            aggregation=self.aggregation,
            incentive_method=self.incentive_method,
            token_supply_per_client=self.token_supply_per_client,
            metadata={
                'data_scheme': {
                    'classes': federation.classes,
                    'dim': federation.dim,
                    'dirichlet_alpha': federation.dirichlet_alpha,
                },
                'epochs': federation.local_epochs,
            },
        )


@dataclass
class AmmConfig:
    enabled: bool = True
    curve: str = Curve.CONSTANT_MEAN.value
    seed_fraction: float = 0.1
    liquidity_provider: str = 'liquidity-provider'
    pool_id: str = 'amm'


@dataclass
class InvestorConfig:
    id: str = ''
    kind: str = InvestorKind.BUY_AND_HOLD.value
    trade_size: int = 1
    budget: int = 0
    margin: float = 0.1
    seed: int = 0
    targets: Union[str, List[int]] = 'all'


@dataclass
class ClientPolicyConfig:
    sell_fraction_at_join: float = 0.0
    per_round_sell_fraction: float = 0.0
    investor: Optional[InvestorConfig] = None


@dataclass
class AgentsConfig:
    clients: List[ClientPolicyConfig] = field(default_factory=list)
    investors: List[InvestorConfig] = field(default_factory=list)


@dataclass
class ValuationConfig:
    multiple: float = 8.0
    window: int = 5


@dataclass
class OutputConfig:
    dir: Optional[str] = None


@dataclass
class SimConfig:
    federation: FederationConfig = field(default_factory=FederationConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    amm: AmmConfig = field(default_factory=AmmConfig)
    agents: AgentsConfig = field(default_factory=AgentsConfig)
    valuation: ValuationConfig = field(default_factory=ValuationConfig)
    seed: int = 0
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self):
        return dataclasses.asdict(self)

    def client_policy(self, index):
        if self.agents.clients:
            return self.agents.clients[index]
        return ClientPolicyConfig()


def _section(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError([f'{path} must be a mapping'])
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([f'{path}.{key} is not a recognised setting' for key in unknown])
    return cls(**data)


def config_from_dict(data):
    """Build a :class:`SimConfig` from a parsed YAML document."""
    if not isinstance(data, dict):
        raise ConfigError(['the configuration must be a mapping'])
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([f'{key} is not a recognised top-level section' for key in unknown])

    agents_data = data.get('agents') or {}
    if not isinstance(agents_data, dict):
        raise ConfigError(['agents must be a mapping'])
    clients = []
    for index, entry in enumerate(agents_data.get('clients') or []):
        path = f'agents.clients[{index}]'
        policy = _section(ClientPolicyConfig, entry, path)
        if policy.investor is not None:
            policy.investor = _section(InvestorConfig, policy.investor, f'{path}.investor')
        clients.append(policy)
    investors = [
        _section(InvestorConfig, entry, f'agents.investors[{index}]')
        for index, entry in enumerate(agents_data.get('investors') or [])
    ]
    extra = sorted(set(agents_data) - {'clients', 'investors'})
    if extra:
        raise ConfigError([f'agents.{key} is not a recognised setting' for key in extra])

    return SimConfig(
        federation=_section(FederationConfig, data.get('federation'), 'federation'),
        scenario=_section(ScenarioConfig, data.get('scenario'), 'scenario'),
        amm=_section(AmmConfig, data.get('amm'), 'amm'),
        agents=AgentsConfig(clients=clients, investors=investors),
        valuation=_section(ValuationConfig, data.get('valuation'), 'valuation'),
        seed=data.get('seed', 0),
        output=_section(OutputConfig, data.get('output'), 'output'),
    )


def load_config(path):
    try:
        with open(path, encoding='utf-8') as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError([f'cannot read {path}: {exc.strerror or exc}']) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f'{path} is not valid YAML: {exc}']) from exc
    return config_from_dict(data)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _validate_investor(investor, path, n_clients, own_index=None):
    violations = []
    if investor.kind not in InvestorKind.values:
        violations.append(f'{path}.kind must be one of {InvestorKind.values}')
    if not _is_int(investor.trade_size) or investor.trade_size < 1:
        violations.append(f'{path}.trade_size must be a positive integer')
    if not _is_int(investor.budget) or investor.budget < 0:
        violations.append(f'{path}.budget must be a non-negative integer')
    if not _is_number(investor.margin) or investor.margin <= 0:
        violations.append(f'{path}.margin must be positive')
    if not _is_int(investor.seed) or investor.seed < 0:
        violations.append(f'{path}.seed must be a non-negative integer')
    targets = investor.targets
    if isinstance(targets, str):
        allowed = ('all', 'others') if own_index is not None else ('all',)
        if targets not in allowed:
            violations.append(f'{path}.targets must be a client index list or one of {allowed}')
    elif isinstance(targets, list):
        for target in targets:
            if not _is_int(target) or not 0 <= target < n_clients:
                violations.append(f'{path}.targets entry {target!r} is not a client index')
    else:
        violations.append(f'{path}.targets must be a list or a keyword')
    return violations


def validate_config(config):
    """
    Return every violation found in ``config``; an empty list means valid.

    Accepts a :class:`SimConfig` or a raw mapping.
    """
    if not isinstance(config, SimConfig):
        try:
            config = config_from_dict(config)
        except ConfigError as exc:
            return exc.violations

    violations = []
    fed, scen, amm, agents, val = (
        config.federation, config.scenario, config.amm, config.agents, config.valuation,
    )

    if not _is_int(config.seed) or not 0 <= config.seed < 2 ** 64:
        violations.append('seed must be a 64-bit unsigned integer')

    for name in ('n_clients', 'samples_per_client', 'dim', 'local_epochs', 'batch_size', 'rounds'):
        value = getattr(fed, name)
        if not _is_int(value) or value < 1:
            violations.append(f'federation.{name} must be a positive integer')
    if not _is_int(fed.classes) or fed.classes < 2:
        violations.append('federation.classes must be an integer >= 2')
    for name in ('dirichlet_alpha', 'separation', 'learning_rate'):
        value = getattr(fed, name)
        if not _is_number(value) or value <= 0:
            violations.append(f'federation.{name} must be positive')
    if fed.test_samples is not None and (not _is_int(fed.test_samples) or fed.test_samples < 1):
        violations.append('federation.test_samples must be a positive integer')
    if fed.utility_metric not in UTILITY_METRICS:
        violations.append(f'federation.utility_metric must be one of {UTILITY_METRICS}')

    if not isinstance(scen.scenario_id, str) or not scen.scenario_id or '/' in scen.scenario_id:
        violations.append('scenario.scenario_id must be a non-empty string without "/"')
    if scen.incentive_method not in IncentiveMethod.values:
        violations.append(f'scenario.incentive_method must be one of {IncentiveMethod.values}')
    elif (scen.incentive_method == IncentiveMethod.SHAPLEY and _is_int(fed.n_clients)
          and fed.n_clients > exact_client_cap()):
        violations.append(
            f'scenario.incentive_method=shapley supports at most {exact_client_cap()} clients '
            f'but federation.n_clients is {fed.n_clients}'
        )
    if not _is_int(scen.token_supply_per_client) or scen.token_supply_per_client < 1:
        violations.append('scenario.token_supply_per_client must be a positive integer')
    if not isinstance(scen.mint, bool):
        violations.append('scenario.mint must be true or false')

    reward = scen.reward if isinstance(scen.reward, dict) else {}
    schedule_rounds = None
    if reward.get('type') == RewardType.PRE_ESTABLISHED:
        if not _is_int(reward.get('total')) or reward['total'] <= 0:
            violations.append('scenario.reward.total must be a positive integer (micro-units)')
        if not _is_int(reward.get('rounds')) or reward['rounds'] < 1:
            violations.append('scenario.reward.rounds must be a positive integer')
        else:
            schedule_rounds = reward['rounds']
    elif reward.get('type') == RewardType.PER_ROUND:
        amounts = reward.get('amounts')
        if not isinstance(amounts, list) or not amounts:
            violations.append('scenario.reward.amounts must be a non-empty list')
        else:
            if any(not _is_int(a) or a < 0 for a in amounts):
                violations.append('scenario.reward.amounts must be non-negative integers')
            schedule_rounds = len(amounts)
    else:
        violations.append(f'scenario.reward.type must be one of {RewardType.values}')
    if schedule_rounds is not None and _is_int(fed.rounds) and schedule_rounds != fed.rounds:
        violations.append(
            f'scenario.reward schedule covers {schedule_rounds} rounds '
            f'but federation.rounds is {fed.rounds}'
        )

    if amm.curve not in Curve.values:
        violations.append(f'amm.curve must be one of {Curve.values}')
    if amm.enabled:
        if not scen.mint:
            violations.append('amm.enabled requires scenario.mint (there are no tokens to list)')
        if not _is_number(amm.seed_fraction) or not 0 < amm.seed_fraction < 1:
            violations.append('amm.seed_fraction must lie strictly between 0 and 1')
        elif _is_int(scen.token_supply_per_client) and \
                int(amm.seed_fraction * scen.token_supply_per_client) < 1:
            violations.append('amm.seed_fraction leaves less than one token per client for the pool')

    n_clients = fed.n_clients if _is_int(fed.n_clients) else 0
    if agents.clients and len(agents.clients) != n_clients:
        violations.append(
            f'agents.clients lists {len(agents.clients)} policies '
            f'but federation.n_clients is {fed.n_clients}'
        )
    trading = bool(agents.investors)
    for index, policy in enumerate(agents.clients):
        path = f'agents.clients[{index}]'
        for name in ('sell_fraction_at_join', 'per_round_sell_fraction'):
            value = getattr(policy, name)
            if not _is_number(value) or not 0 <= value <= 1:
                violations.append(f'{path}.{name} must lie in [0, 1]')
            elif value > 0:
                trading = True
        if policy.investor is not None:
            trading = True
            violations.extend(
                _validate_investor(policy.investor, f'{path}.investor', n_clients, own_index=index)
            )

    seen = set()
    for index, investor in enumerate(agents.investors):
        path = f'agents.investors[{index}]'
        if not isinstance(investor.id, str) or not investor.id:
            violations.append(f'{path}.id must be a non-empty string')
        elif investor.id in seen:
            violations.append(f'{path}.id {investor.id!r} is used twice')
        seen.add(investor.id)
        violations.extend(_validate_investor(investor, path, n_clients))
    if trading and not amm.enabled:
        violations.append('agent trading requires amm.enabled')

    if not _is_number(val.multiple) or val.multiple <= 0:
        violations.append('valuation.multiple must be positive')
    if not _is_int(val.window) or val.window < 1:
        violations.append('valuation.window must be a positive integer')
    return violations

"""
Per-round reward shares under the server-based incentive models: equal,
linear, performance-based and exact Shapley values.
"""
import itertools
import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from django.conf import settings
from django.db import models

from .exceptions import ArgumentError, CapacityError, DegenerateInputError, InvariantViolation
from .flcore import server_update, utility

MAX_EXACT_CLIENTS = 12
SHARE_TOLERANCE = 1e-9


class IncentiveMethod(models.TextChoices):
    EQUAL = 'equal', 'Equal'
    LINEAR = 'linear', 'Linear (dataset size)'
    PERFORMANCE = 'performance', 'Performance'
    SHAPLEY = 'shapley', 'Shapley value'


@dataclass(frozen=True)
class ContributionVector:
    """Non-negative per-client reward fractions summing to one."""
    shares: Tuple[float, ...]

    def __post_init__(self):
        shares = tuple(float(s) for s in self.shares)
        if not shares:
            raise ArgumentError('a contribution vector needs at least one client')
        if any(s < 0 or not math.isfinite(s) for s in shares):
            raise ArgumentError('shares must be finite and non-negative')
        if abs(math.fsum(shares) - 1.0) > SHARE_TOLERANCE:
            raise ArgumentError(f'shares sum to {math.fsum(shares)}, not 1')
        object.__setattr__(self, 'shares', shares)

    def __len__(self):
        return len(self.shares)

    def __getitem__(self, index):
        return self.shares[index]

    def __iter__(self):
        return iter(self.shares)


def mask_of(ids):
    mask = 0
    for client_id in ids:
        mask |= 1 << client_id
    return mask


def members(mask):
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


class UtilityOracle:
    """
    Memoised subset utility f(S).

    Subsets are cached by bitmask; each distinct subset reaches the
    evaluator at most once for the lifetime of the oracle.
    """

    def __init__(self, evaluator: Callable[[frozenset], float], client_count: int):
        if client_count < 1:
            raise ArgumentError('client_count must be >= 1')
        self.evaluator = evaluator
        self.client_count = client_count
        self.cache = {}
        self.evaluations = 0
        self._lock = threading.Lock()

    def value(self, mask):
        if mask < 0 or mask >> self.client_count:
            raise ArgumentError(f'subset mask {mask:#x} names unknown clients')
        with self._lock:
            if mask not in self.cache:
                self.cache[mask] = float(self.evaluator(members(mask)))
                self.evaluations += 1
            return self.cache[mask]

    def __call__(self, subset):
        return self.value(mask_of(subset))


def equal_shares(n):
    if n < 1:
        raise ArgumentError('equal shares need at least one client')
    return ContributionVector((1.0 / n,) * n)


def linear_shares(quantities: Sequence[float]):
    """Shares proportional to a per-client quantity such as dataset size."""
    if not quantities:
        raise ArgumentError('linear shares need at least one client')
    if any(q < 0 for q in quantities):
        raise ArgumentError('quantities must be non-negative')
    total = math.fsum(quantities)
    if total <= 0:
        raise DegenerateInputError('all quantities are zero')
    return ContributionVector(tuple(q / total for q in quantities))


def performance_shares(per_client_utilities: Sequence[float]):
    """
    Shares proportional to each update's utility above the worst update.

    The worst client gets nothing; identical utilities fall back to equal
    shares.
    """
    if not per_client_utilities:
        raise ArgumentError('performance shares need at least one client')
    floor = min(per_client_utilities)
    shifted = [u - floor for u in per_client_utilities]
    total = math.fsum(shifted)
    if total <= 0:
        return equal_shares(len(shifted))
    return ContributionVector(tuple(s / total for s in shifted))


def normalize_to_shares(phi: Sequence[float]):
    """Clip negative values to zero and renormalise; all non-positive -> equal."""
    if not phi:
        raise ArgumentError('cannot normalise an empty vector')
    clipped = [max(0.0, float(p)) for p in phi]
    total = math.fsum(clipped)
    if total <= 0:
        return equal_shares(len(clipped))
    return ContributionVector(tuple(c / total for c in clipped))


def shapley_values(oracle: UtilityOracle, max_clients=MAX_EXACT_CLIENTS):
    """
    Exact Shapley values by enumerating all 2^n coalitions.

    phi_i = sum over S not containing i of |S|!(n-|S|-1)!/n! * (f(S+i) - f(S))
    """
    n = oracle.client_count
    if n > max_clients:
        raise CapacityError(
            f'exact Shapley values are limited to {max_clients} clients, got {n}'
        )
    masks = np.arange(1 << n)
    values = np.array([oracle.value(int(mask)) for mask in masks])
    sizes = np.array([bin(int(mask)).count('1') for mask in masks])
    coef = np.array([
        math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) for s in range(n)
    ])

    phi = []
    for client in range(n):
        bit = 1 << client
        without = masks[(masks & bit) == 0]
        marginal = values[without | bit] - values[without]
        phi.append(float(np.sum(coef[sizes[without]] * marginal)))
    return phi


def permutation_shapley(oracle: UtilityOracle, max_clients=8):
    """Average marginal contribution over all n! join orders."""
    n = oracle.client_count
    if n > max_clients:
        raise CapacityError(f'permutation enumeration is limited to {max_clients} clients')
    totals = [0.0] * n
    orderings = 0
    for ordering in itertools.permutations(range(n)):
        mask = 0
        for client in ordering:
            before = oracle.value(mask)
            mask |= 1 << client
            totals[client] += oracle.value(mask) - before
        orderings += 1
    return [t / orderings for t in totals]


def subset_model(updates, sizes, subset):
    """Size-weighted FedAvg restricted to the updates of ``subset``."""
    ids = sorted(subset)
    if not ids:
        raise ArgumentError('the empty coalition has no combined model')
    if ids[0] < 0 or ids[-1] >= len(updates):
        raise ArgumentError(f'subset {ids} references unknown clients')
    if any(sizes[i] <= 0 for i in ids):
        raise ArgumentError('client sizes must be positive')
    return server_update([updates[i] for i in ids], [sizes[i] for i in ids])


@dataclass(frozen=True)
class RoundAssessment:
    method: str
    shares: ContributionVector
    scores: Tuple[float, ...]
    evaluations: int = 0


def assess_round(method, updates, sizes, previous_global, test, metric='accuracy',
                 max_clients=MAX_EXACT_CLIENTS):
    """
    Run one incentive model over a round's raw client updates.

    ``scores`` holds the raw per-client quantity before normalisation
    (sizes, utilities or Shapley values). For Shapley the empty coalition
    is valued at the previous global model, so phi measures this round's
    marginal improvement.
    """
    n = len(updates)
    if n != len(sizes):
        raise ArgumentError(f'{n} updates but {len(sizes)} sizes')
    method = IncentiveMethod(method)

    if method == IncentiveMethod.EQUAL:
        shares = equal_shares(n)
        return RoundAssessment(method.value, shares, shares.shares)

    if method == IncentiveMethod.LINEAR:
        return RoundAssessment(method.value, linear_shares(sizes), tuple(float(s) for s in sizes))

    if method == IncentiveMethod.PERFORMANCE:
        scores = tuple(utility(update, test, metric) for update in updates)
        return RoundAssessment(method.value, performance_shares(scores), scores, n)

    def evaluator(coalition):
        if not coalition:
            return utility(previous_global, test, metric)
        return utility(subset_model(updates, sizes, coalition), test, metric)

    oracle = UtilityOracle(evaluator, n)
    phi = shapley_values(oracle, max_clients)
    efficiency_gap = math.fsum(phi) - (oracle.value((1 << n) - 1) - oracle.value(0))
    if abs(efficiency_gap) > 1e-9:
        raise InvariantViolation('shapley-efficiency', f'gap {efficiency_gap:.3e}')
    return RoundAssessment(method.value, normalize_to_shares(phi), tuple(phi), oracle.evaluations)


def exact_client_cap():
    """Largest federation the exact Shapley model accepts in this deployment."""
    return getattr(settings, 'WSF_SHAPLEY_MAX_CLIENTS', MAX_EXACT_CLIENTS)

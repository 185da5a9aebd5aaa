"""
Largest-remainder apportionment of integer amounts.
"""
from fractions import Fraction

from .exceptions import ArgumentError, DegenerateInputError


def apportion(total, weights):
    """
    Split the integer ``total`` proportionally to ``weights``.

    Every entry gets the floor of its exact quota; the leftover units go to
    the largest fractional remainders, ties resolved by position (callers
    pass weights in ascending id order). Quotas are computed with exact
    fractions so the result sums to ``total`` without rounding drift.
    """
    if total < 0 or int(total) != total:
        raise ArgumentError('total must be a non-negative integer')
    total = int(total)
    if not weights:
        raise ArgumentError('at least one weight is required')
    exact = [Fraction(w) for w in weights]
    if any(w < 0 for w in exact):
        raise ArgumentError('weights must be non-negative')
    weight_sum = sum(exact)
    if weight_sum == 0:
        raise DegenerateInputError('weights sum to zero')

    quotas = [total * w / weight_sum for w in exact]
    amounts = [q.numerator // q.denominator for q in quotas]
    leftover = total - sum(amounts)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - amounts[i]), i))
    for index in order[:leftover]:
        amounts[index] += 1
    return amounts

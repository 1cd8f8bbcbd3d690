"""Fairness and inequality measures over allocations."""

import math

from .core import sigmoid


def jain_index(values: list[float], eps: float = 1e-8) -> float:
    """Fairness index: the classic (sum)^2 / (n * sum of squares) ratio,
    scaled by a sigmoid of the mean so low-valued allocations score lower.

    Equal positive values give the pure ratio 1; the result is then
    sigmoid(mean/10) of that. All-zero input scores 0.
    """
    n = len(values)
    total = math.fsum(values)
    sq = math.fsum(v * v for v in values)
    mean = total / n
    return (total * total) / (n * sq + eps) * sigmoid(mean / 10.0)


def gini(values: list[float]) -> float:
    """Gini coefficient in [0, 1): 0 for perfect equality.

    Computed from the ascending cumulative-sum identity
    G = (n + 1 - 2 * sum_i cum_i / total) / n. All-zero input is defined
    as 0 (no inequality among identical zeros).
    """
    n = len(values)
    ordered = sorted(values)
    total = math.fsum(ordered)
    if total == 0.0:
        return 0.0
    cum = 0.0
    cum_sum = 0.0
    for v in ordered:
        cum += v
        cum_sum += cum
    return (n + 1 - 2.0 * cum_sum / total) / n

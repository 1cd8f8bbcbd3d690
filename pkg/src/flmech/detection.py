"""Malicious-node detection and penalties.

A node is flagged when (condition 1 AND condition 2) OR condition 3 holds:

  1. persistent low contributions: its recent mean falls well below the
     population's recent median;
  2. abnormal fluctuation: this round's contribution is an outlier against
     the population's contributions this round;
  3. sudden behavioural change: this round's contribution jumps far from the
     node's own recent mean, measured in units of its own recent spread.

Detection reads contribution histories only; it never sees the ground-truth
role tag. Nodes with fewer than two recorded rounds are never flagged.
"""

import math
from dataclasses import dataclass, field

from .core import Node, SystemConfig


@dataclass
class DetectionReport:
    round: int
    cond1: dict[int, bool] = field(default_factory=dict)
    cond2: dict[int, bool] = field(default_factory=dict)
    cond3: dict[int, bool] = field(default_factory=dict)
    detected: list[int] = field(default_factory=list)
    penalties: dict[int, float] = field(default_factory=dict)
    stake_deductions: dict[int, float] = field(default_factory=dict)


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def _pstd(values: list[float]) -> float:
    m = _mean(values)
    return math.sqrt(math.fsum((v - m) ** 2 for v in values) / len(values))


def _median(values: list[float]) -> float:
    s = sorted(values)
    n = len(s)
    mid = n // 2
    return s[mid] if n % 2 else 0.5 * (s[mid - 1] + s[mid])


def detect(nodes: list[Node], cfg: SystemConfig, t: int) -> DetectionReport:
    """Evaluate the condition set for round t (contributions already collected)."""
    tau = cfg.window
    report = DetectionReport(round=t)

    windows = {nd.id: nd.recent_contributions(tau) for nd in nodes}
    current = {nd.id: windows[nd.id][-1] for nd in nodes if windows[nd.id]}
    pooled = [c for w in windows.values() for c in w]
    pop_median = _median(pooled) if pooled else 0.0
    this_round = list(current.values())
    round_mean = _mean(this_round) if this_round else 0.0
    round_std = _pstd(this_round) if this_round else 0.0

    for nd in nodes:
        if len(nd.contribution_history) < 2:
            continue
        own = windows[nd.id]
        c_now = current[nd.id]

        cond1 = _mean(own) < cfg.theta_low * pop_median
        cond2 = abs(c_now - round_mean) > cfg.theta_fluct * round_std
        prev = nd.recent_contributions(tau, before_round=t)
        jump_scale = max(_pstd(prev), cfg.eps_std)
        cond3 = abs(c_now - _mean(prev)) > cfg.theta_jump * jump_scale

        report.cond1[nd.id] = cond1
        report.cond2[nd.id] = cond2
        report.cond3[nd.id] = cond3
        if (cond1 and cond2) or cond3:
            report.detected.append(nd.id)
    return report


def penalty(reputation: float, stake: float, lambda_r: float, lambda_s: float) -> float:
    """Penalty amount, capped at half the reputation to avoid over-punishment."""
    return min(lambda_r * reputation + lambda_s * stake, reputation / 2.0)


def apply_penalties(nodes: list[Node], report: DetectionReport, cfg: SystemConfig) -> float:
    """Deduct reputation and stake from every detected node.

    Fills the report's penalty/stake-deduction maps and returns the total
    stake deducted (credited to the publisher-profit ledger by the engine).
    """
    by_id = {nd.id: nd for nd in nodes}
    total_deducted = 0.0
    for node_id in report.detected:
        nd = by_id[node_id]
        amount = penalty(nd.reputation, nd.stake,
                         cfg.reputation_penalty_factor, cfg.stake_penalty_factor)
        deduction = cfg.stake_penalty_factor * nd.stake
        nd.reputation = max(0.0, nd.reputation - amount)
        nd.stake = max(0.0, nd.stake - deduction)
        nd.violations += 1
        report.penalties[node_id] = amount
        report.stake_deductions[node_id] = deduction
        total_deducted += deduction
    return total_deducted

"""Per-round reward allocation from the shared pool.

Each node's share mixes a stake component and a decayed historical
contribution component, weighted by a reputation-driven alpha. The whole
base share is scaled by a fairness index over current reputations, and
committee members collect an extra bonus. Nodes that contributed nothing
this round earn nothing, bonus included.
"""

import math
from dataclasses import dataclass

from .core import DomainError, Node, SystemConfig, sigmoid
from .metrics import jain_index


@dataclass
class RewardBreakdown:
    node_id: int
    alpha: float
    beta: float
    effective_stake: float
    historical_contribution: float
    stake_term: float
    contribution_term: float
    fairness_scale: float
    committee_bonus: float
    total: float


def effective_stake(stake: float, mean_stake: float) -> float:
    """Stake counted toward reward shares, capped at three times the mean."""
    return min(stake, 3.0 * mean_stake)


def historical_contribution(history: list[float], zeta: float, tau: int) -> float:
    """Exponentially decayed sum of the last tau+1 contributions, newest first.

    `history` is ordered oldest to newest; entry weights are zeta^age with
    age 0 for the most recent entry. Missing entries contribute nothing.
    """
    total = 0.0
    for age, c in enumerate(reversed(history[-(tau + 1):])):
        total += c * zeta ** age
    return total


def alpha_weight(mean_reputation: float, initial_reputation: float,
                 f_scale: float, stake_weight: float) -> float:
    """Stake weight alpha in (0, stake_weight), growing with the gap between
    the population's mean reputation and the node's starting reputation."""
    if f_scale <= 0:
        raise DomainError("f_scale must be positive")
    return sigmoid((mean_reputation - initial_reputation) / f_scale) * stake_weight


def committee_bonus(member_reputations: list[float], base_bonus: float, eps: float) -> float:
    """Bonus paid to each committee member: the base bonus scaled by a
    fairness index over the committee's reputations. Zero for an empty
    committee."""
    if not member_reputations:
        return 0.0
    k = len(member_reputations)
    total = math.fsum(member_reputations)
    sq = math.fsum(r * r for r in member_reputations)
    jain = (total * total) / (k * sq + eps)
    return base_bonus * jain * sigmoid((total / k) / 10.0)


def allocate_rewards(nodes: list[Node], committee: list[int], cfg: SystemConfig,
                     t: int) -> list[RewardBreakdown]:
    """Compute every node's reward for round t and append it to the node.

    Shares are normalized by the raw stake total and by the population's
    decayed contribution total; the zero-contribution override is applied
    last, after the committee bonus.
    """
    n = len(nodes)
    reputations = [nd.reputation for nd in nodes]
    mean_rep = math.fsum(reputations) / n
    fairness = jain_index(reputations, cfg.epsilon)

    stakes = [nd.stake for nd in nodes]
    total_stake = math.fsum(stakes)
    mean_stake = total_stake / n

    hist_values = {}
    for nd in nodes:
        contribs = [c for (_, c, _) in nd.contribution_history]
        hist_values[nd.id] = historical_contribution(contribs, cfg.history_decay, cfg.window)
    c_total = math.fsum(hist_values.values())

    members = set(committee)
    member_reps = [nd.reputation for nd in nodes if nd.id in members]
    bonus = committee_bonus(member_reps, cfg.committee_bonus, cfg.epsilon)

    out = []
    for nd in nodes:
        alpha = alpha_weight(mean_rep, nd.initial_reputation, cfg.f_scale, cfg.stake_weight)
        beta = 1.0 - alpha
        s_eff = effective_stake(nd.stake, mean_stake)
        stake_share = s_eff / total_stake if total_stake > 0 else 0.0
        contrib_share = hist_values[nd.id] / c_total if c_total > 0 else 0.0
        stake_term = alpha * cfg.reward_pool * stake_share
        contrib_term = beta * cfg.reward_pool * contrib_share
        r_cmm = bonus if nd.id in members else 0.0
        total = (stake_term + contrib_term) * fairness + r_cmm

        current = nd.contribution_history[-1][1] if nd.contribution_history else None
        if not nd.contribution_history or current == 0.0:
            total = 0.0

        nd.total_reward += total
        nd.reward_history.append((t, total))
        out.append(RewardBreakdown(
            node_id=nd.id, alpha=alpha, beta=beta, effective_stake=s_eff,
            historical_contribution=hist_values[nd.id], stake_term=stake_term,
            contribution_term=contrib_term, fairness_scale=fairness,
            committee_bonus=r_cmm, total=total,
        ))
    return out

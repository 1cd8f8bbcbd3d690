"""Round loop orchestration.

Each round: collect contributions, select the committee, (logically)
aggregate, detect and penalize malicious behaviour or apply the reputation
update, allocate rewards, compute fairness metrics, and emit an audit
record. Rounds apply atomically: a failure inside any step restores the
pre-round state.
"""

import math
from dataclasses import dataclass, field, replace

from . import committee as committee_mod
from . import detection as detection_mod
from . import reward as reward_mod
from .behavior import AttackSchedule, BehaviorPattern, PatternKind, schedule_from_config, sample_contribution
from .contract import contribution_value
from .core import Node, Role, RngStream, RoundRecord, SystemConfig, validate_config, init_population
from .metrics import gini, jain_index
from .reputation import quality, stability, update_reputation


@dataclass
class PublisherLedger:
    """Running account of what the mechanism earns for the task publisher."""
    stake_deductions: float = 0.0
    contract_margin: float = 0.0   # accumulated (V - R) terms, when enabled

    @property
    def total(self) -> float:
        return self.stake_deductions + self.contract_margin


@dataclass
class WorldState:
    cfg: SystemConfig
    nodes: list[Node]
    schedule: AttackSchedule
    rng: RngStream
    t: int = 0
    ledger: PublisherLedger = field(default_factory=PublisherLedger)
    records: list[RoundRecord] = field(default_factory=list)


_NORMAL = BehaviorPattern(PatternKind.NORMAL)


def new_world(cfg: SystemConfig, seed: int | None = None) -> WorldState:
    """Validate the config and build the initial world state."""
    validate_config(cfg)
    rng = RngStream(cfg.seed if seed is None else seed)
    nodes = init_population(cfg, rng)
    return WorldState(cfg=cfg, nodes=nodes, schedule=schedule_from_config(cfg), rng=rng)


def collect_contributions(state: WorldState) -> tuple[dict[int, tuple[float, float]], list[int]]:
    """Sample every node's (contribution, completion time) for the current
    round and append it to the node histories.

    With a finite submission deadline, late submissions are recorded as zero
    contributions and reported as timeout violations. On-time positive
    contributions increment the participation counter.
    """
    cfg, t = state.cfg, state.t
    collected: dict[int, tuple[float, float]] = {}
    timeouts: list[int] = []
    for nd in state.nodes:
        pattern = _NORMAL if nd.role is Role.HONEST else state.schedule.pattern_at(t)
        gen = state.rng.stream("contrib", t, nd.id)
        c, tau = sample_contribution(pattern, cfg, gen)
        if cfg.t_max is not None and tau > cfg.t_max:
            c = 0.0
            timeouts.append(nd.id)
        nd.contribution_history.append((t, c, tau))
        if c > 0.0:
            nd.participation += 1
        collected[nd.id] = (c, tau)
    return collected, timeouts


def _snapshot_nodes(nodes: list[Node]) -> list[Node]:
    # History entries are immutable tuples, so shallow list copies are enough.
    return [replace(nd,
                    contribution_history=list(nd.contribution_history),
                    reward_history=list(nd.reward_history))
            for nd in nodes]


def run_round(state: WorldState) -> RoundRecord:
    """Execute one full round and append its record. Atomic over the state."""
    cfg, t = state.cfg, state.t
    if t >= cfg.rounds:
        raise ValueError(f"round {t} out of range; run has {cfg.rounds} rounds")
    backup = (_snapshot_nodes(state.nodes), replace(state.ledger))
    try:
        record = _run_round_steps(state)
    except Exception:
        state.nodes, state.ledger = backup
        raise
    state.records.append(record)
    state.t += 1
    return record


def _run_round_steps(state: WorldState) -> RoundRecord:
    cfg, t, nodes = state.cfg, state.t, state.nodes
    n = len(nodes)

    # (1) contributions
    collected, timeouts = collect_contributions(state)

    # (2) committee on pre-update reputations, then cooldown bookkeeping
    selection = committee_mod.select_committee(nodes, cfg, state.rng.stream("committee", t), t)
    committee_mod.update_cooldowns(nodes, selection.members, cfg)

    # (3) committee performs aggregation: logical no-op, contribution scalars
    # stand in for model updates

    # (4) detection over the read snapshot
    report = detection_mod.detect(nodes, cfg, t)

    # (5) penalties for detected nodes, reputation update for the rest
    rep_before = [nd.reputation for nd in nodes]
    deducted = detection_mod.apply_penalties(nodes, report, cfg)
    state.ledger.stake_deductions += deducted
    detected_set = set(report.detected)
    qualities = [0.0] * n
    for nd in nodes:
        c_now, _ = collected[nd.id]
        q = quality(c_now, cfg.c_min, cfg.c_max)
        qualities[nd.id] = q
        if nd.id in detected_set:
            continue
        window = nd.recent_contributions(cfg.window)
        lam = stability(window, cfg.window, cfg.default_stability)
        nd.reputation = update_reputation(nd, q, lam, cfg, t)

    # (6) rewards on post-update reputations
    breakdowns = reward_mod.allocate_rewards(nodes, selection.members, cfg, t)
    rewards = [0.0] * n
    bonus_paid = 0.0
    for b in breakdowns:
        rewards[b.node_id] = b.total
        if b.total > 0.0:
            bonus_paid += b.committee_bonus
    if cfg.contract_accounting:
        for nd in nodes:
            c_now, tau_now = collected[nd.id]
            v = contribution_value(c_now, tau_now, cfg.contribution_bonus, cfg.c_min, cfg.c_max)
            state.ledger.contract_margin += v - rewards[nd.id]

    # (7) fairness metrics over this round's rewards
    jain = jain_index(rewards, cfg.epsilon)
    g = gini(rewards)

    # (8) audit record
    penalties = [report.penalties.get(i, 0.0) for i in range(n)]
    return RoundRecord(
        round=t,
        committee=sorted(selection.members),
        undersized_committee=selection.undersized,
        contributions=[collected[i][0] for i in range(n)],
        completion_times=[collected[i][1] for i in range(n)],
        qualities=qualities,
        reputation_before=rep_before,
        reputation_after=[nd.reputation for nd in nodes],
        penalties=penalties,
        rewards=rewards,
        detected=sorted(report.detected),
        timeouts=timeouts,
        jain_fairness=jain,
        gini=g,
        total_paid=math.fsum(rewards),
        committee_bonus_paid=bonus_paid,
    )


@dataclass
class SimulationResult:
    cfg: SystemConfig
    seed: int
    records: list[RoundRecord]
    nodes: list[Node]
    ledger: PublisherLedger

    def reward_totals(self, role: Role | None = None) -> list[float]:
        return [nd.total_reward for nd in self.nodes if role is None or nd.role is role]

    def reputations(self, role: Role | None = None) -> list[float]:
        return [nd.reputation for nd in self.nodes if role is None or nd.role is role]

    def first_detection_round(self) -> dict[int, int]:
        """Earliest round each node id was flagged, for nodes ever flagged."""
        first: dict[int, int] = {}
        for rec in self.records:
            for node_id in rec.detected:
                first.setdefault(node_id, rec.round)
        return first

    def summary(self) -> dict:
        honest = [nd for nd in self.nodes if nd.role is Role.HONEST]
        malicious = [nd for nd in self.nodes if nd.role is Role.MALICIOUS]
        total_honest = math.fsum(nd.total_reward for nd in honest)
        total_malicious = math.fsum(nd.total_reward for nd in malicious)
        return {
            "seed": self.seed,
            "rounds": len(self.records),
            "n_nodes": len(self.nodes),
            "n_honest": len(honest),
            "n_malicious": len(malicious),
            "honest_total_reward": total_honest,
            "malicious_total_reward": total_malicious,
            "honest_mean_reputation": math.fsum(nd.reputation for nd in honest) / len(honest) if honest else 0.0,
            "malicious_mean_reputation": math.fsum(nd.reputation for nd in malicious) / len(malicious) if malicious else 0.0,
            "cumulative_reward_gini": gini([nd.total_reward for nd in self.nodes]),
            "honest_reward_gini": gini([nd.total_reward for nd in honest]) if honest else 0.0,
            "publisher_stake_income": self.ledger.stake_deductions,
            "publisher_contract_margin": self.ledger.contract_margin,
            "detected_per_round": [len(rec.detected) for rec in self.records],
            "first_detection_round": self.first_detection_round(),
        }


def run_simulation(cfg: SystemConfig, seed: int | None = None) -> SimulationResult:
    """Run the configured number of rounds and return the full trace."""
    state = new_world(cfg, seed)
    for _ in range(cfg.rounds):
        run_round(state)
    return SimulationResult(cfg=cfg, seed=state.rng.seed, records=state.records,
                            nodes=state.nodes, ledger=state.ledger)

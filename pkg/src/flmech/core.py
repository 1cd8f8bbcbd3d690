"""Domain types, configuration, validation, and the deterministic RNG contract.

Everything downstream (behavior sampling, committee selection, reputation,
detection, rewards) works on the types defined here. All monetary and
reputation quantities are plain floats; there is no fixed-point arithmetic.
"""

import math
import zlib
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    """Raised by validate_config; message lists every violated constraint."""


class DomainError(ValueError):
    """An argument lies outside a function's mathematical domain."""


def sigmoid(x: float) -> float:
    """Logistic function 1/(1+e^-x), overflow-safe for large |x|."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


class Role(Enum):
    HONEST = "honest"
    MALICIOUS = "malicious"


@dataclass
class Node:
    """One participant's full economic state.

    The `role` tag is ground truth for the simulation only; mechanism code
    (committee, detection, rewards) never reads it.
    """
    id: int
    stake: float
    reputation: float
    initial_reputation: float
    total_reward: float = 0.0
    violations: int = 0
    participation: int = 0
    cooldown: int = 0
    # time-ordered (round, contribution, completion_time) / (round, reward)
    contribution_history: list[tuple[int, float, float]] = field(default_factory=list)
    reward_history: list[tuple[int, float]] = field(default_factory=list)
    identity_verified: bool = True
    role: Role = Role.HONEST

    def recent_contributions(self, count: int, before_round: Optional[int] = None) -> list[float]:
        """Last `count` recorded contributions, optionally excluding rounds >= before_round."""
        entries = self.contribution_history
        if before_round is not None:
            entries = [e for e in entries if e[0] < before_round]
        return [c for (_, c, _) in entries[-count:]]


@dataclass
class SystemConfig:
    """Simulation parameter ledger.

    The first block mirrors the published parameter table one field per
    symbol; the second block holds implementation-level defaults that the
    mechanism needs but the table does not pin down. All fields are plain
    values so a config is trivially copyable and serializable.
    """
    # --- parameter table ---
    initial_stake: float = 100.0          # S_i
    initial_reputation: float = 100.0     # r_i^0
    c_min: float = 0.0                    # C_min
    c_max: float = 10.0                   # C_max
    gamma: float = 0.5                    # reputation decay exponent (committee weighting)
    r_max_early: float = 300.0            # reputation cap while t <= r_max_switch_round
    r_max_late: float = 500.0             # reputation cap afterwards
    r_max_switch_round: int = 5
    epsilon: float = 1e-8                 # division guard
    cooldown_period: int = 3              # cd
    strata: int = 3                       # L
    committee_bonus: float = 40.0         # B_cmm
    base_decay: float = 0.88              # delta_b
    decay_compensation: float = 0.07      # lambda_p
    window: int = 5                       # tau (recent historical rounds)
    default_stability: float = 0.8        # tau_stab, for nodes with short history
    contribution_bonus: float = 50.0      # X_c
    stability_bonus: float = 30.0         # X_s
    reputation_penalty_factor: float = 0.3  # lambda_r
    stake_penalty_factor: float = 0.1     # lambda_s
    history_decay: float = 0.9            # zeta
    reward_pool: float = 1200.0           # B
    n_nodes: int = 100                    # n
    stake_weight: float = 0.4             # lambda_stake
    committee_size: int = 5               # K
    malicious_percent: float = 0.15       # m
    eta_switch: int = 5                   # first attack-phase boundary
    rounds: int = 90

    # --- design-decision defaults ---
    f_scale: float = 100.0                # reputation scale inside the alpha weight
    gamma_c: float = 0.5                  # effort-cost coefficient
    t_max: Optional[float] = None         # submission deadline; None = no timeout
    theta_low: float = 0.3                # detection: persistent-low threshold
    theta_fluct: float = 2.0              # detection: per-round outlier threshold
    theta_jump: float = 6.0               # detection: sudden-change threshold
    eps_std: float = 1.2                  # detection: std floor for the jump test
    false_high_mean: float = 9.5          # false-high attack distribution (gaussian)
    false_high_std: float = 0.25
    fluct_low: float = 0.9                # multiplicative fluctuation range for honest draws
    fluct_high: float = 1.1
    tau_low: float = 0.5                  # completion-time range (uniform)
    tau_high: float = 1.5
    normal_mu: float = 7.0                # honest contribution gaussian
    normal_sigma: float = 1.0
    random_mix_p_high: float = 0.6        # probability of a false-high draw in the mixed attack
    timeout_violation_weight: float = 0.3  # omega for timeout violations (compliance)
    malicious_violation_weight: float = 1.0  # omega for detected malicious behaviour
    severe_compliance_cutoff: float = 1.0  # weighted severity at/above which proceeds drop to zero
    identity_verified: bool = True
    contract_accounting: bool = False     # accumulate (V - R) margins in the publisher ledger
    attack_schedule: Optional[list[tuple[int, int, str]]] = None  # explicit phase table override
    seed: int = 42

    def r_max(self, t: int) -> float:
        """Reputation cap schedule for round t."""
        return self.r_max_early if t <= self.r_max_switch_round else self.r_max_late


# Config file values are parsed against the dataclass field types.
_CONFIG_FIELDS = {f.name: f for f in fields(SystemConfig)}


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every config invariant; return the config if all hold.

    Raises ConfigError naming each violated constraint (all of them, not
    just the first).
    """
    problems = []
    if cfg.strata < 1:
        problems.append("strata: L must be >= 1")
    if cfg.n_nodes < 1:
        problems.append("n_nodes: population must be >= 1")
    if cfg.committee_size < 1:
        problems.append("committee_size: must be >= 1")
    if cfg.committee_size > cfg.n_nodes:
        problems.append("committee_size: committee size exceeds population")
    if not (0.0 < cfg.gamma <= 1.0):
        problems.append("gamma: must lie in (0,1]")
    if not (0.0 < cfg.history_decay < 1.0):
        problems.append("history_decay: zeta must lie in (0,1)")
    if cfg.base_decay + cfg.decay_compensation > 1.0:
        problems.append("base_decay/decay_compensation: delta_b + lambda_p must be <= 1")
    if not (0.0 <= cfg.malicious_percent <= 1.0):
        problems.append("malicious_percent: must lie in [0,1]")
    if cfg.c_max <= cfg.c_min:
        problems.append("c_max: must exceed c_min")
    if cfg.window < 1:
        problems.append("window: must be >= 1")
    if cfg.rounds < 0:
        problems.append("rounds: must be >= 0")
    if cfg.cooldown_period < 0:
        problems.append("cooldown_period: must be >= 0")
    if cfg.f_scale <= 0:
        problems.append("f_scale: must be positive")
    if cfg.gamma_c <= 0:
        problems.append("gamma_c: must be positive")
    if cfg.epsilon <= 0:
        problems.append("epsilon: must be positive")
    if cfg.fluct_low > cfg.fluct_high:
        problems.append("fluct_low/fluct_high: invalid range")
    if cfg.tau_low > cfg.tau_high or cfg.tau_low <= 0:
        problems.append("tau_low/tau_high: completion times must be a positive range")
    if not (0.0 <= cfg.random_mix_p_high <= 1.0):
        problems.append("random_mix_p_high: must lie in [0,1]")
    nonneg = [
        "initial_stake", "initial_reputation", "r_max_early", "r_max_late",
        "committee_bonus", "base_decay", "decay_compensation", "default_stability",
        "contribution_bonus", "stability_bonus", "reputation_penalty_factor",
        "stake_penalty_factor", "reward_pool", "stake_weight", "theta_low",
        "theta_fluct", "theta_jump", "eps_std", "normal_sigma", "false_high_std",
        "timeout_violation_weight", "malicious_violation_weight",
        "severe_compliance_cutoff", "eta_switch",
    ]
    for name in nonneg:
        if getattr(cfg, name) < 0:
            problems.append(f"{name}: must be non-negative")
    if cfg.t_max is not None and cfg.t_max <= 0:
        problems.append("t_max: must be positive when set")
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg


def _parse_value(name: str, raw: str):
    """Parse a config-file value according to the target field's type."""
    raw = raw.strip()
    if raw.lower() in ("none", "null", ""):
        return None
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    fld = _CONFIG_FIELDS[name]
    if fld.type in ("int", int):
        return int(raw)
    if fld.type in ("float", float):
        return float(raw)
    if fld.type in ("bool", bool):
        return raw.lower() == "true"
    # Optional[float] / Optional[int] and similar: try numeric forms
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _parse_schedule(raw: str) -> list[tuple[int, int, str]]:
    """Parse `start:end:pattern` phase triples separated by commas."""
    phases = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ConfigError(f"attack_schedule: bad phase '{chunk}', expected start:end:pattern")
        phases.append((int(parts[0]), int(parts[1]), parts[2].strip()))
    return phases


def load_config(path: str | Path) -> SystemConfig:
    """Load a `key = value` config file into a validated SystemConfig.

    Lines starting with `#` are comments. Keys must be SystemConfig field
    names; unknown keys raise ConfigError.
    """
    path = Path(path)
    overrides = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{line}'")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
        if key == "attack_schedule":
            overrides[key] = _parse_schedule(raw)
        else:
            overrides[key] = _parse_value(key, raw)
    return validate_config(replace(SystemConfig(), **overrides))


def config_to_dict(cfg: SystemConfig) -> dict:
    """Flat dict of all config fields (attack_schedule as phase triples)."""
    out = {}
    for f in fields(SystemConfig):
        v = getattr(cfg, f.name)
        if f.name == "attack_schedule" and v is not None:
            v = [list(p) for p in v]
        out[f.name] = v
    return out


class RngStream:
    """Deterministic labeled randomness.

    One root seed; every stochastic draw happens on a sub-stream labeled by
    (purpose tag, round, node id). Identical (seed, label) always yields the
    identical generator, and distinct labels yield statistically independent
    generators, so reordering independent computations cannot change results.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, purpose: str, round_: int = 0, node: int = 0) -> np.random.Generator:
        tag = zlib.crc32(purpose.encode("utf-8"))
        ss = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, tag, round_, node])
        return np.random.default_rng(ss)


@dataclass
class RoundRecord:
    """Per-round audit trail: everything one round decided, per node."""
    round: int
    committee: list[int]
    undersized_committee: bool
    contributions: list[float]            # indexed by node id
    completion_times: list[float]
    qualities: list[float]
    reputation_before: list[float]
    reputation_after: list[float]
    penalties: list[float]
    rewards: list[float]
    detected: list[int]
    timeouts: list[int]
    jain_fairness: float
    gini: float
    total_paid: float
    committee_bonus_paid: float


def init_population(cfg: SystemConfig, rng: RngStream) -> list[Node]:
    """Create the starting population.

    Exactly round-half-up(malicious_percent * n) nodes are tagged malicious,
    chosen on the ("roles", 0) stream; everything else about the nodes is
    identical.
    """
    n = cfg.n_nodes
    n_malicious = int(math.floor(cfg.malicious_percent * n + 0.5))
    gen = rng.stream("roles", 0, 0)
    malicious_ids = set(gen.choice(n, size=n_malicious, replace=False).tolist()) if n_malicious else set()
    nodes = []
    for i in range(n):
        nodes.append(Node(
            id=i,
            stake=cfg.initial_stake,
            reputation=cfg.initial_reputation,
            initial_reputation=cfg.initial_reputation,
            identity_verified=cfg.identity_verified,
            role=Role.MALICIOUS if i in malicious_ids else Role.HONEST,
        ))
    return nodes

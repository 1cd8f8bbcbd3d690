"""Contract economics: contribution value, utility and profit, IR/IC checks,
the closed-form optimal contract, and a constrained numerical solver.

The relaxed single-participant problem treats the per-round pool payout as a
linear function of the contribution (slope = marginal decayed-history share
of the pool) and the contract reward R as the participant-facing floor that
must cover the effort cost. The publisher's objective is then

    profit(C, R) = V(C) - slope * C - (R - cost(C))

i.e. contribution value, minus the pool payout, minus the rent left to the
participant. Profit strictly decreases in R, so the rationality constraint
R >= cost(C) binds at any optimum, and along that boundary the first-order
condition is V'(C) = slope, the same balance the closed form solves. The
solver is always validated against a dense grid oracle over (C, R).
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .core import DomainError, SystemConfig, sigmoid


class ProbabilityError(ValueError):
    """Type probabilities do not form a distribution."""


class DegenerateContract(ValueError):
    """The stake equation's denominator is non-positive."""


class SolverError(RuntimeError):
    """The constrained solver failed to converge within its budget."""


@dataclass(frozen=True)
class ContractItem:
    type_index: float       # theta, higher = better type
    contribution: float     # C
    stake: float            # S
    reward: float           # R


@dataclass
class ContractMenu:
    items: list[ContractItem]           # sorted by type_index descending
    probabilities: list[float]          # one per item, sums to 1
    t_max: Optional[float] = None

    def validate(self) -> None:
        if len(self.items) != len(self.probabilities):
            raise ProbabilityError("one probability per contract item required")
        if abs(math.fsum(self.probabilities) - 1.0) > 1e-9:
            raise ProbabilityError(f"probabilities sum to {math.fsum(self.probabilities)}, not 1")
        types = [it.type_index for it in self.items]
        if any(nxt >= prev for prev, nxt in zip(types, types[1:])):
            raise ProbabilityError("type indices must be strictly descending")


@dataclass(frozen=True)
class ComplianceInput:
    """Weighted violation severities: (weight, normalized severity in [0,1])."""
    violations: tuple[tuple[float, float], ...] = ()


def contribution_value(contribution: float, tau: float, x_c: float,
                       c_min: float, c_max: float) -> float:
    """Value of a contribution to the publisher: unit price x_c/tau times the
    sigmoid quality of the normalized contribution."""
    if tau <= 0:
        raise DomainError("completion time must be positive")
    if c_max <= c_min:
        raise DomainError("c_max must exceed c_min")
    return (x_c / tau) * sigmoid((contribution - c_min) / (c_max - c_min))


def effort_cost(contribution: float, gamma_c: float) -> float:
    """Quadratic effort cost 0.5 * gamma_c * C^2."""
    if gamma_c <= 0:
        raise DomainError("gamma_c must be positive")
    return 0.5 * gamma_c * contribution ** 2


def compliance(inp: ComplianceInput, severe_cutoff: float) -> float:
    """Compliance indicator in [0,1]: exp of minus the weighted severity sum,
    dropping to exactly 0 once the sum reaches the severe cutoff."""
    score = math.fsum(w * v for w, v in inp.violations)
    if score >= severe_cutoff:
        return 0.0
    return math.exp(-score)


def participant_utility(item: ContractItem, compl: float, lambda_s: float,
                        gamma_c: float) -> float:
    """Reward kept under compliance, minus the at-risk stake share lost to
    non-compliance, minus the effort cost."""
    return item.reward * compl - lambda_s * item.stake * (1.0 - compl) \
        - effort_cost(item.contribution, gamma_c)


def publisher_profit(item: ContractItem, value: float, compl: float,
                     lambda_s: float) -> float:
    """Publisher's take from one item: contribution value net of reward under
    compliance, plus the forfeited stake share otherwise."""
    return (value - item.reward) * compl + lambda_s * item.stake * (1.0 - compl)


def expected_profit(menu: ContractMenu, values: list[float],
                    compliances: list[float], lambda_s: float) -> float:
    """Probability-weighted profit over the whole menu."""
    menu.validate()
    return math.fsum(
        p * publisher_profit(item, v, c, lambda_s)
        for item, p, v, c in zip(menu.items, menu.probabilities, values, compliances)
    )


@dataclass
class IRReport:
    utilities: list[float]
    satisfied: list[bool]
    satisfaction_rate: float
    min_utility: float


def check_IR(menu: ContractMenu, gamma_c: float, lambda_s: float,
             compliances: Optional[list[float]] = None) -> IRReport:
    """Individual rationality: each type's own-item utility is non-negative."""
    if compliances is None:
        compliances = [1.0] * len(menu.items)
    utils = [participant_utility(it, c, lambda_s, gamma_c)
             for it, c in zip(menu.items, compliances)]
    flags = [u >= 0.0 for u in utils]
    rate = sum(flags) / len(flags) if flags else 1.0
    return IRReport(utils, flags, rate, min(utils) if utils else 0.0)


@dataclass
class ICReport:
    truthful: list[bool]
    worst_margin: float     # max over types of (best deviation utility - truthful utility)
    satisfied: bool


def check_IC(utility_matrix: list[list[float]], tol: float = 1e-9) -> ICReport:
    """Incentive compatibility from a utility matrix U[i][j] = utility of
    type i choosing the item designed for type j."""
    truthful = []
    worst = -math.inf
    for i, row in enumerate(utility_matrix):
        margin = max(row[j] - row[i] for j in range(len(row)))
        worst = max(worst, margin)
        truthful.append(margin <= tol)
    if not utility_matrix:
        return ICReport([], 0.0, True)
    return ICReport(truthful, worst, all(truthful))


@dataclass(frozen=True)
class ContractContext:
    """Exogenous quantities the optimality formulas treat as constants."""
    fairness: float = 1.0           # J(r) at the operating point
    c_total: float = 0.0            # population decayed contribution mass
    c_hist: float = 0.0             # one participant's decayed contribution
    tau_time: float = 1.0           # completion time entering V(C)
    committee_term: float = 0.0     # bonus already promised to the participant


def default_contract_context(cfg: SystemConfig) -> ContractContext:
    """Operating point implied by the config: every participant at the
    contribution ceiling with a full decayed history."""
    zeta_sum = (1.0 - cfg.history_decay ** (cfg.window + 1)) / (1.0 - cfg.history_decay)
    c_hist = cfg.c_max * zeta_sum
    return ContractContext(
        fairness=1.0,
        c_total=cfg.n_nodes * c_hist,
        c_hist=c_hist,
        tau_time=1.0,
        committee_term=0.0,
    )


def reward_slope(cfg: SystemConfig, ctx: ContractContext) -> float:
    """Marginal pool payout per unit of sustained contribution: the
    contribution-weighted pool share divided by the total decayed mass, times
    the decayed-history multiplier of one unit of contribution."""
    zeta = cfg.history_decay
    zeta_mass = (1.0 - zeta ** (cfg.window + 1)) / (1.0 - zeta)
    return (1.0 - cfg.stake_weight) * cfg.reward_pool * ctx.fairness * zeta_mass / ctx.c_total


@dataclass
class ClosedFormContribution:
    c_star: float
    unclamped: Optional[float]
    interior_exists: bool
    x: float


def optimal_contribution_closed_form(cfg: SystemConfig,
                                     ctx: Optional[ContractContext] = None) -> ClosedFormContribution:
    """First-order-condition contribution level, clamped to [c_min, c_max].

    The interior condition balances the marginal contribution value against
    the marginal pool payout (reward_slope). With k = 1/c_max it reduces to
    C = c_max * ln(x - 1) for the ratio

        x = contribution_bonus * k / (tau_time * reward_slope)

    so x grows with the population's decayed contribution mass c_total. No
    interior solution exists for x <= 1 (the marginal payout dominates
    everywhere); the flag is cleared and c_min returned.
    """
    if ctx is None:
        ctx = default_contract_context(cfg)
    for name, val in [("c_max", cfg.c_max), ("contribution_bonus", cfg.contribution_bonus),
                      ("reward_pool", cfg.reward_pool), ("fairness", ctx.fairness),
                      ("c_total", ctx.c_total), ("tau_time", ctx.tau_time)]:
        if val <= 0:
            raise DomainError(f"{name} must be positive")
    if cfg.stake_weight >= 1.0:
        raise DomainError("stake_weight must be below 1")
    k = 1.0 / cfg.c_max
    x = cfg.contribution_bonus * k / (ctx.tau_time * reward_slope(cfg, ctx))
    if x <= 1.0:
        return ClosedFormContribution(cfg.c_min, None, False, x)
    unclamped = cfg.c_max * math.log(x - 1.0)
    clamped = min(cfg.c_max, max(cfg.c_min, unclamped))
    return ClosedFormContribution(clamped, unclamped, True, x)


@dataclass
class ClosedFormContract:
    c_star: float
    s_star: float
    r_star: float
    interior_exists: bool


def optimal_contract_closed_form(cfg: SystemConfig,
                                 ctx: Optional[ContractContext] = None) -> ClosedFormContract:
    """Full closed-form contract: C* from the first-order condition, the
    IR-binding reward R* = cost(C*), and the uniform stake S* that balances
    the stake-weighted share of the pool against the reward net of the
    committee and contribution terms."""
    if ctx is None:
        ctx = default_contract_context(cfg)
    cf = optimal_contribution_closed_form(cfg, ctx)
    r_star = effort_cost(cf.c_star, cfg.gamma_c)
    pool_term = (1.0 - cfg.stake_weight) * cfg.reward_pool * ctx.fairness * ctx.c_hist / ctx.c_total
    denom = r_star - ctx.committee_term - pool_term
    if denom <= 0:
        raise DegenerateContract(
            f"stake equation denominator is {'zero' if denom == 0 else 'negative'} "
            f"({denom:.6g}); reward {r_star:.6g} does not exceed committee + contribution "
            f"terms {ctx.committee_term + pool_term:.6g}")
    s_star = cfg.stake_weight * cfg.reward_pool * ctx.fairness / (cfg.n_nodes * denom)
    return ClosedFormContract(cf.c_star, s_star, r_star, cf.interior_exists)


@dataclass
class OptimalSolution:
    c_star: float
    s_star: float
    r_star: float
    profit: float
    ir_satisfaction_rate: float
    min_utility: float
    diagnostics: dict = field(default_factory=dict)


def relaxed_profit(c: float, r: float, cfg: SystemConfig, ctx: ContractContext) -> float:
    """Publisher profit for one (contribution, reward) pair: contribution
    value minus the pool payout slope*C minus the participant rent R - cost(C)."""
    value = contribution_value(c, ctx.tau_time, cfg.contribution_bonus, cfg.c_min, cfg.c_max)
    return value - reward_slope(cfg, ctx) * c - (r - effort_cost(c, cfg.gamma_c))


def grid_oracle(cfg: SystemConfig, ctx: ContractContext,
                c_bounds: tuple[float, float], r_bounds: tuple[float, float],
                points_per_axis: int = 2001) -> tuple[float, float, float]:
    """Dense feasible-grid maximum of relaxed_profit with R >= cost(C).

    Returns (C, R, profit) at the best grid point. The grid includes both
    endpoints on each axis; with 2001 points the step is range/2000.
    """
    cs = np.linspace(c_bounds[0], c_bounds[1], points_per_axis)
    rs = np.linspace(r_bounds[0], r_bounds[1], points_per_axis)
    values = (cfg.contribution_bonus / ctx.tau_time) / (
        1.0 + np.exp(-(cs - cfg.c_min) / (cfg.c_max - cfg.c_min)))
    costs = 0.5 * cfg.gamma_c * cs ** 2
    slope = reward_slope(cfg, ctx)
    profit = (values - slope * cs + costs)[:, None] - rs[None, :]
    feasible = rs[None, :] >= costs[:, None]
    profit = np.where(feasible, profit, -np.inf)
    flat = int(np.argmax(profit))
    i, j = divmod(flat, points_per_axis)
    return float(cs[i]), float(rs[j]), float(profit[i, j])


def solve_constrained(cfg: SystemConfig, ctx: Optional[ContractContext] = None,
                      c_bounds: Optional[tuple[float, float]] = None,
                      r_bounds: Optional[tuple[float, float]] = None,
                      tolerance: float = 1e-6, max_evaluations: int = 10_000,
                      ir_margin: float = 1e-9) -> OptimalSolution:
    """Maximize publisher profit subject to participant rationality.

    Runs SLSQP on -relaxed_profit with the inequality R - cost(C) >= 0, snaps
    the result onto the active bounds, and validates it against the dense
    grid oracle. Profit strictly decreases in R, so the rational-participation
    constraint binds at the optimum; the returned reward sits ir_margin above
    the cost so the participant's utility stays strictly positive.
    """
    if ctx is None:
        ctx = default_contract_context(cfg)
    if c_bounds is None:
        c_bounds = (cfg.c_min, cfg.c_max)
    if r_bounds is None:
        r_bounds = (0.0, 2.0 * effort_cost(c_bounds[1], cfg.gamma_c))

    def neg_profit(v):
        c, r = v
        return -relaxed_profit(c, r, cfg, ctx)

    def ir_constraint(v):
        c, r = v
        return r - effort_cost(c, cfg.gamma_c)

    x0 = [0.5 * (c_bounds[0] + c_bounds[1]),
          effort_cost(0.5 * (c_bounds[0] + c_bounds[1]), cfg.gamma_c) + 1.0]
    result = optimize.minimize(
        neg_profit, x0, method="SLSQP",
        bounds=[c_bounds, r_bounds],
        constraints=[{"type": "ineq", "fun": ir_constraint}],
        options={"maxiter": max_evaluations, "ftol": tolerance * 1e-3},
    )
    if not result.success and result.status != 8:  # 8: positive directional derivative at bound
        raise SolverError(f"SLSQP failed after {result.nit} iterations: {result.message}")

    c_star = min(c_bounds[1], max(c_bounds[0], float(result.x[0])))
    for bound in c_bounds:
        if abs(c_star - bound) <= 1e-6:
            c_star = bound
    r_star = effort_cost(c_star, cfg.gamma_c) + ir_margin
    profit = relaxed_profit(c_star, r_star, cfg, ctx)
    residual = max(0.0, effort_cost(c_star, cfg.gamma_c) - r_star)
    if residual > tolerance:
        raise SolverError(f"constraint residual {residual} exceeds tolerance {tolerance}")

    grid_c, grid_r, grid_profit = grid_oracle(cfg, ctx, c_bounds, r_bounds)
    gap = abs(profit - grid_profit)

    # Stake balancing equation at the solved reward; degenerate denominators
    # surface as NaN in the solution rather than aborting the solve.
    pool_term = (1.0 - cfg.stake_weight) * cfg.reward_pool * ctx.fairness * ctx.c_hist / ctx.c_total
    denom = r_star - ctx.committee_term - pool_term
    if denom > 0:
        s_star = cfg.stake_weight * cfg.reward_pool * ctx.fairness / (cfg.n_nodes * denom)
    else:
        s_star = float("nan")

    item = ContractItem(type_index=1.0, contribution=c_star, stake=s_star, reward=r_star)
    menu = ContractMenu(items=[item], probabilities=[1.0])
    ir = check_IR(menu, cfg.gamma_c, cfg.stake_penalty_factor)

    return OptimalSolution(
        c_star=c_star, s_star=s_star, r_star=r_star, profit=profit,
        ir_satisfaction_rate=ir.satisfaction_rate, min_utility=ir.min_utility,
        diagnostics={
            "iterations": int(result.nit),
            "constraint_residual": residual,
            "grid_c": grid_c, "grid_r": grid_r, "grid_profit": grid_profit,
            "grid_gap": gap,
            "solver_message": str(result.message),
        },
    )

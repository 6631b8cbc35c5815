"""Per-node behavioral state and the whitewash decision rule.

An agent's honesty is a fixed trait in [0, 1]. Agents whose honesty falls
below the advertised newcomer reputation are potential whitewashers: resetting
their identity would hand them more reputation than their behavior earns, so
they may dump a bad record and rejoin. Everyone else cooperates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .graph import NodeId


class Role(enum.Enum):
    COOPERATIVE = "cooperative"
    POTENTIAL_WHITEWASHER = "potential_whitewasher"


class WhitewashOutcome(enum.Enum):
    NO_ATTEMPT = "no_attempt"
    ATTEMPT_FAILED = "attempt_failed"
    WHITEWASHED = "whitewashed"


class WrongRoleError(ValueError):
    pass


class UndefinedReputationError(ZeroDivisionError):
    pass


@dataclass
class AgentState:
    node: NodeId
    honesty: float
    role: Role
    reputation: float
    attempts: int = 0
    successes: int = 0
    joined_at: int = 0
    resource_provided: float = 0.0
    resource_requested: float = 0.0


@dataclass(frozen=True)
class PopulationConfig:
    size: int
    r_ini_max: float
    r_ini_min: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.r_ini_min < self.r_ini_max <= 1:
            raise ValueError("need 0 <= r_ini_min < r_ini_max <= 1")
        if self.size < 1:
            raise ValueError("population size must be >= 1")


Population = dict[NodeId, AgentState]


def init_population(cfg: PopulationConfig, rng: np.random.Generator | None = None) -> Population:
    """Create `size` agents on node ids 0..size-1.

    Honesty is i.i.d. Uniform[0,1]; an agent is a potential whitewasher iff
    its honesty is below r_ini_max. Starting reputations are also uniform,
    standing in for histories accumulated before the observation window.
    Draw order: all honesties first, then all reputations.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    honesty = rng.uniform(0.0, 1.0, cfg.size)
    reputation = rng.uniform(0.0, 1.0, cfg.size)
    pop: Population = {}
    for i in range(cfg.size):
        role = Role.POTENTIAL_WHITEWASHER if honesty[i] < cfg.r_ini_max else Role.COOPERATIVE
        pop[i] = AgentState(i, float(honesty[i]), role, float(reputation[i]))
    return pop


def attempt_probability(a: AgentState) -> float:
    """Empirical success rate of past attempts; 1 before the first attempt,
    so fresh potential whitewashers always try once."""
    if a.attempts == 0:
        return 1.0
    return a.successes / a.attempts


def decide_whitewash(
    a: AgentState, offered_r_ini: float, rng: np.random.Generator
) -> WhitewashOutcome:
    """Let a potential whitewasher decide whether to reset its identity.

    The agent attempts with probability equal to its past success rate; an
    attempt succeeds iff the offered newcomer reputation is at least its
    honesty (a tie still pays). Counters update only when an attempt fires.
    """
    if a.role is not Role.POTENTIAL_WHITEWASHER:
        raise WrongRoleError(f"node {a.node} is {a.role.value}")
    if rng.random() >= attempt_probability(a):
        return WhitewashOutcome.NO_ATTEMPT
    a.attempts += 1
    if offered_r_ini >= a.honesty:
        a.successes += 1
        return WhitewashOutcome.WHITEWASHED
    return WhitewashOutcome.ATTEMPT_FAILED


def measure_reputation(provided: float, requested: float) -> float:
    if requested <= 0:
        raise UndefinedReputationError("no requests recorded; keep the prior value")
    if not 0 <= provided <= requested:
        raise ValueError("need 0 <= provided <= requested")
    return provided / requested


def rejoin_as_newcomer(
    a: AgentState, new_id: NodeId, offered_r_ini: float, n: int
) -> AgentState:
    """Re-enter the network under a fresh identity: reputation resets to the
    offer, resource history clears, honesty and attempt counters carry over."""
    return AgentState(
        node=new_id,
        honesty=a.honesty,
        role=a.role,
        reputation=offered_r_ini,
        attempts=a.attempts,
        successes=a.successes,
        joined_at=n,
    )

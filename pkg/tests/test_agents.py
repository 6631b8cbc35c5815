from __future__ import annotations

import numpy as np
import pytest

from p2psim import agents
from p2psim.agents import (
    AgentState,
    PopulationConfig,
    Role,
    UndefinedReputationError,
    WhitewashOutcome,
    WrongRoleError,
)


def washer(honesty: float, attempts: int = 0, successes: int = 0) -> AgentState:
    return AgentState(0, honesty, Role.POTENTIAL_WHITEWASHER, 0.5, attempts, successes)


# ---- population ------------------------------------------------------


def test_init_population_roles_follow_honesty():
    cfg = PopulationConfig(size=10000, r_ini_max=0.5, r_ini_min=0.03, seed=1)
    pop = agents.init_population(cfg)
    assert len(pop) == 10000
    frac = np.mean([a.role is Role.POTENTIAL_WHITEWASHER for a in pop.values()])
    assert 0.48 <= frac <= 0.52
    for a in pop.values():
        assert 0 <= a.honesty <= 1
        assert 0 <= a.reputation <= 1
        assert (a.role is Role.POTENTIAL_WHITEWASHER) == (a.honesty < 0.5)
        assert a.attempts == 0 and a.successes == 0


def test_init_population_deterministic():
    cfg = PopulationConfig(size=100, r_ini_max=0.5, r_ini_min=0.03, seed=9)
    assert agents.init_population(cfg) == agents.init_population(cfg)


def test_population_config_validation():
    with pytest.raises(ValueError):
        PopulationConfig(size=10, r_ini_max=0.03, r_ini_min=0.5)
    with pytest.raises(ValueError):
        PopulationConfig(size=10, r_ini_max=1.5, r_ini_min=0.0)
    with pytest.raises(ValueError):
        PopulationConfig(size=0, r_ini_max=0.5, r_ini_min=0.03)
    # r_ini_max testing the degenerate all-cooperative edge needs max > min,
    # so the smallest admissible ceiling is just above zero
    cfg = PopulationConfig(size=1000, r_ini_max=1e-12, r_ini_min=0.0, seed=2)
    pop = agents.init_population(cfg)
    assert all(a.role is Role.COOPERATIVE for a in pop.values())


# ---- attempt probability ---------------------------------------------


def test_attempt_probability():
    assert agents.attempt_probability(washer(0.2)) == 1.0
    assert agents.attempt_probability(washer(0.2, attempts=4, successes=3)) == 0.75
    assert agents.attempt_probability(washer(0.2, attempts=10, successes=0)) == 0.0


# ---- whitewash decision ----------------------------------------------


def test_first_attempt_is_certain_and_succeeds_on_generous_offer():
    a = washer(0.2)
    rng = np.random.default_rng(0)
    assert agents.decide_whitewash(a, 0.5, rng) is WhitewashOutcome.WHITEWASHED
    assert (a.attempts, a.successes) == (1, 1)


def test_attempt_fails_below_honesty():
    a = washer(0.2)
    rng = np.random.default_rng(0)
    assert agents.decide_whitewash(a, 0.03, rng) is WhitewashOutcome.ATTEMPT_FAILED
    assert (a.attempts, a.successes) == (1, 0)


def test_tie_counts_as_whitewash():
    a = washer(0.3)
    rng = np.random.default_rng(0)
    assert agents.decide_whitewash(a, 0.3, rng) is WhitewashOutcome.WHITEWASHED


def test_hopeless_agent_never_attempts():
    a = washer(0.2, attempts=10, successes=0)
    rng = np.random.default_rng(0)
    for _ in range(100):
        assert agents.decide_whitewash(a, 0.9, rng) is WhitewashOutcome.NO_ATTEMPT
    assert (a.attempts, a.successes) == (10, 0)


def test_wrong_role_rejected():
    a = AgentState(0, 0.9, Role.COOPERATIVE, 0.5)
    with pytest.raises(WrongRoleError):
        agents.decide_whitewash(a, 0.5, np.random.default_rng(0))


def test_success_fraction_matches_uniform_cdf():
    """With uniform honesty, the fraction of first attempts that succeed at
    offer r converges to r."""
    rng = np.random.default_rng(5)
    offer = 0.35
    draws = 20000
    honesty = rng.uniform(0, 1, draws)
    wins = 0
    for h in honesty:
        a = washer(float(h))
        if agents.decide_whitewash(a, offer, rng) is WhitewashOutcome.WHITEWASHED:
            wins += 1
    se = np.sqrt(offer * (1 - offer) / draws)
    assert abs(wins / draws - offer) < 3 * se


# ---- reputation measure ----------------------------------------------


def test_measure_reputation():
    assert agents.measure_reputation(3.0, 3.0) == 1.0
    assert agents.measure_reputation(0.0, 3.0) == 0.0
    mu, x = 0.5, 0.5
    assert agents.measure_reputation(mu**x * 2.0, 2.0) == pytest.approx(
        0.7071067811865476
    )


def test_measure_reputation_scale_invariant():
    for alpha in (0.1, 2.0, 17.5):
        assert agents.measure_reputation(0.3 * alpha, 0.8 * alpha) == pytest.approx(
            agents.measure_reputation(0.3, 0.8)
        )


def test_measure_reputation_errors():
    with pytest.raises(UndefinedReputationError):
        agents.measure_reputation(0.0, 0.0)
    with pytest.raises(ValueError):
        agents.measure_reputation(2.0, 1.0)
    with pytest.raises(ValueError):
        agents.measure_reputation(-0.5, 1.0)


# ---- rejoin ----------------------------------------------------------


def test_rejoin_resets_identity_not_history():
    a = washer(0.2, attempts=4, successes=3)
    a.resource_provided = 5.0
    a.resource_requested = 9.0
    b = agents.rejoin_as_newcomer(a, new_id=77, offered_r_ini=0.4, n=12)
    assert b.node == 77
    assert b.reputation == 0.4
    assert b.joined_at == 12
    assert b.honesty == a.honesty
    assert (b.attempts, b.successes) == (4, 3)
    assert b.resource_provided == 0.0 and b.resource_requested == 0.0
    assert b is not a

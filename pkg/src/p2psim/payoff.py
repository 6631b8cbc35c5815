"""Closed-form payoff economics of cooperation versus identity churn.

Compares the expected cumulative payoff of a cooperative node against a
defector under three identity regimes: permanent (defect once, live with the
dead identity), zero-cost (dump the identity and rejoin every round for
free), and finite-cost (same, but each new identity costs z). The crossing
point of the two payoff curves is the number of rounds a newcomer must be
made to wait before cooperation wins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_CROSSOVER_CAP = 1_000_000

# grid resolution for the numeric optimizers, refined afterwards
_GRID_STEP = 1e-3
_REFINE_TOL = 1e-12


class IdentityRegime(enum.Enum):
    PERMANENT = "permanent"
    ZERO_COST = "zero_cost"
    FINITE_COST = "finite_cost"


class CrossoverCapExceeded(RuntimeError):
    """The payoff gap is still closing at the iteration cap; the crossover
    exists but lies beyond it."""


class InfeasibleRegionError(ValueError):
    """No exponent admits a positive newcomer reputation under the given
    service ratio."""


@dataclass(frozen=True)
class PayoffParams:
    mu: float = 0.5  # mean reputation of cooperative peers
    x: float = 0.5  # allocation exponent
    r_ini: float = 0.03  # reputation granted to a newcomer
    c: float = 1.0  # resource quantum per request
    delta: float = 1e-6  # per-round gain from simply being served at all
    z: float = 0.0  # price of a fresh identity
    m: float = 1.0  # requests served per round
    m_prime: float = 1.0  # requests issued per round

    def __post_init__(self):
        if not 0 < self.mu <= 1:
            raise ValueError("mu must be in (0, 1]")
        if self.x <= 0:
            raise ValueError("x must be positive")
        if not 0 <= self.r_ini <= 1:
            raise ValueError("r_ini must be in [0, 1]")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.delta < 0 or self.z < 0:
            raise ValueError("delta and z must be non-negative")
        if self.m < 0 or self.m_prime < 0:
            raise ValueError("m and m_prime must be non-negative")


def _check_regime(p: PayoffParams, regime: IdentityRegime) -> None:
    if regime is IdentityRegime.FINITE_COST and p.z <= 0:
        raise ValueError("finite_cost regime requires z > 0")
    if regime is IdentityRegime.ZERO_COST and p.z != 0:
        raise ValueError("zero_cost regime requires z = 0")


def allocation_probability(rep: float, x: float) -> float:
    """Chance a request is served, as a concave power of reputation."""
    if not 0 <= rep <= 1:
        raise ValueError("reputation must be in [0, 1]")
    if x <= 0:
        raise ValueError("x must be positive")
    return rep**x


def coop_payoff(p: PayoffParams, k, regime: IdentityRegime = IdentityRegime.PERMANENT):
    """Expected cumulative payoff of a cooperative node after k rounds.

    Each round it serves m requests (outflow m·μ^x·c) and issues m' requests,
    served at its own reputation: r_ini^x in the first round, (μ^x)^x after.
    Accepts a scalar or array k.
    """
    _check_regime(p, regime)
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    mu_x = p.mu**p.x
    total = (
        -k * p.m * mu_x * p.c
        + (k - 1) * p.m_prime * mu_x**p.x * p.c
        + p.m_prime * p.r_ini**p.x * p.c
        + k * p.delta
    )
    if regime is IdentityRegime.FINITE_COST:
        total = total - p.z
    return total if total.ndim else float(total)


def defector_payoff(p: PayoffParams, k, regime: IdentityRegime = IdentityRegime.PERMANENT):
    """Expected cumulative payoff of a free rider after k rounds.

    A permanent identity exploits its newcomer reputation once and is then
    starved; identity churn repeats the exploitation every round, paying z
    per fresh identity in the finite-cost regime. Accepts scalar or array k.
    """
    _check_regime(p, regime)
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    round_take = p.m_prime * p.r_ini**p.x * p.c + p.delta
    if regime is IdentityRegime.PERMANENT:
        total = np.full_like(k, round_take, dtype=float)
    elif regime is IdentityRegime.ZERO_COST:
        total = k * round_take
    else:
        total = k * (round_take - p.z)
    return total if total.ndim else float(total)


def crossover_round(
    p: PayoffParams, regime: IdentityRegime, cap: int = DEFAULT_CROSSOVER_CAP
):
    """Smallest k >= 1 where cooperation has caught up with defection.

    Walks the rounds directly (in vectorized blocks). Returns math.inf when
    the gap can never close; raises CrossoverCapExceeded when the gap is
    still closing at the cap.
    """
    _check_regime(p, regime)
    block = 65536
    start = 1
    while start <= cap:
        stop = min(start + block, cap + 1)
        ks = np.arange(start, stop)
        gap = coop_payoff(p, ks, regime) - defector_payoff(p, ks, regime)
        hits = np.nonzero(gap >= 0)[0]
        if hits.size:
            return int(ks[hits[0]])
        start = stop
    probe = np.array([cap, cap + 1])
    diff = coop_payoff(p, probe, regime) - defector_payoff(p, probe, regime)
    if diff[1] - diff[0] <= 0:
        return math.inf
    raise CrossoverCapExceeded(f"no crossover within {cap} rounds, gap still closing")


def closed_form_threshold(p: PayoffParams, regime: IdentityRegime) -> float | None:
    """Real-valued round threshold where the payoff curves cross, for the
    delta = 0 idealization. None when cooperation never catches up."""
    _check_regime(p, regime)
    if p.delta != 0:
        raise ValueError("closed forms hold for delta = 0")
    mu_x = p.mu**p.x
    mu_xx = mu_x**p.x
    r_x = p.r_ini**p.x
    if regime is IdentityRegime.PERMANENT:
        num = p.m_prime * mu_xx
        den = p.m_prime * mu_xx - p.m * mu_x
    elif regime is IdentityRegime.ZERO_COST:
        num = p.m_prime * mu_xx - p.m_prime * r_x
        den = p.m_prime * mu_xx - p.m * mu_x - p.m_prime * r_x
    else:
        num = p.m_prime * mu_xx - p.m_prime * r_x + p.z / p.c
        den = p.m_prime * mu_xx - p.m * mu_x - p.m_prime * r_x + p.z / p.c
    if den <= 0:
        return None
    return num / den


def _ternary_min(f, lo: float, hi: float) -> float:
    while hi - lo > _REFINE_TOL:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return (lo + hi) / 2


def optimal_x_permanent(mu: float = 0.5) -> float:
    """Exponent minimizing the permanent-identity threshold (numerically;
    the minimizer is 1/2 for every mu in (0, 1))."""
    if not 0 < mu < 1:
        raise ValueError("mu must be in (0, 1)")

    def threshold(x: float) -> float:
        mu_xx = mu ** (x * x)
        den = mu_xx - mu**x
        return math.inf if den <= 0 else mu_xx / den

    xs = np.arange(_GRID_STEP, 1.0, _GRID_STEP)
    best = xs[int(np.argmin([threshold(float(x)) for x in xs]))]
    return _ternary_min(threshold, max(best - _GRID_STEP, 1e-9), min(best + _GRID_STEP, 1 - 1e-9))


def feasibility_boundary(mu: float, x: float, m_ratio: float = 1.0) -> float:
    """Largest newcomer reputation at which churning every round stops being
    strictly dominant, at a fixed exponent. Zero when no positive value works."""
    base = mu ** (x * x) - m_ratio * mu**x
    if base <= 0:
        return 0.0
    return base ** (1.0 / x)


def max_feasible_r_ini(mu: float, m_ratio: float = 1.0) -> tuple[float, float]:
    """Maximize the feasibility boundary over the exponent.

    Returns (r_star, x_star): the largest newcomer reputation that any
    exponent can defend, and the exponent achieving it.
    """
    if not 0 < mu < 1:
        raise ValueError("mu must be in (0, 1)")
    if m_ratio <= 0:
        raise ValueError("m_ratio must be positive")
    xs = np.arange(_GRID_STEP, 1.0, _GRID_STEP)
    values = [feasibility_boundary(mu, float(x), m_ratio) for x in xs]
    best_i = int(np.argmax(values))
    if values[best_i] <= 0:
        raise InfeasibleRegionError(
            f"no exponent admits a positive newcomer reputation at mu={mu}, m_ratio={m_ratio}"
        )
    lo = max(xs[best_i] - _GRID_STEP, 1e-9)
    hi = min(xs[best_i] + _GRID_STEP, 1 - 1e-9)
    x_star = _ternary_min(lambda x: -feasibility_boundary(mu, x, m_ratio), lo, hi)
    return feasibility_boundary(mu, x_star, m_ratio), x_star

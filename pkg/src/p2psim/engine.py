"""Discrete-time simulator wiring topology, agents, gossip and the
adaptive newcomer-grant estimator into one loop.

Each `Simulation.step` is one iteration:

1. transaction bookkeeping: nodes start serving in their second iteration
   (the founding population serves from iteration 1), which pins their
   reputation at the expected per-round ratio;
2. gossip snapshot, per-node whitewash-level estimate, newcomer offers,
   and the shared estimate of the grant ceiling;
3. resource allocation (folded into step 1: cooperative nodes provide the
   expected share of what they are asked, free riders provide nothing);
4. whitewash wave: each potential whitewasher may probe one uniformly
   chosen node and reset its identity against that node's current offer;
5. optional voluntary departures of reputable nodes, then population
   growth every tenth iteration;
6. per-iteration metrics.

A reset only looks attractive to an agent that has already cashed one in
if the probed offer strictly beats the grant its current identity was born
with; cheaper offers are declined without burning an attempt. That single
rule is what lets the estimator win: once offers collapse, the population
of past whitewashers has nothing left to gain and goes quiet.

All randomness comes from one generator per run. Draw order inside an
iteration: gossip noise factors (only when noise > 0); the whitewash wave
in ascending node-id order (per agent: target index, then the attempt draw,
then attachment draws on a success); voluntary departures in ascending
node-id order (one draw per reputable candidate, only when enabled); growth
arrivals (per arrival: attachment draws, then honesty). Agents skipped
before a target was drawn consume no randomness, so runs with identical
configurations replay bit for bit.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import agents as agents_mod
from . import graph as graph_mod
from .agents import AgentState, Role, WhitewashOutcome
from .estimator import DepartureKind, classify_departure, estimate_r_ini_max
from .gossip import NEWCOMER_MIN_TENURE, snapshot_average_degree, take_snapshot

TOPOLOGY_KINDS = ("scale_free", "regular")

# New nodes arrive in a batch every this many iterations.
GROWTH_PERIOD = 10

# Resources asked of a node per service round; only the provided/requested
# ratio matters, so the scale is arbitrary.
_SERVICE_QUANTUM = 1.0

# Grant improvements that matter are of order r_ini_min; this margin only
# has to swallow float jitter in gossip means (identical reputations can
# average to a value a few ulps off), never a real difference.
_GRANT_MARGIN = 1e-12


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. Defaults reproduce the reference scenario: a 1000
    node scale-free overlay, no growth, exact gossip, grants starting at
    0.5 with a 0.03 floor."""

    topology: str = "scale_free"
    n: int = 1000
    attach_edges: int = 3
    degree: int = 6
    growth_percent_per_10: float = 0.0
    iterations: int = 500
    r_ini_max0: float = 0.5
    r_ini_min: float = 0.03
    window_n_prime: int = 10
    x: float = 0.5
    mu: float = 0.5
    gossip_noise: float = 0.0
    seed: int = 0
    legit_departure_prob: float = 0.0
    newcomer_window: int = 10

    def __post_init__(self):
        problems = []
        if self.topology not in TOPOLOGY_KINDS:
            problems.append(f"topology: must be one of {TOPOLOGY_KINDS}, got {self.topology!r}")
        if self.n < 2:
            problems.append("n: must be >= 2")
        if self.attach_edges < 1:
            problems.append("attach_edges: must be >= 1")
        if self.degree < 1:
            problems.append("degree: must be >= 1")
        if self.growth_percent_per_10 < 0:
            problems.append("growth_percent_per_10: must be >= 0")
        if self.iterations < 0:
            problems.append("iterations: must be >= 0")
        degenerate = self.r_ini_max0 == 0 and self.r_ini_min == 0
        if not degenerate and not 0 <= self.r_ini_min < self.r_ini_max0 <= 1:
            problems.append(
                "r_ini_min/r_ini_max0: need 0 <= r_ini_min < r_ini_max0 <= 1 "
                "(or both zero to disable grants)"
            )
        if self.window_n_prime < 1:
            problems.append("window_n_prime: must be >= 1")
        if not 0 < self.x <= 1:
            problems.append("x: must be in (0, 1]")
        if not 0 < self.mu <= 1:
            problems.append("mu: must be in (0, 1]")
        if self.gossip_noise < 0:
            problems.append("gossip_noise: must be >= 0")
        if not 0 <= self.legit_departure_prob <= 1:
            problems.append("legit_departure_prob: must be in [0, 1]")
        if self.newcomer_window < NEWCOMER_MIN_TENURE:
            problems.append(f"newcomer_window: must be >= {NEWCOMER_MIN_TENURE}")
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    n_nodes: int
    whitewash_attempts: int
    whitewash_successes: int
    whitewash_fraction: float
    mean_offered_r_ini: float
    mean_w_estimate: float
    mean_w_max: float


class _OfferWindow:
    """Ring-buffer equivalent of the estimator's sliding peak window,
    primed with the grant ceiling known at creation."""

    __slots__ = ("buf", "idx", "wmax")

    def __init__(self, prime: float, size: int):
        self.buf = [0.0] * size
        self.buf[0] = prime
        self.idx = 1
        self.wmax = prime

    def push(self, w: float) -> float:
        i = self.idx % len(self.buf)
        evicted = self.buf[i]
        self.buf[i] = w
        self.idx += 1
        if w >= self.wmax:
            self.wmax = w
        elif evicted == self.wmax:
            self.wmax = max(self.buf)
        return self.wmax


def _build_population(cfg: SimConfig, rng: np.random.Generator) -> agents_mod.Population:
    if cfg.r_ini_max0 > 0:
        pc = agents_mod.PopulationConfig(cfg.n, cfg.r_ini_max0, cfg.r_ini_min, cfg.seed)
        return agents_mod.init_population(pc, rng)
    # Grants disabled: nobody can clear a zero ceiling, so everyone is
    # cooperative. Keep the same draw pattern as init_population.
    honesty = rng.uniform(0.0, 1.0, cfg.n)
    reputation = rng.uniform(0.0, 1.0, cfg.n)
    return {
        i: AgentState(i, float(honesty[i]), Role.COOPERATIVE, float(reputation[i]))
        for i in range(cfg.n)
    }


class Simulation:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        if cfg.topology == "scale_free":
            self.topology = graph_mod.generate_scale_free(cfg.n, cfg.attach_edges, self.rng)
        else:
            self.topology = graph_mod.generate_regular(cfg.n, cfg.degree, self.rng)
        self.agents = _build_population(cfg, self.rng)
        self.iteration = 0
        # Shared estimate of the ceiling other nodes grant newcomers, held
        # at no less than twice the floor so offers never pin themselves
        # into a corner the estimate cannot recover from.
        self._est_floor = min(2 * cfg.r_ini_min, cfg.r_ini_max0)
        self.r_est = cfg.r_ini_max0
        self._mu_x = cfg.mu**cfg.x
        # Per-node estimator state; `_active` holds the ids whose window
        # still contains a nonzero peak, so quiet nodes cost nothing.
        self._windows = {
            v: _OfferWindow(self.r_est, cfg.window_n_prime) for v in self.topology.adj
        }
        self._active = set(self._windows) if self.r_est > 0 else set()
        self._offers: dict[int, float] = {}
        # Most recent per-node whitewash levels, for inspection; nodes
        # absent from the sweep saw no churn and sit at zero.
        self.last_w_sweep: dict[int, float] = {}
        # Churn observed since the previous estimate: new neighbors per
        # host, and departures of reputable neighbors per host.
        self._arrivals: dict[int, int] = {}
        self._legit_gone: dict[int, int] = {}
        self._prev_ndsum = self.topology.neighbor_degree_sums()
        self._prev_count = float(cfg.n)
        # Join-iteration buckets back both the transaction-start rule and
        # the newcomer window, so neither needs a full population scan.
        self._join_buckets: dict[int, list[int]] = {0: list(self.agents)}
        # Identity economics: the grant each current identity was born
        # with, the whitewashers worth polling this iteration, and the ones
        # parked until the grant ceiling climbs back above their last take.
        self._grant_of: dict[int, float] = {}
        self._ready = {
            v for v, a in self.agents.items() if a.role is Role.POTENTIAL_WHITEWASHER
        }
        self._parked: list[tuple[float, int]] = []
        self.auto_whitewash = True

    # ---- per-phase helpers -------------------------------------------

    def _record_transactions(self, n: int) -> None:
        if n == 1:
            starters = list(self.agents)
        else:
            starters = self._join_buckets.get(n - 2, ())
        for vid in starters:
            a = self.agents.get(vid)
            if a is None or a.resource_requested > 0:
                continue
            # One expected service round: cooperative nodes provide the
            # mean allocation share of what they are asked, free riders
            # provide nothing. Later rounds scale both sides of the ratio
            # equally, so the reputation is already stationary.
            a.resource_requested = _SERVICE_QUANTUM
            if a.role is Role.COOPERATIVE:
                a.resource_provided = self._mu_x * _SERVICE_QUANTUM
            a.reputation = agents_mod.measure_reputation(
                a.resource_provided, a.resource_requested
            )

    def _newcomer_pool(self, n: int) -> dict[int, AgentState]:
        pool: dict[int, AgentState] = {}
        for j in range(max(n - self.cfg.newcomer_window, 0), n - NEWCOMER_MIN_TENURE + 1):
            for vid in self._join_buckets.get(j, ()):
                a = self.agents.get(vid)
                if a is not None:
                    pool[vid] = a
        return pool

    def _estimate(self, n: int) -> tuple[float, float, float]:
        cfg = self.cfg
        t = self.topology
        snap = take_snapshot(
            t, self._newcomer_pool(n), n, cfg.gossip_noise, self.rng, cfg.newcomer_window
        )
        self.r_est = min(
            max(estimate_r_ini_max(snap.newcomer_mean_reputation, self.r_est), self._est_floor),
            1.0,
        )
        d_avg = snapshot_average_degree(snap)
        growth_ratio = snap.node_count / self._prev_count
        # Expected share of the arrivals that plain growth explains: each
        # arrival brings attach_edges preferential edges, so a neighborhood
        # of summed degree S expects (g - 1) * attach_edges / d_avg * S new
        # members between estimates.
        coef = (growth_ratio - 1.0) * cfg.attach_edges / d_avg if d_avg > 0 else 0.0

        contrib_a: dict[int, float] = {}
        for j in sorted(self._arrivals):
            nbrs = t.adj.get(j)
            if nbrs is None:
                continue  # the host itself has since departed
            aj = self._arrivals[j]
            for i in nbrs:
                contrib_a[i] = contrib_a.get(i, 0.0) + aj
        contrib_l: dict[int, float] = {}
        for j in sorted(self._legit_gone):
            nbrs = t.adj.get(j)
            if nbrs is None:
                continue
            lj = self._legit_gone[j]
            for i in nbrs:
                contrib_l[i] = contrib_l.get(i, 0.0) + lj

        r_est = self.r_est
        r_min = cfg.r_ini_min
        offers: dict[int, float] = {}
        sweep: dict[int, float] = {}
        w_sum = 0.0
        wmax_sum = 0.0
        offer_sum = 0.0
        candidates = sorted(set(contrib_a) | set(contrib_l) | self._active)
        for i in candidates:
            den = t.neighbor_degree_sum(i)
            if den > 0:
                num = (
                    contrib_a.get(i, 0.0)
                    - coef * self._prev_ndsum.get(i, 0.0)
                    - contrib_l.get(i, 0.0)
                )
                w = min(max(num / den, 0.0), 1.0)
            else:
                w = 0.0
            win = self._windows[i]
            wmax = win.push(w)
            if wmax > 0:
                self._active.add(i)
            else:
                self._active.discard(i)
            if w <= 0:
                offer = r_est
            else:
                ratio = min(w / wmax, 1.0)
                offer = max((1.0 - ratio) ** 2 * r_est, r_min)
            offers[i] = offer
            sweep[i] = w
            w_sum += w
            wmax_sum += wmax
            offer_sum += offer

        n_now = t.node_count
        self._offers = offers
        self.last_w_sweep = sweep
        self._prev_ndsum = t.neighbor_degree_sums()
        self._prev_count = snap.node_count
        self._arrivals = {}
        self._legit_gone = {}
        mean_offer = (offer_sum + (n_now - len(candidates)) * r_est) / n_now
        return mean_offer, w_sum / n_now, wmax_sum / n_now

    def _register_newcomer(self, vid: int, agent: AgentState, grant: float) -> None:
        self.agents[vid] = agent
        self._grant_of[vid] = grant
        self._windows[vid] = _OfferWindow(self.r_est, self.cfg.window_n_prime)
        if self.r_est > 0:
            self._active.add(vid)
        self._join_buckets.setdefault(agent.joined_at, []).append(vid)
        if agent.role is Role.POTENTIAL_WHITEWASHER:
            self._ready.add(vid)

    def _drop_node(self, vid: int) -> None:
        graph_mod.remove_node(self.topology, vid)
        del self.agents[vid]
        self._windows.pop(vid, None)
        self._active.discard(vid)
        self._ready.discard(vid)
        self._grant_of.pop(vid, None)

    def _execute_whitewash(self, vid: int, a: AgentState, offered: float, n: int) -> int:
        t = self.topology
        kind = classify_departure(a.reputation, self.r_est, self.cfg.r_ini_min)
        if kind is DepartureKind.LEGITIMATE:
            # The leaver still looked reputable, so neighbors will book the
            # departure as benign and the rejoin slips past the estimator.
            for u in t.adj[vid]:
                self._legit_gone[u] = self._legit_gone.get(u, 0) + 1
        self._drop_node(vid)
        (new_id,) = graph_mod.grow(t, 1, self.cfg.attach_edges, self.rng, iteration=n)
        for u in t.adj[new_id]:
            self._arrivals[u] = self._arrivals.get(u, 0) + 1
        self._register_newcomer(new_id, agents_mod.rejoin_as_newcomer(a, new_id, offered, n), offered)
        return new_id

    def _whitewash_wave(self, n: int) -> tuple[int, int]:
        r_est = self.r_est
        while self._parked and self._parked[0][0] + _GRANT_MARGIN < r_est:
            _, vid = heapq.heappop(self._parked)
            if vid in self.agents:
                self._ready.add(vid)
        if not self._ready:
            return 0, 0
        pool = sorted(self.topology.adj)
        attempts = 0
        successes = 0
        for vid in sorted(self._ready):
            a = self.agents[vid]
            grant = self._grant_of.get(vid)
            if a.attempts > 0:
                if a.successes == 0:
                    # Attempt probability is zero for good: never polls again.
                    self._ready.discard(vid)
                    continue
                if grant is not None and r_est <= grant + _GRANT_MARGIN:
                    # No offer anywhere can beat the last grant; wait for
                    # the ceiling estimate to climb back above it.
                    heapq.heappush(self._parked, (grant, vid))
                    self._ready.discard(vid)
                    continue
            target = pool[int(self.rng.integers(len(pool)))]
            offered = self._offers.get(target, r_est)
            if a.attempts > 0 and grant is not None and offered <= grant + _GRANT_MARGIN:
                continue  # probed a suppressed corner; not worth a reset
            outcome = agents_mod.decide_whitewash(a, offered, self.rng)
            if outcome is WhitewashOutcome.NO_ATTEMPT:
                continue
            attempts += 1
            if outcome is WhitewashOutcome.WHITEWASHED:
                successes += 1
                self._ready.discard(vid)
                self._execute_whitewash(vid, a, offered, n)
            elif a.successes == 0:
                self._ready.discard(vid)
        return attempts, successes

    def _voluntary_departures(self) -> None:
        cfg = self.cfg
        p = cfg.legit_departure_prob
        threshold = (self.r_est + cfg.r_ini_min) / 2
        for vid in sorted(self.agents):
            a = self.agents.get(vid)
            if a is None or a.role is not Role.COOPERATIVE or a.reputation < threshold:
                continue
            if self.topology.node_count <= cfg.attach_edges + 1:
                break
            if self.rng.random() >= p:
                continue
            for u in self.topology.adj[vid]:
                self._legit_gone[u] = self._legit_gone.get(u, 0) + 1
            self._drop_node(vid)

    def _grow_population(self, n: int) -> None:
        t = self.topology
        count = round(t.node_count * self.cfg.growth_percent_per_10 / 100)
        for _ in range(count):
            targets = t.sample_attachment_targets(self.cfg.attach_edges, self.rng)
            vid = t.add_node(n)
            for u in targets:
                t.add_edge(vid, u)
                self._arrivals[u] = self._arrivals.get(u, 0) + 1
            honesty = float(self.rng.random())
            # The first host a newcomer contacts is the one that vouches
            # for it, so its offer becomes the newcomer's starting grant.
            grant = self._offers.get(targets[0], self.r_est)
            role = Role.POTENTIAL_WHITEWASHER if honesty < self.r_est else Role.COOPERATIVE
            self._register_newcomer(
                vid, AgentState(vid, honesty, role, reputation=grant, joined_at=n), grant
            )

    # ---- public API ---------------------------------------------------

    def step(self) -> IterationRecord:
        self.iteration += 1
        n = self.iteration
        self._record_transactions(n)
        mean_offer, mean_w, mean_wmax = self._estimate(n)
        attempts = successes = 0
        if self.auto_whitewash:
            attempts, successes = self._whitewash_wave(n)
        if self.cfg.legit_departure_prob > 0:
            self._voluntary_departures()
        if self.cfg.growth_percent_per_10 > 0 and n % GROWTH_PERIOD == 0:
            self._grow_population(n)
        for j in [k for k in self._join_buckets if k <= n - self.cfg.newcomer_window]:
            del self._join_buckets[j]
        n_nodes = self.topology.node_count
        return IterationRecord(
            iteration=n,
            n_nodes=n_nodes,
            whitewash_attempts=attempts,
            whitewash_successes=successes,
            whitewash_fraction=successes / n_nodes,
            mean_offered_r_ini=mean_offer,
            mean_w_estimate=mean_w,
            mean_w_max=mean_wmax,
        )

    def force_whitewash(self, vid: int) -> int:
        """Reset one agent's identity outside the decision machinery (the
        attempt counters stay untouched); used to plant ground-truth churn."""
        a = self.agents[vid]
        return self._execute_whitewash(vid, a, self.r_est, self.iteration)


def run(cfg: SimConfig) -> list[IterationRecord]:
    sim = Simulation(cfg)
    return [sim.step() for _ in range(cfg.iterations)]


def closed_world_estimator_check(cfg: SimConfig, injected: int) -> tuple[float, float]:
    """Plant a known number of whitewash rejoins in an otherwise quiet run
    and compare the population-mean estimated level against the level
    computed directly from the planted arrivals.

    Returns (estimated, true). With zero growth the two agree to float
    precision; with growth the background-arrival correction leaves a
    residual error. injected = 0 returns (0.0, 0.0).
    """
    if injected < 0:
        raise ValueError("injected must be >= 0")
    if injected == 0:
        return 0.0, 0.0
    sim = Simulation(cfg)
    sim.auto_whitewash = False
    for _ in range(GROWTH_PERIOD):
        sim.step()
    washers = [
        vid
        for vid in sorted(sim.agents)
        if sim.agents[vid].role is Role.POTENTIAL_WHITEWASHER
    ]
    if len(washers) < injected:
        raise ValueError(f"population has only {len(washers)} potential whitewashers")
    t = sim.topology
    arrivals: dict[int, int] = {}
    for vid in washers[:injected]:
        new_id = sim.force_whitewash(vid)
        # Record the hosts right away: a later planted node may attach to
        # this one, and hosting an arrival is not the same as being one.
        for u in t.adj[new_id]:
            arrivals[u] = arrivals.get(u, 0) + 1
    record = sim.step()

    contrib: dict[int, float] = {}
    for j, aj in arrivals.items():
        nbrs = t.adj.get(j)
        if nbrs is None:
            continue  # the host was washed by a later injection
        for i in nbrs:
            contrib[i] = contrib.get(i, 0.0) + aj
    total = 0.0
    for i in t.adj:
        den = t.neighbor_degree_sum(i)
        if den > 0:
            total += min(max(contrib.get(i, 0.0) / den, 0.0), 1.0)
    return record.mean_w_estimate, total / t.node_count

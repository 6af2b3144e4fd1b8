"""The VSPC network formation game: ownership, costs, equilibria, dynamics.

A player's strategy is the set of links it pays for. It may add links to any
node and drop links it owns, but never touch a link owned by someone else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from vspc.epidemic import DEFAULT_MAX_ITER, DEFAULT_TOL, EpidemicParams, SteadyStateCache
from vspc.graph import Graph, GraphError, _bits, hop_sum, random_connected_graph

INFINITE = math.inf
DEVIATION_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """Exact equilibrium check would enumerate too many deviations."""


@dataclass(frozen=True)
class OwnershipProfile:
    """``owned[i]`` is a bitmask of the nodes ``j`` such that ``i`` paid for ``{i, j}``."""

    n: int
    owned: tuple[int, ...]

    def __post_init__(self):
        if len(self.owned) != self.n:
            raise GraphError("ownership needs one mask per node")
        full = (1 << self.n) - 1
        for i, m in enumerate(self.owned):
            if m & ~full or (m >> i) & 1:
                raise GraphError(f"node {i} owns an invalid link")
            for j in _bits(m):
                if (self.owned[j] >> i) & 1:
                    raise GraphError(f"link ({i}, {j}) has two owners")

    @classmethod
    def from_owners(cls, n: int, owners: Mapping[tuple[int, int], int]) -> OwnershipProfile:
        owned = [0] * n
        for (u, v), o in owners.items():
            if o not in (u, v):
                raise GraphError(f"owner {o} is not an endpoint of ({u}, {v})")
            owned[o] |= 1 << (v if o == u else u)
        return cls(n, tuple(owned))

    @classmethod
    def by_rule(cls, g: Graph, rule: str = "lower") -> OwnershipProfile:
        """Every link owned by its lower- (or higher-) indexed endpoint."""
        if rule not in ("lower", "higher"):
            raise ValueError(f"unknown ownership rule {rule!r}")
        pick = min if rule == "lower" else max
        return cls.from_owners(g.n, {e: pick(e) for e in g.edges()})

    @classmethod
    def centered(cls, g: Graph, center: int) -> OwnershipProfile:
        """Links at ``center`` owned by it; the rest by their lower endpoint."""
        return cls.from_owners(g.n, {e: center if center in e else min(e) for e in g.edges()})

    @classmethod
    def random(cls, g: Graph, rng: np.random.Generator) -> OwnershipProfile:
        edges = g.edges()
        flips = rng.random(len(edges)) < 0.5
        return cls.from_owners(g.n, {e: e[1] if f else e[0] for e, f in zip(edges, flips)})

    def graph(self) -> Graph:
        rows = list(self.owned)
        for i, m in enumerate(self.owned):
            for j in _bits(m):
                rows[j] |= 1 << i
        return Graph._trusted(self.n, tuple(rows))

    def k(self, i: int) -> int:
        return self.owned[i].bit_count()

    def owner(self, u: int, v: int) -> int | None:
        if (self.owned[u] >> v) & 1:
            return u
        if (self.owned[v] >> u) & 1:
            return v
        return None

    def strategy(self, i: int) -> frozenset[tuple[int, int]]:
        return frozenset((min(i, j), max(i, j)) for j in _bits(self.owned[i]))

    def owner_map(self) -> dict[tuple[int, int], int]:
        return {(min(i, j), max(i, j)): i for i in range(self.n) for j in _bits(self.owned[i])}

    def consistent_with(self, g: Graph) -> bool:
        return self.n == g.n and self.graph().rows == g.rows

    def with_owned(self, i: int, mask: int) -> OwnershipProfile:
        owned = list(self.owned)
        owned[i] = mask
        return OwnershipProfile(self.n, tuple(owned))


def parse_ownership(text: str, g: Graph) -> OwnershipProfile:
    """Parse ``u v owner`` triples; every link of ``g`` must appear exactly once."""
    owners = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            u, v, o = (int(f) for f in line.split())
        except ValueError:
            raise GraphError(f"expected 'u v owner', got {line!r}", lineno) from None
        e = (min(u, v), max(u, v))
        if not (0 <= e[0] and e[1] < g.n) or not g.has_edge(*e):
            raise GraphError(f"({u}, {v}) is not a link of the graph", lineno)
        if o not in e:
            raise GraphError(f"owner {o} is not an endpoint of ({u}, {v})", lineno)
        if e in owners:
            raise GraphError(f"link ({u}, {v}) listed twice", lineno)
        owners[e] = o
    missing = set(g.edges()) - set(owners)
    if missing:
        raise GraphError(f"links without owner: {sorted(missing)}")
    return OwnershipProfile.from_owners(g.n, owners)


def format_ownership(own: OwnershipProfile) -> str:
    return "".join(f"{u} {v} {o}\n" for (u, v), o in sorted(own.owner_map().items()))


@dataclass(frozen=True)
class GameParams:
    alpha: float
    gamma: float
    tau: float
    zero_gamma: bool = False
    no_virus: bool = False
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    improvement_epsilon: float = 1e-9

    def __post_init__(self):
        if self.alpha < 0 or self.gamma < 0:
            raise ValueError("alpha and gamma must be nonnegative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def epidemic(self) -> EpidemicParams:
        return EpidemicParams(self.tau)

    @property
    def hop_weight(self) -> float:
        return 0.0 if self.zero_gamma else self.gamma


@dataclass(frozen=True)
class CostBreakdown:
    link_cost: float
    hop_cost: float
    infection: float
    total: float
    is_finite: bool


@dataclass(frozen=True)
class Deviation:
    player: int
    strategy: frozenset[tuple[int, int]]
    delta: float


@dataclass(frozen=True)
class EquilibriumReport:
    exact_ne: bool
    ad_stable: bool
    best_deviation: Deviation | None
    deviations_checked: int

    def to_dict(self) -> dict:
        dev = self.best_deviation
        return {
            "exact_ne": self.exact_ne,
            "ad_stable": self.ad_stable,
            "deviations_checked": self.deviations_checked,
            "best_deviation": None if dev is None else {
                "player": dev.player,
                "strategy": sorted(list(e) for e in dev.strategy),
                "delta": dev.delta,
            },
        }


def _gain(new: float, old: float) -> float:
    """``new - old`` with ``inf - inf`` read as no change."""
    if new == old:
        return 0.0
    return new - old


class CostModel:
    """Evaluates player and social costs for one parameter set.

    Steady states come from a (possibly shared) :class:`SteadyStateCache`;
    hop sums and exact best responses are memoised per graph.
    """

    def __init__(self, params: GameParams, cache: SteadyStateCache | None = None):
        self.params = params
        self.cache = cache if cache is not None else SteadyStateCache(params.tol, params.max_iter)
        self._hops: dict[tuple[int, ...], list[int | None]] = {}
        self._best: dict[tuple[tuple[int, ...], int], tuple[float, int]] = {}

    def infection(self, g: Graph) -> np.ndarray:
        if self.params.no_virus:
            return np.zeros(g.n)
        return self.cache.get(g, self.params.tau)

    def hop_sums(self, g: Graph) -> list[int | None]:
        sums = self._hops.get(g.rows)
        if sums is None:
            sums = [hop_sum(g, i) for i in range(g.n)]
            self._hops[g.rows] = sums
        return sums

    def cost(self, g: Graph, i: int, k: int) -> float:
        """Total ``J_i`` of node ``i`` owning ``k`` links of ``g``."""
        h = self.hop_sums(g)[i]
        if h is None:
            return INFINITE
        p = self.params
        return p.alpha * k + p.hop_weight * h + float(self.infection(g)[i])

    def breakdown(self, g: Graph, own: OwnershipProfile, i: int) -> CostBreakdown:
        p = self.params
        k = own.k(i)
        h = self.hop_sums(g)[i]
        link_cost = p.alpha * k
        if h is None:
            return CostBreakdown(link_cost, INFINITE, float("nan"), INFINITE, False)
        hop_cost = p.hop_weight * h
        v = float(self.infection(g)[i])
        return CostBreakdown(link_cost, hop_cost, v, link_cost + hop_cost + v, True)

    def social(self, g: Graph) -> float:
        sums = self.hop_sums(g)
        if any(h is None for h in sums):
            return INFINITE
        p = self.params
        return p.alpha * g.link_count + p.hop_weight * sum(sums) + float(self.infection(g).sum())

    def best_response(self, base: Graph, i: int) -> tuple[float, int]:
        """Cheapest strategy of ``i`` on top of ``base`` (links owned by others).

        Returns ``(cost, mask)``; ties go to the numerically smallest mask.
        """
        key = (base.rows, i)
        hit = self._best.get(key)
        if hit is not None:
            return hit
        cand = ((1 << base.n) - 1) & ~(1 << i) & ~base.rows[i]
        best_cost, best_mask = INFINITE, 0
        alpha = self.params.alpha
        sub = 0
        while True:
            c = self.cost(_attach(base, i, sub), i, 0) + alpha * sub.bit_count()
            if c < best_cost:
                best_cost, best_mask = c, sub
            sub = (sub - cand) & cand
            if sub == 0:
                break
        self._best[key] = (best_cost, best_mask)
        return best_cost, best_mask


def _attach(base: Graph, i: int, mask: int) -> Graph:
    if not mask:
        return base
    rows = list(base.rows)
    rows[i] |= mask
    for j in _bits(mask):
        rows[j] |= 1 << i
    return Graph._trusted(base.n, tuple(rows))


def _detach(g: Graph, i: int, mask: int) -> Graph:
    if not mask:
        return g
    rows = list(g.rows)
    rows[i] &= ~mask
    for j in _bits(mask):
        rows[j] &= ~(1 << i)
    return Graph._trusted(g.n, tuple(rows))


def _model(p: GameParams, model: CostModel | None) -> CostModel:
    if model is None:
        return CostModel(p)
    if model.params != p:
        raise ValueError("cost model was built for different parameters")
    return model


def _check(g: Graph, own: OwnershipProfile) -> None:
    if not own.consistent_with(g):
        raise GraphError("ownership profile does not match the graph")


def player_cost(g: Graph, own: OwnershipProfile, i: int, p: GameParams,
                model: CostModel | None = None) -> CostBreakdown:
    _check(g, own)
    return _model(p, model).breakdown(g, own, i)


def social_cost(g: Graph, p: GameParams, model: CostModel | None = None) -> float:
    return _model(p, model).social(g)


def candidates(g: Graph, own: OwnershipProfile, i: int) -> int:
    """Nodes ``j`` whose link to ``i`` is absent or owned by ``i``, as a mask."""
    others = g.rows[i] & ~own.owned[i]
    return ((1 << g.n) - 1) & ~(1 << i) & ~others


def deviation_space(g: Graph, own: OwnershipProfile, i: int) -> Iterator[frozenset[tuple[int, int]]]:
    _check(g, own)
    cand = candidates(g, own, i)
    sub = 0
    while True:
        yield frozenset((min(i, j), max(i, j)) for j in _bits(sub))
        sub = (sub - cand) & cand
        if sub == 0:
            break


def is_ad_stable(g: Graph, own: OwnershipProfile, p: GameParams,
                 model: CostModel | None = None) -> bool:
    """No owner gains by dropping one link and no node gains by adding one."""
    _check(g, own)
    m = _model(p, model)
    eps = p.improvement_epsilon
    for i in range(g.n):
        k = own.k(i)
        cur = m.cost(g, i, k)
        for j in _bits(own.owned[i]):
            if _gain(m.cost(g.without_edge(i, j), i, k - 1), cur) < -eps:
                return False
        free = ((1 << g.n) - 1) & ~(1 << i) & ~g.rows[i]
        for j in _bits(free):
            if _gain(m.cost(g.with_edge(i, j), i, k + 1), cur) < -eps:
                return False
    return True


def is_nash_exact(g: Graph, own: OwnershipProfile, p: GameParams,
                  model: CostModel | None = None, budget: int = DEVIATION_BUDGET) -> EquilibriumReport:
    _check(g, own)
    m = _model(p, model)
    cands = [candidates(g, own, i) for i in range(g.n)]
    total = sum(1 << c.bit_count() for c in cands)
    if total > budget:
        raise BudgetExceeded(f"{total} deviations exceed the budget of {budget}")
    best: Deviation | None = None
    for i in range(g.n):
        cur = m.cost(g, i, own.k(i))
        c, mask = m.best_response(_detach(g, i, own.owned[i]), i)
        d = _gain(c, cur)
        if d < -p.improvement_epsilon and (best is None or d < best.delta):
            links = frozenset((min(i, j), max(i, j)) for j in _bits(mask))
            best = Deviation(i, links, d)
    exact = best is None
    ad = True if exact else is_ad_stable(g, own, p, m)
    return EquilibriumReport(exact, ad, best, total)


@dataclass(frozen=True)
class Action:
    t: int
    node: int
    action: str  # "D", "A" or "N"
    counterpart: int | None
    cost_before: float
    cost_after: float

    def format(self) -> str:
        cp = "-" if self.counterpart is None else str(self.counterpart)
        return f"{self.t}, {self.node}, {self.action}, {cp}, {self.cost_before!r}, {self.cost_after!r}"


@dataclass
class DynamicsResult:
    trajectory: list[tuple[Graph, OwnershipProfile]]
    actions: list[Action]
    status: str  # "converged" or "budget"
    slots: int

    @property
    def graph(self) -> Graph:
        return self.trajectory[-1][0]

    @property
    def ownership(self) -> OwnershipProfile:
        return self.trajectory[-1][1]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def run_dynamics(n: int, p: GameParams, seed: int, p_init: float = 0.5, t_max: int = 200,
                 model: CostModel | None = None,
                 initial: tuple[Graph, OwnershipProfile] | None = None) -> DynamicsResult:
    """Best-response heuristic with single-link drop (D) and add (A) moves.

    In every slot nodes ``0..n-1`` act in order: first the owned-link drop that
    lowers their cost most (or nothing), then, on the resulting graph, the
    most profitable single-link add (or nothing). Ties go to the lowest
    counterpart. Stops after a slot of no moves, or after ``t_max`` slots.
    Without ``initial`` the start is a connected G(n, p_init) with each link
    owned by a uniformly chosen endpoint.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    m = _model(p, model)
    eps = p.improvement_epsilon
    if initial is None:
        rng = np.random.default_rng(seed)
        g = random_connected_graph(n, p_init, rng)
        own = OwnershipProfile.random(g, rng)
    else:
        g, own = initial
        _check(g, own)
    owned = list(own.owned)
    trajectory = [(g, own)]
    actions: list[Action] = []
    full = (1 << n) - 1
    for t in range(1, t_max + 1):
        moved = False
        for i in range(n):
            k = owned[i].bit_count()
            cur = m.cost(g, i, k)
            pick, pick_cost = None, cur
            for j in _bits(owned[i]):
                c = m.cost(g.without_edge(i, j), i, k - 1)
                if c < pick_cost and _gain(c, cur) < -eps:
                    pick, pick_cost = j, c
            if pick is None:
                actions.append(Action(t, i, "N", None, cur, cur))
            else:
                actions.append(Action(t, i, "D", pick, cur, pick_cost))
                g = g.without_edge(i, pick)
                owned[i] &= ~(1 << pick)
                k -= 1
                cur = pick_cost
                moved = True
            pick, pick_cost = None, cur
            for j in _bits(full & ~(1 << i) & ~g.rows[i]):
                c = m.cost(g.with_edge(i, j), i, k + 1)
                if c < pick_cost and _gain(c, cur) < -eps:
                    pick, pick_cost = j, c
            if pick is None:
                actions.append(Action(t, i, "N", None, cur, cur))
            else:
                actions.append(Action(t, i, "A", pick, cur, pick_cost))
                g = g.with_edge(i, pick)
                owned[i] |= 1 << pick
                moved = True
        trajectory.append((g, OwnershipProfile(n, tuple(owned))))
        if not moved:
            return DynamicsResult(trajectory, actions, "converged", t)
    return DynamicsResult(trajectory, actions, "budget", t_max)

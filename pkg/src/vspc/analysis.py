"""Optima, Price of Anarchy/Stability, closed forms and structural bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

from vspc import graph as gr
from vspc.game import CostModel, GameParams, OwnershipProfile, _detach, _gain, is_nash_exact
from vspc.graph import Graph

QUALITATIVE = "QUALITATIVE"
BOUNDARY_BAND = 1e-6


class GuardError(ValueError):
    """A formula was evaluated outside the parameter range where it is meaningful."""


def _space_graphs(n: int, space: str) -> Iterator[Graph]:
    if space == "trees":
        if not 2 <= n <= 10:
            raise ValueError(f"tree search supports 2 <= n <= 10, got {n}")
        return gr.enumerate_trees(n)
    if space == "all_connected":
        if not 2 <= n <= 7:
            raise ValueError(f"connected-graph search supports 2 <= n <= 7, got {n}")
        return gr.enumerate_connected_graphs(n)
    raise ValueError(f"unknown search space {space!r}")


def default_space(p: GameParams) -> str:
    # with hopcounts ignored, dropping a cycle link never raises J, so a tree is optimal
    return "trees" if p.zero_gamma else "all_connected"


@dataclass(frozen=True)
class OptimumResult:
    best_graph: Graph
    best_cost: float
    search_space: str
    graphs_examined: int

    def to_dict(self) -> dict:
        return {"J": self.best_cost, "edges": self.best_graph.edges(),
                "search_space": self.search_space, "graphs_examined": self.graphs_examined}


def optimal_social_cost(n: int, p: GameParams, space: str | None = None,
                        model: CostModel | None = None) -> OptimumResult:
    """Exhaustive argmin of the social cost; ties go to the lowest edge mask."""
    space = space or default_space(p)
    model = model or CostModel(p)
    if n == 1:
        g = gr.empty(1)
        return OptimumResult(g, model.social(g), space, 1)
    best, best_cost, best_mask, count = None, math.inf, 0, 0
    for g in _space_graphs(n, space):
        count += 1
        c = model.social(g)
        if c < best_cost - 1e-12 or (abs(c - best_cost) <= 1e-12 and g.edge_mask < best_mask):
            best, best_cost, best_mask = g, c, g.edge_mask
    return OptimumResult(best, best_cost, space, count)


@dataclass(frozen=True)
class TreeExtremes:
    argmin: Graph
    argmax: Graph
    min_cost: float
    max_cost: float
    min_ties: tuple[Graph, ...]
    max_ties: tuple[Graph, ...]
    trees_examined: int


def tree_extremes(n: int, p: GameParams, model: CostModel | None = None,
                  tie_tol: float = 1e-9) -> TreeExtremes:
    """Cheapest and costliest labelled trees, with every tree tied within ``tie_tol``."""
    if not p.zero_gamma:
        raise ValueError("tree extremes are defined for the zero-gamma game")
    if not 3 <= n <= 9:
        raise ValueError(f"tree extremes support 3 <= n <= 9, got {n}")
    model = model or CostModel(p)
    scored = [(model.social(t), t) for t in gr.enumerate_trees(n)]
    lo = min(c for c, _ in scored)
    hi = max(c for c, _ in scored)
    min_ties = tuple(t for c, t in scored if c <= lo + tie_tol)
    max_ties = tuple(t for c, t in scored if c >= hi - tie_tol)
    by_mask = lambda ts: min(ts, key=lambda t: t.edge_mask)
    return TreeExtremes(by_mask(min_ties), by_mask(max_ties), lo, hi,
                        min_ties, max_ties, len(scored))


def nash_ownerships(g: Graph, p: GameParams, model: CostModel | None = None) -> list[OwnershipProfile]:
    """Every ownership profile of ``g`` that is an exact Nash equilibrium.

    A player's verdict depends only on which of its incident links it owns,
    so verdicts are tabulated per (player, owned subset) and the ``2**L``
    profiles are searched with pruning.
    """
    model = model or CostModel(p)
    n = g.n
    eps = p.improvement_epsilon
    satisfied: list[dict[int, bool]] = []
    for i in range(n):
        table = {}
        nbrs = g.rows[i]
        sub = 0
        while True:
            cur = model.cost(g, i, sub.bit_count())
            best, _ = model.best_response(_detach(g, i, sub), i)
            table[sub] = _gain(best, cur) >= -eps
            sub = (sub - nbrs) & nbrs
            if sub == 0:
                break
        satisfied.append(table)

    edges = g.edges()
    last_edge = {}
    for idx, (u, v) in enumerate(edges):
        last_edge[u] = idx
        last_edge[v] = idx
    closing = [[] for _ in edges]
    for node, idx in last_edge.items():
        closing[idx].append(node)
    isolated = [i for i in range(n) if i not in last_edge]
    if not all(satisfied[i][0] for i in isolated):
        return []

    found = []
    owned = [0] * n

    def assign(idx: int) -> None:
        if idx == len(edges):
            found.append(OwnershipProfile(n, tuple(owned)))
            return
        u, v = edges[idx]
        for o, other in ((u, v), (v, u)):
            owned[o] |= 1 << other
            if all(satisfied[x][owned[x]] for x in closing[idx]):
                assign(idx + 1)
            owned[o] &= ~(1 << other)

    if edges:
        assign(0)
    else:
        found.append(OwnershipProfile(n, (0,) * n))
    return found


def exhaustive_equilibria(n: int, p: GameParams, graphs: Iterable[Graph] | None = None,
                          model: CostModel | None = None) -> list[tuple[Graph, OwnershipProfile]]:
    """All exact equilibria over the given graphs (default: all connected graphs)."""
    model = model or CostModel(p)
    graphs = gr.enumerate_connected_graphs(n) if graphs is None else graphs
    return [(g, own) for g in graphs for own in nash_ownerships(g, p, model)]


def trees_without_equilibrium(n: int, p: GameParams, model: CostModel | None = None) -> list[Graph]:
    """Labelled trees for which no ownership profile is an exact equilibrium."""
    model = model or CostModel(p)
    return [t for t in gr.enumerate_trees(n) if not nash_ownerships(t, p, model)]


def poa_pos(n: int, p: GameParams, equilibria: Iterable[tuple[Graph, OwnershipProfile]],
            space: str | None = None, model: CostModel | None = None,
            verify: bool = True) -> tuple[float, float]:
    """Worst and best equilibrium social cost over the exhaustive optimum."""
    model = model or CostModel(p)
    costs = []
    for g, own in equilibria:
        if verify and not is_nash_exact(g, own, p, model).exact_ne:
            raise ValueError(f"{g} with the given ownership is not an exact equilibrium")
        costs.append(model.social(g))
    if not costs:
        raise ValueError("empty equilibrium set")
    opt = optimal_social_cost(n, p, space, model).best_cost
    return max(costs) / opt, min(costs) / opt


def _ratio(a: float, b: float) -> float:
    # equal costs (including both zero when alpha = 0 below threshold) compare as 1
    if a == b:
        return 1.0
    return math.inf if b == 0 else a / b


def path_star_poa(n: int, p: GameParams, model: CostModel | None = None) -> dict:
    """Path-versus-star cost ratios, the PoA when they bracket all equilibria."""
    model = model or CostModel(p)
    j_path = model.social(gr.path(n))
    j_star = model.social(gr.star(n))
    ps, sp = _ratio(j_path, j_star), _ratio(j_star, j_path)
    return {
        "tau": p.tau, "alpha": p.alpha,
        "J_path": j_path, "J_star": j_star,
        "path_over_star": ps, "star_over_path": sp, "PoA": max(ps, sp),
    }


def path_star_poa_bound(alpha: float, tau: float) -> float:
    """``1 + 1/(2(tau(alpha+1) - 1))``, valid when ``tau(alpha+1) > 1``."""
    x = tau * (alpha + 1.0)
    if not x > 1.0:
        raise GuardError(f"bound needs tau*(alpha+1) > 1, got {x}")
    return 1.0 + 1.0 / (2.0 * (x - 1.0))


@dataclass(frozen=True)
class ClosedForms:
    J_star_approx: float
    J_complete_exact: float
    difference: float  # J(K_n) - J(K_{1,n-1}) from the factored expression


def closed_form_costs(n: int, p: GameParams) -> ClosedForms:
    """High-tau star cost and exact complete-graph cost.

    The complete graph is regular, so ``v = 1 - 1/(tau(n-1))`` holds exactly.
    The star uses ``v_i ~ 1 - 1/(tau d_i)``, which needs ``tau(n-1) > 1``.
    """
    tau, a, g = p.tau, p.alpha, p.hop_weight
    if not n >= 2 or not tau * (n - 1) > 1:
        raise GuardError(f"closed forms need n >= 2 and tau*(n-1) > 1 (n={n}, tau={tau})")
    m = n - 1
    j_star = n + a * m + 2 * g * m * m - (m * m + 1) / (tau * m)
    j_complete = n + a * n * m / 2 + g * n * m - n / (tau * m)
    diff = m * (n - 2) * (a / 2 - g + 1 / (tau * m))
    return ClosedForms(j_star, j_complete, diff)


@dataclass(frozen=True)
class RegimeClassification:
    case_id: str
    thresholds: dict
    poa_bound: float | str
    pos_bound: float | str
    boundary: bool
    diameter_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def _at(alpha: float, t: float) -> bool:
    return abs(alpha - t) <= BOUNDARY_BAND * max(1.0, abs(t))


def regime_classify(n: int, p: GameParams, gd_small: float = 0.1) -> RegimeClassification:
    """Place ``alpha`` among the high-tau regimes of the hopcount game.

    Cases 1 and 2 split into ``a``/``b`` by whether ``gamma * d`` is small,
    with ``d`` the equilibrium diameter bound and "small" meaning below
    ``gd_small``. Their PoA bounds are asymptotic and reported as
    :data:`QUALITATIVE`.
    """
    a, g, tau = p.alpha, p.gamma, p.tau
    t_star = 2 * g - 2 / (tau * (n - 1))
    t_diam = 2 * g - 1 / tau
    t_kn = g - 1 / (tau * (n - 1))
    thresholds = {"star_vs_complete": t_star, "diameter_two": t_diam, "complete_ne": t_kn}
    d = diameter_bound(n, a, g, tau)
    sub = "b" if g * d < gd_small else "a"
    boundary = any(_at(a, t) for t in thresholds.values())
    if a >= t_star or _at(a, t_star):
        case, poa, pos = "1" + sub, QUALITATIVE, 1.0
    elif a >= t_diam or _at(a, t_diam):
        case, poa, pos = "2" + sub, QUALITATIVE, QUALITATIVE
    elif a >= t_kn or _at(a, t_kn):
        case, poa, pos = "3", 4 / 3, 4 / 3
    else:
        case, poa, pos = "4", 1.0, 1.0
    return RegimeClassification(case, thresholds, poa, pos, boundary, d)


def diameter_bound(n: int, alpha: float, gamma: float, tau: float) -> float:
    if gamma == 0:
        return float(n)
    return min(math.sqrt(1 + 4 / gamma * (alpha + 1 / (2 * tau))), float(n))


def link_bound(n: int, d: int, alpha: float, gamma: float, tau: float) -> float:
    return n - 1 + 2 * d * gamma * n * n / (alpha + 1 / (2 * tau))


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    relation: str  # "<=", ">=", "<"
    rhs: float
    holds: bool
    equality: bool
    scope: str = "all"  # "nash": only claimed for equilibrium graphs

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs if self.relation.startswith("<") else self.lhs - self.rhs


@dataclass
class StructuralReport:
    checks: list[BoundCheck] = field(default_factory=list)

    def __getitem__(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {c.name: {**asdict(c), "slack": c.slack} for c in self.checks}


def _check(name, lhs, rel, rhs, scope="all", eq_tol=1e-9) -> BoundCheck:
    if rel == "<=":
        holds = lhs <= rhs + eq_tol
    elif rel == ">=":
        holds = lhs >= rhs - eq_tol
    else:
        holds = lhs < rhs
    return BoundCheck(name, lhs, rel, rhs, holds, abs(lhs - rhs) <= eq_tol, scope)


def structural_bounds(g: Graph, p: GameParams, model: CostModel | None = None) -> StructuralReport:
    """Evaluate every social-cost, degree, link-count and diameter bound on ``g``."""
    if not gr.is_connected(g) or g.n < 2:
        raise GuardError("structural bounds need a connected graph with n >= 2")
    if not p.tau > 1:
        raise GuardError(f"truncation bounds need tau > 1, got {p.tau}")
    model = model or CostModel(p)
    n, L, tau, alpha, gamma = g.n, g.link_count, p.tau, p.alpha, p.hop_weight
    deg = g.degrees
    inv = sum(1 / d for d in deg)
    hops = sum(model.hop_sums(g))
    v_sum = float(model.infection(g).sum())
    J = model.social(g)
    rep = StructuralReport()
    rep.checks.append(_check("hopcount_lower", hops, ">=", 2 * n * (n - 1) - 2 * L))
    rep.checks.append(_check("infection_truncation", v_sum, ">=", n - inv / tau))
    rep.checks.append(_check("infection_footnote", v_sum, ">=",
                             n - sum(1 / (1 + (tau - 1) * d) for d in deg)))
    rep.checks.append(_check("social_lower", J, ">=",
                             n + 2 * gamma * n * (n - 1) + (alpha - 2 * gamma) * L - inv / tau))
    dmin, dmax = min(deg), max(deg)
    rep.checks.append(_check("cioaba", inv, "<=",
                             n * n / (2 * L) + (1 / dmin - 1 / dmax) * (n - 1 - 2 * L / n)))
    rep.checks.append(_check("inverse_degree", inv, "<=",
                             n * n / (2 * L) + (n - 2) / (n * (n - 1)) * (n * (n - 1) - 2 * L)))
    rep.checks.append(_check(
        "social_lower_links", J, ">=",
        n + 2 * gamma * n * (n - 1) - (n - 2) / tau
        + (alpha - 2 * gamma + 2 * (n - 2) / (tau * n * (n - 1))) * L - n * n / (2 * tau * L)))
    d = gr.diameter(g)
    if gamma > 0:
        rep.checks.append(_check("link_count", L, "<=", link_bound(n, d, alpha, gamma, tau), "nash"))
    rep.checks.append(_check("diameter", d, "<", diameter_bound(n, alpha, gamma, tau), "nash"))
    return rep


__all__ = [
    "BoundCheck", "ClosedForms", "GuardError", "OptimumResult", "QUALITATIVE",
    "RegimeClassification", "StructuralReport", "TreeExtremes", "closed_form_costs",
    "path_star_poa", "path_star_poa_bound", "default_space", "diameter_bound",
    "exhaustive_equilibria", "link_bound", "nash_ownerships", "optimal_social_cost",
    "poa_pos", "regime_classify", "structural_bounds", "tree_extremes",
    "trees_without_equilibrium",
]

"""Undirected simple graphs stored as per-node bitmask rows.

Node ``i``'s neighbourhood is the integer ``rows[i]`` whose bit ``j`` is set
iff the link ``{i, j}`` is present. Everything here works on labelled graphs;
no isomorphism reduction is ever applied.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from vspc._kernels import power_iteration

MAX_NODES = 64

#: Hopcount between nodes in different components.
UNREACHABLE = -1


class GraphError(ValueError):
    """Invalid graph construction or malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


@dataclass(frozen=True)
class Graph:
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_NODES:
            raise GraphError(f"node count {self.n} outside [1, {MAX_NODES}]")
        if len(self.rows) != self.n:
            raise GraphError("row count does not match n")
        full = (1 << self.n) - 1
        for i, r in enumerate(self.rows):
            if r & ~full or (r >> i) & 1:
                raise GraphError(f"row {i} has out-of-range bits or a self-loop")
            for j in _bits(r):
                if not (self.rows[j] >> i) & 1:
                    raise GraphError(f"adjacency not symmetric at ({i}, {j})")

    @classmethod
    def _trusted(cls, n: int, rows: tuple[int, ...]) -> Graph:
        # skips validation; callers guarantee symmetric, loop-free rows
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "rows", rows)
        return g

    @property
    def key(self) -> tuple[int, ...]:
        return self.rows

    @cached_property
    def link_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def degree(self, i: int) -> int:
        return self.rows[i].bit_count()

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(r.bit_count() for r in self.rows)

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def neighbors(self, i: int) -> list[int]:
        return list(_bits(self.rows[i]))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in _bits(self.rows[i]) if i < j]

    @cached_property
    def edge_mask(self) -> int:
        """Bit ``k`` set iff the ``k``-th pair in lexicographic order is a link."""
        index = _pair_index(self.n)
        return sum(1 << index[e] for e in self.edges())

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges():
            a[i, j] = a[j, i] = 1.0
        a.setflags(write=False)
        return a

    def with_edge(self, u: int, v: int) -> Graph:
        rows = list(self.rows)
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        return Graph._trusted(self.n, tuple(rows))

    def without_edge(self, u: int, v: int) -> Graph:
        rows = list(self.rows)
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
        return Graph._trusted(self.n, tuple(rows))

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Graph with node ``i`` renamed to ``perm[i]``."""
        return from_edge_list(self.n, [(perm[u], perm[v]) for u, v in self.edges()])

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edges()})"


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _pair_index(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(itertools.combinations(range(n), 2))}


def from_edge_list(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    if not 1 <= n <= MAX_NODES:
        raise GraphError(f"node count {n} outside [1, {MAX_NODES}]")
    rows = [0] * n
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"node index out of range in link ({u}, {v})")
        if u == v:
            raise GraphError(f"self-loop at node {u}")
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return Graph(n, tuple(rows))


def from_edge_mask(n: int, mask: int) -> Graph:
    rows = [0] * n
    for k, (u, v) in enumerate(itertools.combinations(range(n), 2)):
        if (mask >> k) & 1:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
    return Graph(n, tuple(rows))


def parse_edge_list(text: str) -> Graph:
    """Parse ``n`` followed by one ``u v`` pair per line; ``#`` starts a comment."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            values = [int(f) for f in fields]
        except ValueError:
            raise GraphError(f"expected integers, got {line!r}", lineno) from None
        if n is None:
            if len(values) != 1:
                raise GraphError("first line must hold the node count", lineno)
            n = values[0]
            if not 1 <= n <= MAX_NODES:
                raise GraphError(f"node count {n} outside [1, {MAX_NODES}]", lineno)
            continue
        if len(values) != 2:
            raise GraphError(f"expected 'u v', got {line!r}", lineno)
        u, v = values
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise GraphError(f"invalid link ({u}, {v})", lineno)
        edges.append((u, v))
    if n is None:
        raise GraphError("empty edge list: missing node count")
    return from_edge_list(n, edges)


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def format_edge_list(g: Graph) -> str:
    return "\n".join([str(g.n)] + [f"{u} {v}" for u, v in g.edges()]) + "\n"


# Named families.

def star(n: int, center: int = 0) -> Graph:
    return from_edge_list(n, [(center, j) for j in range(n) if j != center])


def path(n: int) -> Graph:
    return from_edge_list(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    return from_edge_list(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    return from_edge_list(n, itertools.combinations(range(n), 2))


def empty(n: int) -> Graph:
    return Graph(n, (0,) * n)


def is_star(g: Graph) -> bool:
    return g.n >= 3 and is_tree(g) and max(g.degrees) == g.n - 1


def is_path(g: Graph) -> bool:
    return is_tree(g) and max(g.degrees, default=0) <= 2


def random_connected_graph(n: int, p: float, rng: np.random.Generator,
                           max_tries: int = 100_000) -> Graph:
    """G(n, p) conditioned on connectivity, by rejection."""
    pairs = list(itertools.combinations(range(n), 2))
    for _ in range(max_tries):
        keep = rng.random(len(pairs)) < p
        g = from_edge_list(n, [e for e, k in zip(pairs, keep) if k])
        if is_connected(g):
            return g
    raise RuntimeError(f"no connected G({n}, {p}) sample in {max_tries} tries")


# Distances and connectivity.

def bfs_distances(g: Graph, source: int) -> list[int]:
    dist = [UNREACHABLE] * g.n
    dist[source] = 0
    seen = 1 << source
    frontier = 1 << source
    d = 0
    while frontier:
        d += 1
        nxt = 0
        for u in _bits(frontier):
            nxt |= g.rows[u]
        nxt &= ~seen
        for v in _bits(nxt):
            dist[v] = d
        seen |= nxt
        frontier = nxt
    return dist


def hop_sum(g: Graph, source: int) -> int | None:
    """Sum of hopcounts from ``source``; ``None`` when some node is unreachable."""
    seen = frontier = 1 << source
    total = d = 0
    while frontier:
        d += 1
        nxt = 0
        for u in _bits(frontier):
            nxt |= g.rows[u]
        nxt &= ~seen
        total += d * nxt.bit_count()
        seen |= nxt
        frontier = nxt
    if seen != (1 << g.n) - 1:
        return None
    return total


def hopcounts(g: Graph) -> np.ndarray:
    """All-pairs hopcount table; :data:`UNREACHABLE` marks disconnected pairs."""
    return np.array([bfs_distances(g, s) for s in range(g.n)], dtype=np.int64)


def component_mask(g: Graph, source: int = 0) -> int:
    seen = frontier = 1 << source
    while frontier:
        nxt = 0
        for u in _bits(frontier):
            nxt |= g.rows[u]
        frontier = nxt & ~seen
        seen |= frontier
    return seen


def is_connected(g: Graph) -> bool:
    return component_mask(g) == (1 << g.n) - 1


def is_tree(g: Graph) -> bool:
    return g.link_count == g.n - 1 and is_connected(g)


def diameter(g: Graph) -> int:
    if not is_connected(g):
        return UNREACHABLE
    return max(max(bfs_distances(g, s)) for s in range(g.n))


def spectral_radius(g: Graph, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest adjacency eigenvalue by power iteration on ``A + I``.

    The identity shift keeps the dominant eigenvalue unique on bipartite
    graphs, where ``A`` alone has ``+lambda_1`` and ``-lambda_1``.
    """
    if g.link_count == 0:
        return 0.0
    lam, iters, ok = power_iteration(g.adjacency, tol, max_iter)
    if not ok:
        raise ConvergenceError("power iteration did not converge", iters)
    return lam


# Exhaustive generators.

def prufer_decode(seq: Sequence[int], n: int) -> Graph:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = degree.index(1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return from_edge_list(n, edges)


def prufer_encode(g: Graph) -> tuple[int, ...]:
    if not is_tree(g):
        raise GraphError("Prufer encoding needs a tree")
    rows = list(g.rows)
    seq = []
    for _ in range(g.n - 2):
        leaf = next(i for i in range(g.n) if rows[i].bit_count() == 1)
        parent = rows[leaf].bit_length() - 1
        seq.append(parent)
        rows[leaf] = 0
        rows[parent] &= ~(1 << leaf)
    return tuple(seq)


def enumerate_trees(n: int) -> Iterator[Graph]:
    """All ``n**(n-2)`` labelled trees, in lexicographic Prufer order."""
    if not 2 <= n <= 10:
        raise GraphError(f"tree enumeration supports 2 <= n <= 10, got {n}")
    for seq in itertools.product(range(n), repeat=n - 2):
        yield prufer_decode(seq, n)


def enumerate_connected_graphs(n: int) -> Iterator[Graph]:
    """Every labelled connected graph on ``n`` nodes, by ascending edge mask."""
    if not 2 <= n <= 7:
        raise GraphError(f"connected-graph enumeration supports 2 <= n <= 7, got {n}")
    pairs = list(itertools.combinations(range(n), 2))
    full = (1 << n) - 1
    for mask in range(1 << len(pairs)):
        if mask.bit_count() < n - 1:
            continue
        rows = [0] * n
        m = mask
        k = 0
        while m:
            if m & 1:
                u, v = pairs[k]
                rows[u] |= 1 << v
                rows[v] |= 1 << u
            m >>= 1
            k += 1
        seen = frontier = 1
        while frontier:
            nxt = 0
            for u in _bits(frontier):
                nxt |= rows[u]
            frontier = nxt & ~seen
            seen |= frontier
        if seen == full:
            yield Graph._trusted(n, tuple(rows))

"""Bipartite posets between two levels, their connected components (nodes),
surplus, characteristics and Dilworth cliques.

Adjacency is stored row-wise: ``adj[i]`` is a bitmask over the positions of
``Y`` that ``X[i]`` lies below.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

from .poset import Poset, bits


@functools.total_ordering
class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("INF")

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class Characteristics(NamedTuple):
    width: int
    surplus: object  # int or INF

    def __str__(self) -> str:
        return f"({self.width},{self.surplus})"

    def as_json(self):
        return [self.width, "inf" if self.surplus is INF else self.surplus]


def characteristics_lex_leq(a: Characteristics, b: Characteristics) -> bool:
    return tuple(a) <= tuple(b)


class BipartiteError(ValueError):
    pass


@dataclass
class BipartitePoset:
    X: list[int]
    Y: list[int]
    adj: list[int]

    @classmethod
    def from_edges(cls, X: Sequence[int], Y: Sequence[int], edges) -> "BipartitePoset":
        xi = {x: i for i, x in enumerate(X)}
        yi = {y: j for j, y in enumerate(Y)}
        adj = [0] * len(X)
        for a, b in edges:
            adj[xi[a]] |= 1 << yi[b]
        return cls(list(X), list(Y), adj)

    @classmethod
    def from_poset(cls, p: Poset, X: Sequence[int], Y: Sequence[int]) -> "BipartitePoset":
        yi = {y: j for j, y in enumerate(Y)}
        adj = []
        for x in X:
            m = 0
            for y, j in yi.items():
                if p.less(x, y):
                    m |= 1 << j
            adj.append(m)
        return cls(list(X), list(Y), adj)

    def edges(self) -> list[tuple[int, int]]:
        return [(self.X[i], self.Y[j]) for i in range(len(self.X)) for j in bits(self.adj[i])]

    def n_edges(self) -> int:
        return sum(m.bit_count() for m in self.adj)

    def is_complete(self) -> bool:
        full = (1 << len(self.Y)) - 1
        return all(m == full for m in self.adj)


def _match(adj: Sequence[int], rows: int, cols: int) -> list[int] | None:
    """Perfect matching of the rows in ``rows`` into columns in ``cols``.

    ``rows`` and ``cols`` are bitmasks restricting the graph.  Returns
    ``match_of_row`` (indexed by row, -1 outside ``rows``) or None.
    """
    if rows.bit_count() != cols.bit_count():
        return None
    n = len(adj)
    row_of = {}
    match = [-1] * n
    # greedy start
    for i in bits(rows):
        free = adj[i] & cols
        for j in bits(free):
            if j not in row_of:
                row_of[j] = i
                match[i] = j
                break
    for i in bits(rows):
        if match[i] >= 0:
            continue
        # BFS for an augmenting path
        parent: dict[int, int] = {}
        frontier = [i]
        seen_cols = 0
        end = -1
        while frontier and end < 0:
            nxt = []
            for r in frontier:
                for j in bits(adj[r] & cols & ~seen_cols):
                    seen_cols |= 1 << j
                    parent[j] = r
                    if j not in row_of:
                        end = j
                        break
                    nxt.append(row_of[j])
                if end >= 0:
                    break
            frontier = nxt
        if end < 0:
            return None
        j = end
        while True:
            r = parent[j]
            prev = match[r]
            match[r] = j
            row_of[j] = r
            if r == i:
                break
            j = prev
    return match


def perfect_matching(b: BipartitePoset) -> dict[int, int] | None:
    """Some perfect matching as ``{x: y}``, or None."""
    if len(b.X) != len(b.Y):
        return None
    m = _match(b.adj, (1 << len(b.X)) - 1, (1 << len(b.Y)) - 1)
    if m is None:
        return None
    return {b.X[i]: b.Y[j] for i, j in enumerate(m)}


def lex_first_matching(b: BipartitePoset) -> dict[int, int] | None:
    """Perfect matching choosing, row by row, the lowest feasible column."""
    n = len(b.X)
    if n != len(b.Y):
        return None
    rows = (1 << n) - 1
    cols = rows
    if _match(b.adj, rows, cols) is None:
        return None
    out = {}
    for i in range(n):
        rows &= ~(1 << i)
        for j in bits(b.adj[i] & cols):
            if _match(b.adj, rows, cols & ~(1 << j)) is not None:
                cols &= ~(1 << j)
                out[b.X[i]] = b.Y[j]
                break
    return out


def edge_extends(b: BipartitePoset, i: int, j: int) -> bool:
    n = len(b.X)
    return _match(b.adj, ((1 << n) - 1) & ~(1 << i), ((1 << n) - 1) & ~(1 << j)) is not None


def is_regular(b: BipartitePoset) -> bool:
    """Every edge lies in some perfect matching."""
    if len(b.X) != len(b.Y):
        raise BipartiteError("is_regular needs |X| == |Y|")
    return non_extendable_edge(b) is None


def non_extendable_edge(b: BipartitePoset) -> tuple[int, int] | None:
    for i in range(len(b.X)):
        for j in bits(b.adj[i]):
            if not edge_extends(b, i, j):
                return b.X[i], b.Y[j]
    return None


def _column_adj(b: BipartitePoset) -> list[int]:
    cols = [0] * len(b.Y)
    for i, m in enumerate(b.adj):
        for j in bits(m):
            cols[j] |= 1 << i
    return cols


def _connected(b: BipartitePoset) -> bool:
    if not b.X:
        return False
    cols = _column_adj(b)
    seen_r = 1
    seen_c = 0
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for j in bits(b.adj[i] & ~seen_c):
                seen_c |= 1 << j
                for r in bits(cols[j] & ~seen_r):
                    seen_r |= 1 << r
                    nxt.append(r)
        frontier = nxt
    return seen_r.bit_count() == len(b.X) and seen_c.bit_count() == len(b.Y)


BRUTE_FORCE_LIMIT = 20


def _surplus_from(adj: Sequence[int], n_rows: int, n_cols: int):
    full = (1 << n_cols) - 1
    best = INF
    # nb[s] = neighbourhood of subset s, built from s minus its lowest bit
    nb = [0] * (1 << n_rows)
    for s in range(1, 1 << n_rows):
        low = s & -s
        nb[s] = nb[s ^ low] | adj[low.bit_length() - 1]
        if nb[s] != full:
            v = nb[s].bit_count() - s.bit_count()
            if best is INF or v < best:
                best = v
    return best


def _surplus_matching(adj: Sequence[int], n_rows: int, n_cols: int):
    """Surplus via the deficiency form of Hall's theorem.

    Each A with N(A) != Y misses some column y, so A sits inside the rows not
    adjacent to y.  Forcing a row x into A, the remaining minimisation of
    |N(A')| - |A'| over possibly empty A' equals (matching size - rows).
    """
    cols_adj = [0] * n_cols
    for i, m in enumerate(adj):
        for j in bits(m):
            cols_adj[j] |= 1 << i
    all_rows = (1 << n_rows) - 1
    all_cols = (1 << n_cols) - 1
    best = INF
    for y in range(n_cols):
        S = all_rows & ~cols_adj[y]
        for x in bits(S):
            rest = S & ~(1 << x)
            free_cols = all_cols & ~adj[x]
            nu = _max_matching_size(adj, rest, free_cols)
            v = adj[x].bit_count() - 1 + nu - rest.bit_count()
            if best is INF or v < best:
                best = v
    return best


def _max_matching_size(adj: Sequence[int], rows: int, cols: int) -> int:
    row_of: dict[int, int] = {}

    def augment(r: int, seen: list[int]) -> bool:
        for j in bits(adj[r] & cols & ~seen[0]):
            seen[0] |= 1 << j
            if j not in row_of or augment(row_of[j], seen):
                row_of[j] = r
                return True
        return False

    size = 0
    for r in bits(rows):
        if augment(r, [0]):
            size += 1
    return size


@dataclass(eq=False)
class Node:
    """A connected regular component between two consecutive levels."""

    bip: BipartitePoset
    chars: Characteristics
    clique: "DilworthClique | None" = None
    lower_level: int | None = None
    upper_level: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def X(self) -> list[int]:
        return self.bip.X

    @property
    def Y(self) -> list[int]:
        return self.bip.Y

    @property
    def width(self) -> int:
        return self.chars.width

    @property
    def complete(self) -> bool:
        return self.chars.surplus is INF

    def edges(self) -> list[tuple[int, int]]:
        return self.bip.edges()

    @classmethod
    def of(cls, bip: BipartitePoset, **kw) -> "Node":
        return cls(bip, Characteristics(len(bip.X), surplus_of(bip)), **kw)


def surplus_of(bip: BipartitePoset):
    n = len(bip.X)
    if n <= BRUTE_FORCE_LIMIT:
        return _surplus_from(bip.adj, n, len(bip.Y))
    return _surplus_matching(bip.adj, n, len(bip.Y))


def surplus(n: Node | BipartitePoset):
    bip = n.bip if isinstance(n, Node) else n
    if not _connected(bip):
        raise BipartiteError("surplus expects a connected node")
    return surplus_of(bip)


def surplus_by_matching(n: Node | BipartitePoset):
    bip = n.bip if isinstance(n, Node) else n
    if not _connected(bip):
        raise BipartiteError("surplus expects a connected node")
    return _surplus_matching(bip.adj, len(bip.X), len(bip.Y))


def surplus_dual(n: Node | BipartitePoset):
    """The same quantity computed from the Y side with downsets."""
    bip = n.bip if isinstance(n, Node) else n
    if not _connected(bip):
        raise BipartiteError("surplus expects a connected node")
    cols = _column_adj(bip)
    return _surplus_from(cols, len(bip.Y), len(bip.X))


def components(b: BipartitePoset, check: bool = True) -> list[Node]:
    """Connected components as nodes, ordered by their smallest X position."""
    if len(b.X) != len(b.Y):
        raise BipartiteError("components needs |X| == |Y|")
    if check:
        bad = non_extendable_edge(b)
        if bad is not None:
            raise BipartiteError(f"edge {bad[0]}<{bad[1]} extends to no perfect matching")
    cols = _column_adj(b)
    unseen = (1 << len(b.X)) - 1
    out = []
    while unseen:
        start = (unseen & -unseen).bit_length() - 1
        rows = 1 << start
        cmask = 0
        frontier = [start]
        while frontier:
            nxt = []
            for i in frontier:
                for j in bits(b.adj[i] & ~cmask):
                    cmask |= 1 << j
                    for r in bits(cols[j] & ~rows):
                        rows |= 1 << r
                        nxt.append(r)
            frontier = nxt
        unseen &= ~rows
        ri = list(bits(rows))
        ci = list(bits(cmask))
        if len(ri) != len(ci):
            raise BipartiteError("component with |X| != |Y|")
        cpos = {j: k for k, j in enumerate(ci)}
        adj = []
        for i in ri:
            m = 0
            for j in bits(b.adj[i]):
                m |= 1 << cpos[j]
            adj.append(m)
        sub = BipartitePoset([b.X[i] for i in ri], [b.Y[j] for j in ci], adj)
        out.append(Node.of(sub))
    return out


@dataclass(frozen=True)
class DilworthClique:
    xs: tuple[int, ...]
    ys: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.xs)

    def diagonal(self) -> list[tuple[int, int]]:
        return list(zip(self.xs, self.ys))


def find_dilworth_clique(n: Node | BipartitePoset, k: int) -> DilworthClique | None:
    """Lexicographically first k x k complete block whose removal leaves a perfect matching."""
    if k < 1:
        raise BipartiteError("k must be positive")
    bip = n.bip if isinstance(n, Node) else n
    size = len(bip.X)
    if k > size:
        return None
    full = (1 << size) - 1

    def rest_matches(rows: int, cols: int) -> bool:
        return _match(bip.adj, full & ~rows, full & ~cols) is not None

    def search(start: int, depth: int, rows: int, common: int):
        if common.bit_count() < k:
            return None
        if depth == k:
            for ys in combinations(list(bits(common)), k):
                cmask = 0
                for j in ys:
                    cmask |= 1 << j
                if rest_matches(rows, cmask):
                    return rows, ys
            return None
        for i in range(start, size - (k - depth) + 1):
            got = search(i + 1, depth + 1, rows | (1 << i), common & bip.adj[i])
            if got is not None:
                return got
        return None

    got = search(0, 0, 0, full)
    if got is None:
        return None
    rows, ys = got
    return DilworthClique(tuple(bip.X[i] for i in bits(rows)), tuple(bip.Y[j] for j in ys))


def validate_clique(n: Node | BipartitePoset, c: DilworthClique) -> bool:
    bip = n.bip if isinstance(n, Node) else n
    xi = {x: i for i, x in enumerate(bip.X)}
    yi = {y: j for j, y in enumerate(bip.Y)}
    if len(set(c.xs)) != c.k or len(set(c.ys)) != c.k:
        return False
    rows = cols = 0
    for x in c.xs:
        for y in c.ys:
            if not (bip.adj[xi[x]] >> yi[y]) & 1:
                return False
        rows |= 1 << xi[x]
    for y in c.ys:
        cols |= 1 << yi[y]
    full = (1 << len(bip.X)) - 1
    return _match(bip.adj, full & ~rows, full & ~cols) is not None

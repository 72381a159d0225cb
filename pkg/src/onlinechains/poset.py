"""Append-only posets stored as transitively closed bitsets, plus offline oracles.

Element ``i`` owns two Python ints: ``up[i]`` has bit ``j`` set iff ``i < j`` and
``down[i]`` has bit ``j`` set iff ``j < i``.  Both are kept closed under
transitivity after every insertion.
"""
from __future__ import annotations

from typing import Iterable, Sequence



class PosetError(ValueError):
    pass


def bits(mask: int):
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


class Poset:
    """A strict partial order on ``0..n-1`` that only ever grows."""

    __slots__ = ("up", "down", "level_of")

    def __init__(self) -> None:
        self.up: list[int] = []
        self.down: list[int] = []
        self.level_of: list[int | None] = []

    @property
    def n(self) -> int:
        return len(self.up)

    def __len__(self) -> int:
        return len(self.up)

    def _check(self, ids: Iterable[int]) -> None:
        for i in ids:
            if not 0 <= i < len(self.up):
                raise PosetError(f"unknown element id {i}")

    def add(self, below: Iterable[int] = (), above: Iterable[int] = (), level: int | None = None) -> int:
        """Insert a new element with the given (not necessarily closed) neighbours.

        Returns the new element id.  Raises if the request would create a cycle.
        """
        below = list(below)
        above = list(above)
        self._check(below)
        self._check(above)
        down_v = 0
        for b in below:
            down_v |= self.down[b] | (1 << b)
        up_v = 0
        for a in above:
            up_v |= self.up[a] | (1 << a)
        if down_v & up_v:
            raise PosetError("insertion would create a cycle")
        v = len(self.up)
        bit = 1 << v
        for u in bits(down_v):
            self.up[u] |= bit | up_v
        for u in bits(up_v):
            self.down[u] |= bit | down_v
        self.up.append(up_v)
        self.down.append(down_v)
        self.level_of.append(level)
        return v

    def less(self, a: int, b: int) -> bool:
        return (self.up[a] >> b) & 1 == 1

    def leq(self, a: int, b: int) -> bool:
        return a == b or (self.up[a] >> b) & 1 == 1

    def comparable(self, a: int, b: int) -> bool:
        return a == b or ((self.up[a] | self.down[a]) >> b) & 1 == 1

    def comparable_mask(self, a: int) -> int:
        return self.up[a] | self.down[a] | (1 << a)

    def is_chain(self, ids: Iterable[int]) -> tuple[int, int] | None:
        """Return an incomparable pair of ``ids`` or None when they form a chain."""
        ids = list(ids)
        m = mask_of(ids)
        for a in ids:
            bad = m & ~self.comparable_mask(a)
            if bad:
                return a, next(bits(bad))
        return None

    def is_antichain(self, ids: Iterable[int]) -> bool:
        ids = list(ids)
        m = mask_of(ids)
        return all(not (self.up[a] & m) for a in ids)

    def restrict(self, ids: Sequence[int]) -> "Poset":
        """Induced subposet, re-indexed by position in ``ids``."""
        ids = list(ids)
        index = {v: k for k, v in enumerate(ids)}
        sub = Poset()
        for k, v in enumerate(ids):
            up = 0
            for j in bits(self.up[v]):
                if j in index:
                    up |= 1 << index[j]
            down = 0
            for j in bits(self.down[v]):
                if j in index:
                    down |= 1 << index[j]
            sub.up.append(up)
            sub.down.append(down)
            sub.level_of.append(self.level_of[v])
        return sub

    def pairs(self) -> int:
        return sum(m.bit_count() for m in self.up)

    @classmethod
    def from_relation(cls, n: int, less: Iterable[tuple[int, int]]) -> "Poset":
        """Build the transitive closure of an acyclic relation on ``0..n-1``."""
        succ = [0] * n
        for a, b in less:
            succ[a] |= 1 << b
        # elements presented in an order consistent with the relation
        order = _topological(n, succ)
        p = cls()
        p.up = [0] * n
        p.down = [0] * n
        p.level_of = [None] * n
        for v in reversed(order):
            up = 0
            for j in bits(succ[v]):
                up |= (1 << j) | p.up[j]
            p.up[v] = up
        for v in range(n):
            for j in bits(p.up[v]):
                p.down[j] |= 1 << v
        return p


def _topological(n: int, succ: list[int]) -> list[int]:
    indeg = [0] * n
    for a in range(n):
        for b in bits(succ[a]):
            indeg[b] += 1
    stack = [v for v in range(n) if indeg[v] == 0]
    order = []
    while stack:
        v = stack.pop()
        order.append(v)
        for b in bits(succ[v]):
            indeg[b] -= 1
            if indeg[b] == 0:
                stack.append(b)
    if len(order) != n:
        raise PosetError("relation has a cycle")
    return order


def upset(p: Poset, a: Iterable[int]) -> set[int]:
    a = list(a)
    p._check(a)
    m = 0
    for x in a:
        m |= p.up[x] | (1 << x)
    return set(bits(m))


def downset(p: Poset, a: Iterable[int]) -> set[int]:
    a = list(a)
    p._check(a)
    m = 0
    for x in a:
        m |= p.down[x] | (1 << x)
    return set(bits(m))


def antichain_below(p: Poset, a: Iterable[int], b: Iterable[int]) -> bool:
    """``A ⊑ B``: every member of A lies in the closed downset of B."""
    a, b = list(a), list(b)
    if not p.is_antichain(a) or not p.is_antichain(b):
        raise PosetError("antichain_below expects antichains")
    return set(a) <= downset(p, b)


def _matching(p: Poset) -> list[int]:
    """Maximum matching of the split graph i -> j (i < j); returns successor or -1.

    Greedy start, then Hopcroft-Karp phases; neighbourhoods are bitsets so
    each phase scans words instead of pairs.
    """
    n = p.n
    up = p.up
    nxt = [-1] * n
    pred = [-1] * n
    free_right = (1 << n) - 1
    for i in range(n):
        cand = up[i] & free_right
        if cand:
            j = (cand & -cand).bit_length() - 1
            nxt[i], pred[j] = j, i
            free_right ^= 1 << j
    while True:
        # layered BFS over left vertices
        dist = [-1] * n
        layer = [i for i in range(n) if nxt[i] < 0 and up[i]]
        for i in layer:
            dist[i] = 0
        seen_right = 0
        found = False
        d = 0
        while layer and not found:
            new = []
            for i in layer:
                for j in bits(up[i] & ~seen_right):
                    seen_right |= 1 << j
                    k = pred[j]
                    if k < 0:
                        found = True
                    elif dist[k] < 0:
                        dist[k] = d + 1
                        new.append(k)
            layer = new
            d += 1
        if not found:
            return nxt
        used = 0
        grew = False
        for root in range(n):
            if nxt[root] >= 0 or dist[root] != 0:
                continue
            # iterative DFS along the layers
            stack = [(root, up[root] & ~used)]
            trail = []
            while stack:
                i, cand = stack[-1]
                if not cand:
                    stack.pop()
                    if trail:
                        trail.pop()
                    continue
                j = (cand & -cand).bit_length() - 1
                stack[-1] = (i, cand ^ (1 << j))
                if (used >> j) & 1:
                    continue
                k = pred[j]
                if k < 0:
                    used |= 1 << j
                    trail.append(j)
                    lefts = [s[0] for s in stack]
                    for a, b in zip(lefts, trail):
                        nxt[a], pred[b] = b, a
                    grew = True
                    break
                if dist[k] == dist[i] + 1:
                    used |= 1 << j
                    trail.append(j)
                    stack.append((k, up[k] & ~used))
        if not grew:
            return nxt


def min_chain_cover(p: Poset) -> list[list[int]]:
    """Partition into exactly ``width(p)`` chains via the split-graph matching."""
    if p.n == 0:
        raise PosetError("empty poset")
    nxt = _matching(p)
    has_pred = [False] * p.n
    for j in nxt:
        if j >= 0:
            has_pred[j] = True
    chains = []
    for i in range(p.n):
        if not has_pred[i]:
            chain = [i]
            while nxt[chain[-1]] >= 0:
                chain.append(nxt[chain[-1]])
            chains.append(chain)
    return chains


def width(p: Poset, witness: bool = False):
    """Size of a maximum antichain.

    With ``witness=True`` returns ``(width, antichain, chain_cover)`` where the
    antichain is extracted from a König vertex cover of the matching.
    """
    if p.n == 0:
        raise PosetError("empty poset")
    nxt = _matching(p)
    matched = sum(1 for j in nxt if j >= 0)
    w = p.n - matched
    if not witness:
        return w
    pred = [-1] * p.n
    for i, j in enumerate(nxt):
        if j >= 0:
            pred[j] = i
    # alternating BFS from unmatched left copies
    left_seen = 0
    right_seen = 0
    frontier = [i for i in range(p.n) if nxt[i] < 0]
    for i in frontier:
        left_seen |= 1 << i
    while frontier:
        new = []
        for i in frontier:
            for j in bits(p.up[i] & ~right_seen):
                right_seen |= 1 << j
                k = pred[j]
                if k >= 0 and not (left_seen >> k) & 1:
                    left_seen |= 1 << k
                    new.append(k)
        frontier = new
    antichain = [i for i in range(p.n) if (left_seen >> i) & 1 and not (right_seen >> i) & 1]
    return w, antichain, min_chain_cover(p)


def brute_force_width(p: Poset) -> int:
    """Largest antichain by exhaustive search (exponential; tests only)."""
    if p.n == 0:
        raise PosetError("empty poset")
    best = 0

    def grow(start: int, chosen: int, size: int) -> None:
        nonlocal best
        best = max(best, size)
        for v in range(start, p.n):
            if not (p.comparable_mask(v) & chosen):
                grow(v + 1, chosen | (1 << v), size + 1)

    grow(0, 0, 0)
    return best


def longest_chain(p: Poset, mask: int) -> int:
    """Height of the subposet induced by ``mask``."""
    memo: dict[int, int] = {}
    order = sorted(bits(mask), key=lambda v: (p.down[v] & mask).bit_count())
    best = 0
    for v in order:
        h = 1 + max((memo[u] for u in bits(p.down[v] & mask)), default=0)
        memo[v] = h
        best = max(best, h)
    return best


def is_kk_free(p: Poset, k: int) -> bool:
    """True iff ``p`` has no two k-chains with every cross pair incomparable."""
    if k < 1:
        raise PosetError("k must be positive")
    full = (1 << p.n) - 1
    if 2 * k > p.n:
        return True

    def extend(top: int | None, length: int, chain_mask: int, free: int) -> bool:
        # free: elements incomparable to every chosen chain element
        if longest_chain(p, free) < k:
            return False
        if length == k:
            return True
        cand = full if top is None else p.up[top]
        for v in bits(cand):
            nfree = free & ~p.comparable_mask(v)
            if extend(v, length + 1, chain_mask | (1 << v), nfree):
                return True
        return False

    return not extend(None, 0, 0, full)


__all__ = [
    "Poset", "PosetError", "bits", "mask_of", "upset", "downset", "antichain_below",
    "width", "min_chain_cover", "brute_force_width", "is_kk_free", "longest_chain",
]

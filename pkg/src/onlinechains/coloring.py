"""Colors, bundles and the color-propagation techniques.

A color is a tuple of string segments.  An edge's *bundle* is a color prefix:
the edge carries every color that extends it.  Minting is lazy; a concrete
color only exists once some edge or vertex names it.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, isqrt
from typing import Iterable, Mapping, Sequence

from .bipartite import INF, BipartitePoset, lex_first_matching
from .poset import Poset, bits, mask_of

Color = tuple  # tuple[str, ...]


def render(c: Color) -> str:
    return "/".join(c)


def parse_color(s: str) -> Color:
    if not s:
        raise ValueError("empty color path")
    return tuple(s.split("/"))


class ColoringError(RuntimeError):
    pass


# ---------------------------------------------------------------- budgets

@dataclass(frozen=True)
class LambdaBudget:
    w: int
    lam: int
    lam1: int
    lam2: int
    lam3: int


@lru_cache(maxsize=None)
def lambda_budget(w: int) -> LambdaBudget:
    if w < 1:
        raise ValueError("w must be at least 1")
    if w == 1:
        return LambdaBudget(1, 1, 1, 1, 1)
    sub = lambda_budget(isqrt(w)).lam
    l2 = 2 * comb(w ** 3 + 1, 2) + 2
    # floor(w^(15/2)) == isqrt(w^15) exactly
    l1 = 16 * isqrt(w ** 15) * sub
    l3 = w ** 4 * l2 * sub
    return LambdaBudget(w, l1 * l2 * l3, l1, l2, l3)


def lam(w: int) -> int:
    return lambda_budget(w).lam


# ------------------------------------------------------------- techniques

def witness_edge(p: Poset, X: Sequence[int], Y: Sequence[int], z: int, t: int) -> tuple[int, int]:
    """Smallest-id source edge (x, y) with x <= z and t <= y."""
    xs = [x for x in X if p.leq(x, z)]
    ys = [y for y in Y if p.leq(t, y)]
    if not xs or not ys:
        raise ColoringError(f"no source edge dominates {z}<{t}")
    x, y = min(xs), min(ys)
    if not p.less(x, y):
        raise ColoringError(f"witness pair {x},{y} is not an edge")
    return x, y


def replace_chains_by_colors(p: Poset, X: Sequence[int], Y: Sequence[int], bundle: Mapping,
                             tag: str, chain_index: int, target: tuple[int, int]) -> Color:
    """Color of chain ``chain_index`` inside the bundle of the target's witness edge."""
    e = witness_edge(p, X, Y, *target)
    return tuple(bundle[e]) + (f"{tag}{chain_index}",)


def interior_level(p: Poset, X: Sequence[int], Y: Sequence[int], level: Sequence[int]) -> list[int]:
    """Members of ``level`` lying between X and Y."""
    lo = 0
    for x in X:
        lo |= p.up[x] | (1 << x)
    hi = 0
    for y in Y:
        hi |= p.down[y] | (1 << y)
    m = lo & hi & mask_of(level)
    return list(bits(m))


def leq_matching(p: Poset, A: Sequence[int], B: Sequence[int]) -> dict[int, int]:
    """Lexicographically first perfect matching a -> b with a <= b."""
    bip = BipartitePoset.from_edges(A, B, [(a, b) for a in A for b in B if p.leq(a, b)])
    m = lex_first_matching(bip)
    if m is None:
        raise ColoringError("projection matching does not exist")
    return m


def projection_maps(p: Poset, X: Sequence[int], Y: Sequence[int],
                    lower: Sequence[int], upper: Sequence[int]) -> tuple[dict, dict]:
    """Matchings X -> Int∩lower and Int∩upper -> Y, returned as z->x and t->y."""
    Ap = interior_level(p, X, Y, lower)
    As = interior_level(p, X, Y, upper)
    if len(Ap) != len(X) or len(As) != len(Y):
        raise ColoringError("interior level has the wrong size for projection")
    m1 = leq_matching(p, sorted(X), Ap)
    m2 = leq_matching(p, As, sorted(Y))
    return {z: x for x, z in m1.items()}, m2


def project_colors(bundle: Mapping, m1: Mapping, m2: Mapping,
                   targets: Iterable[tuple[int, int]], suffix: Sequence[str] = ()) -> dict:
    out = {}
    for z, t in targets:
        e = (m1[z], m2[t])
        if e not in bundle:
            raise ColoringError(f"projected pair {e} is not a source edge")
        out[(z, t)] = tuple(bundle[e]) + tuple(suffix)
    return out


def shuffle_colors(bundle: Mapping, X: Sequence[int], Z: Sequence[int], Y: Sequence[int]):
    """Spread the colors of a complete X-Y node onto complete X-Z and Z-Y children.

    Edge (x_i, y_j) lends its color to (x_i, z_k) and (z_k, y_j), k = (i+j) mod u.
    """
    u = len(X)
    if not (len(Y) == len(Z) == u):
        raise ColoringError("shuffle needs equal widths")
    if len(bundle) != u * u:
        raise ColoringError("shuffle needs a complete parent")
    X, Z, Y = sorted(X), sorted(Z), sorted(Y)
    lower, upper = {}, {}
    for i, x in enumerate(X):
        for j, y in enumerate(Y):
            k = (i + j) % u
            c = tuple(bundle[(x, y)])
            lower[(x, Z[k])] = c
            upper[(Z[k], y)] = c
    return lower, upper


def assign_vertex_color(incident: Iterable[Color]) -> Color:
    cs = [tuple(c) for c in incident]
    if not cs:
        raise ColoringError("vertex has no colored incident edge")
    return min(cs)


class ColorMint:
    """Turns bundle demands into concrete colors, minting only when forced.

    A bundle stands for every full color extending its path.  A minted color
    remembers the deepest bundle it has been drawn from; a new demand reuses a
    minted color whose path is prefix-comparable with the demand (narrowing it
    when the demand is deeper).  The final leaf of a minted color therefore lies
    in every bundle it served, so (*) makes each color class a chain.
    """

    def __init__(self):
        self.names: list[str] = []
        self.paths: list[Color] = []
        self._exact: dict[Color, list[int]] = {}
        self._under: dict[Color, list[int]] = {}

    def _index(self, k: int, path: Color, start: int) -> None:
        self._exact.setdefault(path, []).append(k)
        for i in range(start, len(path) + 1):
            self._under.setdefault(path[:i], []).append(k)

    def demand(self, bundle: Color) -> str:
        bundle = tuple(bundle)
        deeper = self._under.get(bundle)
        if deeper:
            # entries are only ever appended, so the first is the oldest color
            return self.names[deeper[0]]
        for i in range(len(bundle) - 1, 0, -1):
            ks = self._exact.get(bundle[:i])
            if ks:
                k = ks.pop(0)
                old = self.paths[k]
                self.paths[k] = bundle
                self._index(k, bundle, len(old) + 1)
                return self.names[k]
        k = len(self.names)
        self.names.append(render(bundle))
        self.paths.append(bundle)
        self._index(k, bundle, 1)
        return self.names[k]

    def __len__(self) -> int:
        return len(self.names)


# ----------------------------------------------------------- property (*)

class _Trie:
    __slots__ = ("children", "own", "below")

    def __init__(self):
        self.children: dict[str, _Trie] = {}
        self.own = 0
        self.below = 0


class PropertyStarChecker:
    """Incremental check that every color's carriers have chain endpoints.

    ``own`` holds endpoints of edges whose bundle is exactly this prefix and
    ``below`` the endpoints of edges whose bundle extends it (inclusive).  A new
    edge at prefix P must be comparable with ``own`` of every proper prefix and
    with ``below`` of P.  Existing comparabilities never change, so the check
    is sound when run as edges arrive.
    """

    def __init__(self, p: Poset):
        self.p = p
        self.root = _Trie()
        self.violations: list[tuple] = []

    def _bad(self, mask: int, a: int, b: int) -> int:
        p = self.p
        return (mask & ~p.comparable_mask(a)) | (mask & ~p.comparable_mask(b))

    def add(self, edge: tuple[int, int], bundle: Color) -> tuple | None:
        a, b = edge
        node = self.root
        path = [node]
        for seg in bundle:
            if self._bad(node.own, a, b):
                return self._record(edge, bundle, node.own)
            nxt = node.children.get(seg)
            if nxt is None:
                nxt = node.children[seg] = _Trie()
            node = nxt
            path.append(node)
        if self._bad(node.below, a, b):
            return self._record(edge, bundle, node.below)
        ends = (1 << a) | (1 << b)
        node.own |= ends
        for n in path:
            n.below |= ends
        return None

    def _record(self, edge, bundle, mask):
        a, b = edge
        other = next(bits(self._bad(mask, a, b)))
        v = (edge, render(bundle), other)
        self.violations.append(v)
        return v


def check_property_star(edge_colors: Mapping, vertex_colors: Mapping, p: Poset):
    """Offline check; returns None or ``(color, u, v)`` with u, v incomparable."""
    carriers: dict[Color, int] = {}
    prefixes: dict[Color, int] = {}
    for (a, b), bundle in edge_colors.items():
        bundle = tuple(bundle)
        prefixes[bundle] = prefixes.get(bundle, 0) | (1 << a) | (1 << b)
    # a color gamma is carried by every bundle that is a prefix of gamma
    for bundle in prefixes:
        m = 0
        for k in range(1, len(bundle) + 1):
            m |= prefixes.get(bundle[:k], 0)
        carriers[bundle] = m
    for x, c in vertex_colors.items():
        c = tuple(c)
        m = carriers.get(c, 0)
        for k in range(1, len(c) + 1):
            m |= prefixes.get(c[:k], 0)
        carriers[c] = m | (1 << x)
    for c, m in sorted(carriers.items()):
        pair = p.is_chain(bits(m))
        if pair is not None:
            return render(c), pair[0], pair[1]
    return None


# ------------------------------------------------------- strict accounting

def chars_index(u: int, s, w: int) -> int:
    return (u - 1) * w + ((u - 1) if s is INF else (s - 1))


@dataclass
class StrictAccounting:
    """Slot-capacity audit of bundle paths against the budget decomposition."""

    w: int
    alarms: list

    def __init__(self, w: int):
        self.w = w
        self.alarms = []

    def check(self, color: Color) -> None:
        segs = list(color)
        w = self.w
        if not segs or not segs[0].startswith("r"):
            self.alarms.append((render(color), "missing root segment"))
            return
        x, y = (int(v) for v in segs[0][1:].split("."))
        # root ids are 0..w-1 and w..2w-1
        if not (0 <= x < w and w <= y < 2 * w):
            self.alarms.append((render(color), "root edge out of range"))
        self._instance(segs[1:], w, color)

    def _cap(self, color, what, value, cap):
        if value >= cap:
            self.alarms.append((render(color), f"{what} index {value} >= capacity {cap}"))

    def _instance(self, segs: list[str], w: int, color) -> None:
        """Walk the segments that live inside one instance of width w."""
        if not segs:
            return
        head = segs[0]
        if not head.startswith("a"):
            self.alarms.append((render(color), f"expected active slot, got {head}"))
            return
        u, s, L, c = head[1:].split(".")
        u = int(u)
        s = INF if s == "inf" else int(s)
        r = isqrt(w)
        self._cap(color, "characteristics", chars_index(u, s, w), w * w)
        self._cap(color, "chain", int(L), r ** 3 * lam(r))
        self._cap(color, "edge chain", int(c), 16 * w ** 4)
        self._dependent(segs[1:], w, color, allow_problematic=True)

    def _dependent(self, segs, w, color, allow_problematic):
        if not segs:
            return
        head = segs[0]
        cap = comb(w ** 3 + 1, 2)
        rest = segs[1:]
        if head[0] in "AB" and head[1:].isdigit():
            self._cap(color, head[0], int(head[1:]), cap)
        elif head == "q":
            if not rest:
                return
            if rest[0] not in ("0", "1"):
                self.alarms.append((render(color), f"bad additional color {rest[0]}"))
                return
            rest = rest[1:]
        else:
            self.alarms.append((render(color), f"unexpected segment {head}"))
            return
        self._reserve(rest, w, color, allow_problematic)

    def _reserve(self, segs, w, color, allow_problematic):
        """The per-color reserve handed to recursive or problematic nodes."""
        if not segs:
            return
        head = segs[0]
        if head.startswith("p") and allow_problematic:
            self._cap(color, "problematic slot", int(head[1:]), w ** 4)
            self._dependent(segs[1:], w, color, allow_problematic=False)
        else:
            self._instance(segs, isqrt(w), color)


def capacity_of(w: int) -> int:
    return w * w * lam(w)

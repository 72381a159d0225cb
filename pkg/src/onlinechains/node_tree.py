"""The node tree, node classification, active-node registries and the
bookkeeping for equal-characteristics paths and problematic subtrees.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import isqrt
from typing import Callable, Iterable, Sequence

from .bipartite import Characteristics, DilworthClique, Node
from .poset import Poset, bits, width as poset_width

ACTIVE = "Active"
QMEMBER = "QMember"
RECURSIVE = "Recursive"
PROBLEMATIC = "Problematic"
PLAIN = "PlainDependent"


class TreeError(RuntimeError):
    pass


def ceil_sqrt(w: int) -> int:
    r = isqrt(w)
    return r if r * r == w else r + 1


@dataclass(eq=False)
class TreeNode:
    id: int
    node: Node
    parent: int | None
    lower_level: int
    upper_level: int
    layer: str | None = None  # "lower" or "upper" relative to the split that created it
    children: list[int] = field(default_factory=list)
    classification: str | None = None
    owner: int | None = None
    first_problematic: bool = False

    @property
    def chars(self) -> Characteristics:
        return self.node.chars

    def edges(self) -> list[tuple[int, int]]:
        return self.node.edges()


def interior_mask(p: Poset, X: Iterable[int], Y: Iterable[int]) -> int:
    lo = hi = 0
    for x in X:
        lo |= p.up[x] | (1 << x)
    for y in Y:
        hi |= p.down[y] | (1 << y)
    return lo & hi


class NodeTree:
    def __init__(self, p: Poset):
        self.p = p
        self.nodes: list[TreeNode] = []
        self.alarms: list[str] = []

    def __getitem__(self, nid: int) -> TreeNode:
        return self.nodes[nid]

    def __len__(self) -> int:
        return len(self.nodes)

    def add_root(self, node: Node, lower: int, upper: int) -> TreeNode:
        if self.nodes:
            raise TreeError("root already present")
        t = TreeNode(0, node, None, lower, upper, classification=ACTIVE)
        self.nodes.append(t)
        return t

    def ancestors(self, nid: int) -> list[int]:
        out = []
        cur = self.nodes[nid].parent
        while cur is not None:
            out.append(cur)
            cur = self.nodes[cur].parent
        return out

    def is_ancestor(self, a: int, b: int) -> bool:
        """True iff a is a proper ancestor of b."""
        cur = self.nodes[b].parent
        while cur is not None:
            if cur == a:
                return True
            cur = self.nodes[cur].parent
        return False

    def interior(self, nid: int) -> int:
        n = self.nodes[nid].node
        return interior_mask(self.p, n.X, n.Y)

    def to_json(self) -> str:
        rows = []
        for t in self.nodes:
            rows.append({"id": t.id, "parent": t.parent, "characteristics": t.chars.as_json(),
                         "classification": t.classification, "owner": t.owner})
        return json.dumps(rows, separators=(",", ":"))


def attach_nodes(tree: NodeTree, new_nodes: Sequence[tuple[Node, str, int, int]],
                 replaced: Sequence[int]) -> list[tuple[int, int]]:
    """Attach the components replacing the nodes ``replaced``.

    ``new_nodes`` holds ``(node, layer, lower_level, upper_level)``.  A lower
    child's X side and an upper child's Y side identify its parent.
    """
    owner_of: dict[int, int] = {}
    for rid in replaced:
        r = tree[rid].node
        for v in r.X:
            owner_of[("X", v)] = rid
        for v in r.Y:
            owner_of[("Y", v)] = rid
    out = []
    for node, layer, lo, hi in new_nodes:
        side, verts = (("X", node.X) if layer == "lower" else ("Y", node.Y))
        parents = {owner_of.get((side, v)) for v in verts}
        if len(parents) != 1 or None in parents:
            raise TreeError(f"new node spans several old nodes: {sorted(map(str, parents))}")
        pid = parents.pop()
        parent = tree[pid]
        nid = len(tree.nodes)
        t = TreeNode(nid, node, pid, lo, hi, layer=layer)
        if tuple(t.chars) > tuple(parent.chars):
            tree.alarms.append(f"characteristics increase from node {pid} to {nid}")
        tree.nodes.append(t)
        parent.children.append(nid)
        out.append((nid, pid))
    return out


def verify_containment(tree: NodeTree) -> list[str]:
    """Interior containment and lexicographic monotonicity for every parent link."""
    bad = []
    for t in tree.nodes:
        if t.parent is None:
            continue
        child = tree.interior(t.id)
        parent = tree.interior(t.parent)
        if child & ~parent or child == parent:
            bad.append(f"interior of {t.id} not strictly inside {t.parent}")
        if tuple(t.chars) > tuple(tree[t.parent].chars):
            bad.append(f"characteristics increase {t.parent}->{t.id}")
    return bad


def classify(tree: NodeTree, nid: int, w: int, context: str, context_chars: Characteristics,
             has_clique: Callable[[Node, int], bool]) -> str:
    """Classification of a freshly attached child.

    ``context`` is ``"Q"`` when the parent is on an equal-characteristics path of
    an active node and ``"K"`` when it is inside a problematic subtree.
    """
    t = tree[nid]
    if t.parent is None:
        return ACTIVE
    parent = tree[t.parent]
    if parent.classification is None:
        raise TreeError("parent not classified")
    chars = t.chars
    lo = isqrt(w)
    if chars == context_chars:
        return QMEMBER if context == "Q" else PROBLEMATIC
    if context == "Q" and has_clique(t.node, ceil_sqrt(w)):
        # a strictly smaller child has no equal-characteristics ancestor
        return ACTIVE
    if t.node.width <= lo:
        return RECURSIVE
    return PROBLEMATIC


# ------------------------------------------------------------ registries

def clique_below(p: Poset, lower: DilworthClique, upper: DilworthClique) -> bool:
    """Some maximal element of ``lower`` is <= some minimal element of ``upper``."""
    m = 0
    for x in upper.xs:
        m |= p.down[x] | (1 << x)
    return any((m >> y) & 1 for y in lower.ys)


def edge_le(p: Poset, e: tuple[int, int], f: tuple[int, int]) -> bool:
    return p.leq(e[1], f[0])


def edge_comparable(p: Poset, e, f) -> bool:
    return e == f or p.leq(e[1], f[0]) or p.leq(f[1], e[0])


def edge_poset(p: Poset, edges: Sequence[tuple[int, int]]) -> Poset:
    """(a<b) < (c<d) iff b <= c, on the given edge list (indexed by position)."""
    edges = list(edges)
    n = len(edges)
    by_low: dict[int, int] = {}
    for i, (a, _) in enumerate(edges):
        by_low[a] = by_low.get(a, 0) | (1 << i)
    ep = Poset()
    ep.up = [0] * n
    ep.down = [0] * n
    ep.level_of = [None] * n
    for i, (_, b) in enumerate(edges):
        reach = p.up[b] | (1 << b)
        m = 0
        for v in bits(reach):
            m |= by_low.get(v, 0)
        ep.up[i] = m
    for i in range(n):
        for j in bits(ep.up[i]):
            ep.down[j] |= 1 << i
    return ep


def is_ancestor_free(tree: NodeTree, family: Iterable[int]) -> bool:
    fam = set(family)
    return not any(a in fam for f in fam for a in tree.ancestors(f))


def edge_poset_width_check(tree: NodeTree, family: Iterable[int]) -> int:
    family = list(family)
    if not is_ancestor_free(tree, family):
        raise TreeError("family is not ancestor-free")
    edges = [e for f in family for e in tree[f].edges()]
    if not edges:
        return 0
    return poset_width(edge_poset(tree.p, edges))


class FirstFitBy:
    """Lowest chain all of whose members are comparable with the newcomer."""

    def __init__(self, comparable: Callable[[object, object], bool]):
        self.comparable = comparable
        self.chains: list[list] = []

    def accept(self, item) -> int:
        for i, ch in enumerate(self.chains):
            if all(self.comparable(item, o) for o in ch):
                ch.append(item)
                return i
        self.chains.append([item])
        return len(self.chains) - 1

    def __len__(self) -> int:
        return len(self.chains)


@dataclass
class ActiveClass:
    """Active nodes of one characteristics class with their on-line order."""

    members: list[int] = field(default_factory=list)
    order: Poset = field(default_factory=Poset)
    chains: FirstFitBy | None = None
    edge_ff: dict[int, FirstFitBy] = field(default_factory=dict)
    chain_of: dict[int, int] = field(default_factory=dict)


class ActiveRegistry:
    def __init__(self, p: Poset, w: int, partitioner_factory: Callable | None = None,
                 audit: bool = False):
        self.p = p
        self.w = w
        self.classes: dict[Characteristics, ActiveClass] = {}
        self.cliques: dict[int, DilworthClique] = {}
        self.factory = partitioner_factory
        self.audit = audit
        self.alarms: list[str] = []
        self.max_class_width = 0

    def less(self, a: int, b: int) -> bool:
        return clique_below(self.p, self.cliques[a], self.cliques[b])

    def register_active(self, nid: int, chars: Characteristics, clique: DilworthClique,
                        edges: Sequence[tuple[int, int]]) -> dict:
        if nid in self.cliques:
            raise TreeError(f"node {nid} already registered")
        self.cliques[nid] = clique
        cls = self.classes.get(chars)
        if cls is None:
            cls = ActiveClass()
            if self.factory:
                cls.chains = self.factory(self.less)
            else:
                cls.chains = FirstFitBy(lambda a, b: a == b or self.less(a, b) or self.less(b, a))
            self.classes[chars] = cls
        below = [k for k, m in enumerate(cls.members) if self.less(m, nid)]
        above = [k for k, m in enumerate(cls.members) if self.less(nid, m)]
        cls.order.add(below, above)
        cls.members.append(nid)
        L = cls.chains.accept(nid)
        cls.chain_of[nid] = L
        if self.audit:
            wd = poset_width(cls.order)
            self.max_class_width = max(self.max_class_width, wd)
            if wd > isqrt(self.w):
                self.alarms.append(f"active class {chars} has width {wd} > {isqrt(self.w)}")
        ff = cls.edge_ff.get(L)
        if ff is None:
            ff = cls.edge_ff[L] = FirstFitBy(lambda e, f: edge_comparable(self.p, e, f))
        edge_chain = {e: ff.accept(e) for e in sorted(edges)}
        bound = 16 * self.w ** 4
        if len(ff) > bound:
            self.alarms.append(f"edge chains of class {chars} chain {L}: {len(ff)} > {bound}")
        return {"chars": chars, "chain": L, "edge_chain": edge_chain,
                "below": [cls.members[k] for k in below], "above": [cls.members[k] for k in above]}

    def chain_members(self, chars: Characteristics, L: int) -> list[int]:
        cls = self.classes[chars]
        return [m for m in cls.members if cls.chain_of[m] == L]


# --------------------------------------------------- equal-characteristics paths

@dataclass
class QPath:
    """One root-to-leaf path with its above (A) and below (B) sets."""

    leaf: int
    A: list[int] = field(default_factory=list)
    B: list[int] = field(default_factory=list)
    a_part: object = None
    b_part: object = None


@dataclass
class QState:
    root: int
    mode: str  # "path" or "tree"
    members: list[int]
    paths: dict[int, QPath]  # keyed by current leaf
    finished: list[QPath] = field(default_factory=list)
    new_partitioner: Callable | None = None

    @classmethod
    def start(cls, root: int, complete: bool, new_partitioner: Callable | None = None) -> "QState":
        q = cls(root, "tree" if complete else "path", [root], {}, new_partitioner=new_partitioner)
        q.paths[root] = q._new_path(root, None, None)
        return q

    def _new_path(self, leaf, a_from, b_from) -> QPath:
        p = QPath(leaf)
        if a_from is not None:
            p.A, p.a_part = a_from.A, a_from.a_part
        elif self.new_partitioner:
            p.a_part = self.new_partitioner("A")
        if b_from is not None:
            p.B, p.b_part = b_from.B, b_from.b_part
        elif self.new_partitioner:
            p.b_part = self.new_partitioner("B")
        return p

    def path_of(self, leaf: int) -> QPath:
        return self.paths[leaf]


def update_q_state(q: QState, split: int, children: Sequence[tuple[int, str, str]]) -> dict:
    """Advance the path bookkeeping for a split of the Q node ``split``.

    ``children`` holds ``(id, layer, kind)`` with kind ``"Q"`` for equal
    characteristics, ``"RP"`` for recursive or problematic and ``"other"``.
    Returns the delta: extended members, A/B additions and terminal children.
    """
    if split not in q.paths:
        raise TreeError(f"node {split} is not a leaf of the path state")
    path = q.paths.pop(split)
    same = [c for c in children if c[2] == "Q"]
    rp = [c for c in children if c[2] == "RP"]
    delta = {"extend": [c[0] for c in same], "A": [], "B": [], "terminal": [], "paths": {}}
    if not same:
        q.finished.append(path)
        delta["terminal"] = [(c[0], c[1]) for c in rp]
        return delta
    if len(same) == 1:
        (mid, layer, _), = same
        if layer == "lower":
            add = [c[0] for c in rp if c[1] == "upper"]
            path.A.extend(add)
            delta["A"] = add
        else:
            add = [c[0] for c in rp if c[1] == "lower"]
            path.B.extend(add)
            delta["B"] = add
        stray = [c[0] for c in rp if c[1] == layer]
        if stray:
            raise TreeError(f"same-layer siblings {stray} next to an equal-characteristics child")
        path.leaf = mid
        q.paths[mid] = path
        q.members.append(mid)
        delta["paths"][mid] = path
        return delta
    if len(same) == 2 and q.mode == "tree":
        upper = [c[0] for c in same if c[1] == "upper"]
        lower = [c[0] for c in same if c[1] == "lower"]
        if len(upper) != 1 or len(lower) != 1:
            raise TreeError("double split must give one upper and one lower child")
        if rp:
            raise TreeError("double split cannot have further children")
        up_path = q._new_path(upper[0], path, None)
        low_path = q._new_path(lower[0], None, path)
        q.paths[upper[0]] = up_path
        q.paths[lower[0]] = low_path
        q.members.extend([lower[0], upper[0]])
        delta["paths"] = {upper[0]: up_path, lower[0]: low_path}
        return delta
    raise TreeError(f"{len(same)} equal-characteristics children in {q.mode} mode")


@dataclass
class ProblematicState:
    """First-problematic registry inside the subtree of a problematic node M."""

    M: int
    w: int
    next_slot: int = 0
    counts: dict = field(default_factory=dict)
    firsts: list[int] = field(default_factory=list)
    alarms: list[str] = field(default_factory=list)

    def register_problematic(self, tree: NodeTree, nid: int) -> str:
        t = tree[nid]
        chars = t.chars
        cur = t.parent
        if nid != self.M:
            # subsequent iff some problematic node with the same characteristics sits above, inside D(M)
            while cur is not None:
                a = tree[cur]
                if a.chars == chars and a.classification == PROBLEMATIC:
                    return "Subsequent"
                if cur == self.M:
                    break
                cur = a.parent
        self.counts[chars] = self.counts.get(chars, 0) + 1
        self.firsts.append(nid)
        if self.counts[chars] > self.w ** 2:
            self.alarms.append(f"{self.counts[chars]} first problematic nodes of {chars} under {self.M}")
        return "First"

    def take_slot(self) -> int:
        j = self.next_slot
        self.next_slot += 1
        return j

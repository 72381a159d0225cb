"""On-line chain partitioning of regular posets.

The engine colors node edges with bundles (color prefixes) so that every
color's carriers form a chain, then gives each new vertex the smallest bundle
among its incident edges.  Nodes are routed to one of three handlers:

* an active node starts a machine for the nodes sharing its characteristics;
* a problematic child of such a machine opens a problematic subtree whose
  first-problematic nodes run machines of their own;
* a narrow (recursive) node becomes the root of a sub-instance of width equal
  to its own width.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bipartite import INF, Node, components, find_dilworth_clique
from .coloring import (ColorMint, PropertyStarChecker, StrictAccounting, assign_vertex_color, capacity_of,
                       lam, projection_maps, project_colors, replace_chains_by_colors,
                       shuffle_colors, witness_edge)
from .node_tree import (ACTIVE, PROBLEMATIC, QMEMBER, RECURSIVE, ActiveRegistry, NodeTree,
                        ProblematicState, QState, attach_nodes, ceil_sqrt, classify, edge_comparable,
                        edge_poset, update_q_state)
from .partitioners import DownGrowing, UpGrowing, general_partitioner
from .poset import width as poset_width
from .presentation import Presentation, apply_event, normalize_event


class InvariantAlarm(RuntimeError):
    pass


def _chars_seg(chars) -> str:
    s = "inf" if chars.surplus is INF else str(chars.surplus)
    return f"{chars.width}.{s}"


@dataclass(eq=False)
class Instance:
    """One level of the width recursion, rooted at a node of width ``w``."""

    id: int
    w: int
    root: int
    root_bundle: dict
    registry: ActiveRegistry
    depth: int


@dataclass(eq=False)
class Machine:
    """Handler for one equal-characteristics path or tree.

    ``kind`` is ``"Q"`` below an active node and ``"K"`` below a first
    problematic node.  ``source_bundle`` maps the source node's edges to the
    prefix from which all colors of this machine are derived.
    """

    kind: str
    inst: Instance
    source: int
    source_bundle: dict
    chars: object
    q: QState
    pstate: ProblematicState | None = None
    owner: int = 0
    a_chains: dict = field(default_factory=dict)
    b_chains: dict = field(default_factory=dict)


class RegularPartitioner:
    def __init__(self, strict: bool = False, audit: bool = False, partitioner_factory=None):
        self.pres = Presentation()
        self.tree: NodeTree | None = None
        self.colors: dict[tuple[int, int], tuple] = {}
        self.vertex: dict[int, tuple] = {}
        self.named: dict[int, str] = {}
        self.mint = ColorMint()
        self.checker: PropertyStarChecker | None = None
        self.instances: list[Instance] = []
        self.handler: dict[int, Machine | Instance] = {}
        self.instance_of: dict[int, int] = {}
        self.layer_nodes: dict[tuple[int, int], list[int]] = {}
        self.alarms: list[str] = []
        self.strict = strict
        self.audit = audit
        self.factory = partitioner_factory or general_partitioner
        self.accounting: StrictAccounting | None = None
        self.pstates: list[ProblematicState] = []
        self.machines: list[Machine] = []
        self._proj_cache: dict = {}
        self.round_colors: list[tuple[int, str]] = []

    # ------------------------------------------------------------ helpers
    @property
    def p(self):
        return self.pres.poset

    @property
    def w(self) -> int:
        return self.pres.w

    def _set_color(self, e: tuple[int, int], bundle: tuple) -> None:
        if e in self.colors:
            raise InvariantAlarm(f"edge {e} colored twice")
        bundle = tuple(bundle)
        self.colors[e] = bundle
        v = self.checker.add(e, bundle)
        if v is not None:
            self.alarms.append(f"property (*) broken by edge {v[0]} at {v[1]} vs element {v[2]}")
        if self.accounting is not None:
            self.accounting.check(bundle)

    def _projection(self, src: int, dst: int):
        t = self.tree[dst]
        key = (src, t.lower_level, t.upper_level)
        got = self._proj_cache.get(key)
        if got is None:
            s = self.tree[src].node
            got = projection_maps(self.p, s.X, s.Y, self.pres.members[t.lower_level],
                                  self.pres.members[t.upper_level])
            self._proj_cache[key] = got
        return got

    def _project(self, src: int, bundle: dict, dst: int, suffix=()) -> dict:
        m1, m2 = self._projection(src, dst)
        return project_colors(bundle, m1, m2, self.tree[dst].edges(), suffix)

    def _has_clique(self, node: Node, k: int) -> bool:
        if node.clique is not None and node.clique.k >= k:
            return True
        c = find_dilworth_clique(node, k) if k <= node.width else None
        if c is not None:
            node.clique = c
        return c is not None

    # --------------------------------------------------------------- init
    def init(self, event: dict) -> list[tuple[int, str]]:
        event = normalize_event(event)
        if event["type"] != "init":
            raise ValueError("first event must be init")
        apply_event(self.pres, event)
        w = self.w
        self.tree = NodeTree(self.p)
        self.checker = PropertyStarChecker(self.p)
        if self.strict:
            self.accounting = StrictAccounting(w)
        bip = self.pres.layer(1, 2)
        root = self.tree.add_root(components(bip)[0], 1, 2)
        self.layer_nodes[(1, 2)] = [root.id]
        bundles = {(x, y): (f"r{x}.{y}",) for x, y in root.edges()}
        for e in sorted(bundles):
            self._set_color(e, bundles[e])
        inst = self._new_instance(w, root.id, bundles, depth=0)
        self._activate(inst, root.id, owner=root.id)
        colors = []
        for v in sorted(self.pres.members[1] + self.pres.members[2]):
            inc = [c for e, c in self.colors.items() if v in e]
            self.vertex[v] = assign_vertex_color(inc)
            self.named[v] = self.mint.demand(self.vertex[v])
            colors.append((v, self.named[v]))
        self.round_colors = colors
        return colors

    def _new_instance(self, w: int, root: int, bundles: dict, depth: int) -> Instance:
        inst = Instance(len(self.instances), w, root, dict(bundles),
                        ActiveRegistry(self.p, w, self.factory, audit=self.audit), depth)
        self.instances.append(inst)
        return inst

    def _activate(self, inst: Instance, nid: int, owner: int) -> Machine:
        t = self.tree[nid]
        node = t.node
        k = ceil_sqrt(inst.w)
        clique = find_dilworth_clique(node, k) if k <= node.width else None
        if clique is None:
            if nid != inst.root:
                raise InvariantAlarm(f"active node {nid} without clique")
            # an instance root need not carry a full clique; it is alone in its class
            while clique is None and k > 1:
                k -= 1
                clique = find_dilworth_clique(node, k)
        node.clique = clique
        rec = inst.registry.register_active(nid, t.chars, clique, t.edges())
        root = self.tree[inst.root].node
        seg_head = f"a{_chars_seg(t.chars)}.{rec['chain']}."
        active_bundle = {}
        for e, c in rec["edge_chain"].items():
            x, y = witness_edge(self.p, root.X, root.Y, *e)
            active_bundle[e] = inst.root_bundle[(x, y)] + (seg_head + str(c),)
        if nid != inst.root:
            for e in sorted(active_bundle):
                self._set_color(e, active_bundle[e])
        t.classification = ACTIVE
        t.owner = owner
        self.instance_of[nid] = inst.id
        m = self._machine("Q", inst, nid, active_bundle, t.chars, t.node.complete, owner)
        return m

    def _machine(self, kind, inst, source, bundle, chars, complete, owner, pstate=None) -> Machine:
        less = lambda e, f: e != f and self.p.leq(e[1], f[0])

        def new_partitioner(which):
            return DownGrowing(less) if which == "A" else UpGrowing(less)

        q = QState.start(source, complete, new_partitioner)
        m = Machine(kind, inst, source, bundle, chars, q, pstate=pstate, owner=owner)
        self.handler[source] = m
        self.machines.append(m)
        return m

    # ------------------------------------------------------------- insert
    def insert(self, event: dict) -> list[tuple[int, str]]:
        event = normalize_event(event)
        if event["type"] != "insert":
            raise ValueError("expected an insert event")
        rec = apply_event(self.pres, event)
        t, p, s = rec["level"], event["below"], event["above"]
        old = self.layer_nodes.pop((p, s))
        lower = components(self.pres.layer(p, t), check=False)
        upper = components(self.pres.layer(t, s), check=False)
        new = [(n, "lower", p, t) for n in lower] + [(n, "upper", t, s) for n in upper]
        links = attach_nodes(self.tree, new, old)
        self.alarms.extend(self.tree.alarms)
        self.tree.alarms.clear()
        self.layer_nodes[(p, t)] = [nid for nid, _ in links[:len(lower)]]
        self.layer_nodes[(t, s)] = [nid for nid, _ in links[len(lower):]]
        kids: dict[int, list[int]] = {}
        for nid, pid in links:
            kids.setdefault(pid, []).append(nid)
        for pid in sorted(kids):
            self._split(pid, kids[pid])
        colors = []
        for v in rec["elements"]:
            inc = []
            for nid, _ in links:
                n = self.tree[nid].node
                if v in n.X or v in n.Y:
                    inc.extend(self.colors[e] for e in n.edges() if v in e)
            self.vertex[v] = assign_vertex_color(inc)
            self.named[v] = self.mint.demand(self.vertex[v])
            colors.append((v, self.named[v]))
        for nid, _ in links:
            for e in self.tree[nid].edges():
                if e not in self.colors:
                    raise InvariantAlarm(f"edge {e} of node {nid} left uncolored")
        self.round_colors = colors
        return colors

    def _split(self, pid: int, kids: list[int]) -> None:
        h = self.handler[pid]
        self._machine_split(h, pid, kids)

    def _machine_split(self, m: Machine, pid: int, kids: list[int]) -> None:
        tree = self.tree
        inst = m.inst
        tags = []
        roles = {}
        for c in kids:
            tc = tree[c]
            tc.first_problematic = False
            self.instance_of[c] = inst.id
            role = classify(tree, c, inst.w, m.kind, m.chars, self._has_clique)
            if m.kind == "K" and role == ACTIVE:
                self.alarms.append(f"node {c} inside a problematic subtree has a clique")
                role = PROBLEMATIC
            same = tc.chars == m.chars
            roles[c] = role
            if same:
                tags.append((c, tc.layer, "Q"))
            elif role == RECURSIVE or (role == PROBLEMATIC and m.kind == "Q"):
                tags.append((c, tc.layer, "RP"))
            else:
                tags.append((c, tc.layer, "other"))
        delta = update_q_state(m.q, pid, tags)
        if pid == m.source:
            qb = {e: m.source_bundle[e] + ("q",) for e in tree[pid].edges()}
        else:
            qb = {e: self.colors[e] for e in tree[pid].edges()}

        same = delta["extend"]
        if same and delta["terminal"]:
            raise InvariantAlarm(f"Q node {pid} both extends and ends in one round")
        if len(same) == 1:
            mid = same[0]
            for e, col in sorted(self._project(pid, qb, mid).items()):
                self._set_color(e, col)
            self._join(m, mid, roles[mid])
            path = delta["paths"][mid]
            for which, fed in (("A", delta["A"]), ("B", delta["B"])):
                part = path.a_part if which == "A" else path.b_part
                for f in fed:
                    self._feed(m, which, part, f)
        elif len(same) == 2:
            lo = next(c for c in same if tree[c].layer == "lower")
            hi = next(c for c in same if tree[c].layer == "upper")
            P = tree[pid].node
            Z = tree[lo].node.Y
            low, up = shuffle_colors(qb, P.X, Z, P.Y)
            for e in sorted(low):
                self._set_color(e, low[e])
            for e in sorted(up):
                self._set_color(e, up[e])
            self._join(m, lo, roles[lo])
            self._join(m, hi, roles[hi])
        else:
            for c, layer in delta["terminal"]:
                suffix = ("0",) if layer == "upper" else ("1",)
                for e, col in sorted(self._project(pid, qb, c, suffix).items()):
                    self._set_color(e, col)

        rp = {t[0] for t in tags if t[2] == "RP"}
        for c in kids:
            if c in same:
                continue
            role = roles[c]
            if role == ACTIVE:
                self._activate(inst, c, owner=c if inst.id == 0 else m.owner)
            elif c in rp:
                self._finish_dependent(m, c, role)
            else:
                # inside a problematic subtree: a new first problematic node
                self._open_first_problematic(m, c)

    def _join(self, m: Machine, c: int, role: str) -> None:
        t = self.tree[c]
        t.classification = QMEMBER if m.kind == "Q" else PROBLEMATIC
        t.owner = m.owner
        self.handler[c] = m
        if m.kind == "K":
            kind = m.pstate.register_problematic(self.tree, c)
            if kind != "Subsequent":
                self.alarms.append(f"equal-characteristics node {c} registered as {kind}")

    def _feed(self, m: Machine, which: str, part, f: int) -> None:
        src = self.tree[m.source].node
        book = m.a_chains if which == "A" else m.b_chains
        for e in sorted(self.tree[f].edges()):
            c = part.accept(e)
            if self.audit:
                others = book.setdefault(c, [])
                if not all(edge_comparable(self.p, e, o) for o in others):
                    self.alarms.append(f"{which}-chain {c} of machine {m.source} is not an edge chain")
                others.append(e)
            col = replace_chains_by_colors(self.p, src.X, src.Y, m.source_bundle, which, c, e)
            self._set_color(e, col)
        self.alarms.extend(part.alarms)
        part.alarms.clear()

    def _finish_dependent(self, m: Machine, c: int, role: str) -> None:
        t = self.tree[c]
        t.owner = m.owner
        if role == RECURSIVE:
            t.classification = RECURSIVE
            bundles = {e: self.colors[e] for e in t.edges()}
            sub = self._new_instance(t.node.width, c, bundles, m.inst.depth + 1)
            machine = self._activate(sub, c, owner=m.owner)
            t.classification = RECURSIVE
            machine.owner = m.owner
            return
        # problematic child of an active node's machine
        t.classification = PROBLEMATIC
        ps = ProblematicState(c, m.inst.w)
        self.pstates.append(ps)
        ps.register_problematic(self.tree, c)
        t.first_problematic = True
        j = ps.take_slot()
        bundle = {e: self.colors[e] + (f"p{j}",) for e in t.edges()}
        self._machine("K", m.inst, c, bundle, t.chars, False, m.owner, pstate=ps)

    def _open_first_problematic(self, m: Machine, c: int) -> None:
        t = self.tree[c]
        ps = m.pstate
        t.classification = PROBLEMATIC
        t.owner = m.owner
        kind = ps.register_problematic(self.tree, c)
        if kind != "First":
            self.alarms.append(f"node {c} expected to be first problematic")
        t.first_problematic = True
        j = ps.take_slot()
        src = {e: self.colors[e] for e in self.tree[ps.M].edges()}
        bundle = self._project(ps.M, src, c, (f"p{j}",))
        for e in sorted(bundle):
            self._set_color(e, bundle[e])
        self._machine("K", m.inst, c, bundle, t.chars, False, m.owner, pstate=ps)

    # ----------------------------------------------------------- finalize
    def all_alarms(self) -> list[str]:
        out = list(self.alarms)
        for inst in self.instances:
            out.extend(inst.registry.alarms)
        for ps in self.pstates:
            out.extend(ps.alarms)
        if self.accounting is not None:
            out.extend(f"capacity: {c} {why}" for c, why in self.accounting.alarms)
        return out

    def edge_chain_widths(self):
        """Width of every active-class chain's edge poset (oracle computation)."""
        out = []
        for inst in self.instances:
            for chars, cls in inst.registry.classes.items():
                for L in cls.edge_ff:
                    edges = [e for nid in cls.members if cls.chain_of[nid] == L
                             for e in self.tree[nid].edges()]
                    out.append((inst.id, chars, L, poset_width(edge_poset(self.p, edges)), len(cls.edge_ff[L])))
        return out

    def stats(self, edge_widths: bool = True) -> dict:
        widths = self.edge_chain_widths() if edge_widths else []
        alarms = self.all_alarms()
        return {
            "rounds": self.pres.rounds,
            "elements": self.p.n,
            "colors_used": len(self.mint),
            "lambda_bound": str(capacity_of(self.w)),
            "max_edge_poset_width_seen": max((wd for *_, wd, _ in widths), default=0),
            "recursion_depth": max((i.depth for i in self.instances), default=0),
            "invariant_alarms": len(alarms),
        }


def init(w: int, event: dict, strict: bool = False, audit: bool = False) -> RegularPartitioner:
    state = RegularPartitioner(strict=strict, audit=audit)
    event = normalize_event(event)
    if event.get("w") != w:
        raise ValueError("width does not match the init event")
    state.init(event)
    return state


def insert(state: RegularPartitioner, event: dict) -> list[tuple[int, str]]:
    return state.insert(event)


def finalize(state: RegularPartitioner) -> dict:
    return state.stats()


__all__ = ["RegularPartitioner", "init", "insert", "finalize", "InvariantAlarm", "lam"]

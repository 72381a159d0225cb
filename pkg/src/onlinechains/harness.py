"""Generators, games, oracles and transcript tooling around the partitioners."""
from __future__ import annotations

import json
import random
from math import isqrt
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .bipartite import _match, characteristics_lex_leq
from .coloring import capacity_of, lam, parse_color
from .node_tree import NodeTree, edge_poset, is_ancestor_free, verify_containment
from .partitioners import FirstFit, UpGrowing
from .poset import Poset, bits, width as poset_width
from .presentation import (EventFormatError, Presentation, apply_event, dump_event, init_event,
                           normalize_event, validate_event)
from .regular import RegularPartitioner


# -------------------------------------------------------------- generator

@dataclass
class GeneratorConfig:
    w: int
    rounds: int
    seed: int = 0
    scheme: str = "rejection"
    permutations: tuple[int, int] = (1, 3)
    retries: int = 20


def _random_matching(allowed: Sequence[int], n: int, rng: random.Random) -> list[int] | None:
    """Random perfect matching of rows into columns within row masks ``allowed``."""
    rows = list(range(n))
    cols = list(range(n))
    rng.shuffle(rows)
    rng.shuffle(cols)
    # relabel columns so the deterministic matcher's lowest-bit preference is randomised
    col_pos = {c: k for k, c in enumerate(cols)}
    adj = []
    for r in rows:
        m = 0
        for c in bits(allowed[r]):
            m |= 1 << col_pos[c]
        adj.append(m)
    full = (1 << n) - 1
    match = _match(adj, full, full)
    if match is None:
        return None
    out = [0] * n
    for k, r in enumerate(rows):
        out[r] = cols[match[k]]
    return out


def _random_union(allowed: Sequence[int], n: int, k: int, rng) -> list[int] | None:
    """Union of k random perfect matchings inside ``allowed`` as row masks."""
    out = [0] * n
    for _ in range(k):
        m = _random_matching(allowed, n, rng)
        if m is None:
            return None
        for r, c in enumerate(m):
            out[r] |= 1 << c
    return out


def _split_layer(B: list[int], w: int, cfg: GeneratorConfig, rng: random.Random):
    """Row masks (B1, B2) with B1: A_p -> A_t, B2: A_t -> A_s and B2∘B1 ⊆ B."""
    full = [(1 << w) - 1] * w
    lo, hi = cfg.permutations
    if cfg.scheme == "rejection":
        for _ in range(cfg.retries):
            k1, k2 = rng.randint(lo, hi), rng.randint(lo, hi)
            if rng.random() < 0.5:
                B1 = _random_union(full, w, k1, rng)
                # x may go below b iff every a below x is below b
                allowed = []
                for x in range(w):
                    m = (1 << w) - 1
                    for a in range(w):
                        if (B1[a] >> x) & 1:
                            m &= B[a]
                    allowed.append(m)
                B2 = _random_union(allowed, w, k2, rng)
                if B2 is not None:
                    return B1, B2
            else:
                B2 = _random_union(full, w, k2, rng)
                # a may go below x iff a is below everything above x
                allowed_cols = []
                for x in range(w):
                    m = (1 << w) - 1
                    for a in range(w):
                        if B2[x] & ~B[a]:
                            m &= ~(1 << a)
                    allowed_cols.append(m)
                # transpose: rows are a, columns are x
                allowed = [0] * w
                for x in range(w):
                    for a in bits(allowed_cols[x]):
                        allowed[a] |= 1 << x
                B1 = _random_union(allowed, w, k1, rng)
                if B1 is not None:
                    return B1, B2
    tau = list(range(w))
    rng.shuffle(tau)
    return factor_layer(B, tau, matching_below=rng.random() < 0.5)


def factor_layer(B: Sequence[int], tau: Sequence[int], matching_below: bool = True):
    """Split B through a matching tau: one side is the matching, the other carries B."""
    w = len(B)
    if matching_below:
        B1 = [1 << tau[a] for a in range(w)]
        B2 = [0] * w
        for a in range(w):
            B2[tau[a]] = B[a]
        return B1, B2
    B2 = [1 << tau[x] for x in range(w)]
    B1 = [0] * w
    for a in range(w):
        for x in range(w):
            if (B[a] >> tau[x]) & 1:
                B1[a] |= 1 << x
    return B1, B2


def generate_regular_presentation(cfg: GeneratorConfig, start: Sequence[dict] | None = None) -> list[dict]:
    """Seeded random regular presentation; ``start`` is an optional event prefix to extend."""
    if cfg.w < 1 or cfg.rounds < 0:
        raise ValueError("need w >= 1 and rounds >= 0")
    rng = random.Random(cfg.seed)
    state = Presentation()
    events = [normalize_event(e) for e in start] if start else [init_event(cfg.w)]
    if events[0].get("w") != cfg.w:
        raise ValueError("start events have a different width")
    for e in events:
        apply_event(state, e)
    w = cfg.w
    for _ in range(cfg.rounds):
        p, s = rng.choice(state.layers())
        lo, hi = state.members[p], state.members[s]
        B = [0] * w
        for i, a in enumerate(lo):
            for j, b in enumerate(hi):
                if state.poset.less(a, b):
                    B[i] |= 1 << j
        B1, B2 = _split_layer(B, w, cfg, rng)
        n = state.poset.n
        new = list(range(n, n + w))
        down = [[lo[i], new[x]] for i in range(w) for x in bits(B1[i])]
        up = [[new[x], hi[j]] for x in range(w) for j in bits(B2[x])]
        e = {"type": "insert", "below": p, "above": s, "members": new, "down": down, "up": up}
        apply_event(state, e, validate=False)
        events.append(normalize_event(e))
    return events


def stacked_presentation(w: int, height: int, seed: int = 0, extra: int = 1,
                         clique: bool = True) -> list[dict]:
    """Presentation that stacks ``height`` equal, clique-bearing nodes under a complete layer.

    Each round splits the topmost layer (A_top, A2) into a pattern node below a
    complete node.  The pattern is a cycle plus a complete ceil(sqrt w) block plus
    ``extra`` random permutations, so it stays regular and connected while the
    equal-characteristics nodes line up into long chains of active nodes.
    Without the block the cycles tend to come out problematic instead.
    """
    from .node_tree import ceil_sqrt

    if w < 1 or height < 0:
        raise ValueError("need w >= 1 and height >= 0")
    rng = random.Random(seed)
    r = ceil_sqrt(w)
    state = Presentation()
    events = [init_event(w)]
    apply_event(state, events[0], validate=False)
    top = 1
    for _ in range(height):
        rows = [(1 << i) | (1 << ((i + 1) % w)) for i in range(w)]
        for i in range(r if clique else 0):
            rows[i] |= (1 << r) - 1
        for _ in range(extra):
            perm = rng.sample(range(w), w)
            for i in range(w):
                rows[i] |= 1 << perm[i]
        lo, hi = state.members[top], state.members[2]
        n = state.poset.n
        new = list(range(n, n + w))
        tau = rng.sample(range(w), w)
        down = [[lo[i], new[tau[j]]] for i in range(w) for j in bits(rows[i])]
        up = [[x, b] for x in new for b in hi]
        e = normalize_event({"type": "insert", "below": top, "above": 2, "members": new,
                             "down": down, "up": up})
        top = apply_event(state, e)["level"]
        events.append(e)
    return events


# ------------------------------------------------------------- run + I/O

def run_events(events: Sequence[dict], strict: bool = False, audit: bool = False,
               on_round: Callable | None = None) -> tuple[RegularPartitioner, list[str]]:
    """Feed events to the main partitioner; returns the state and transcript lines."""
    events = list(events)
    if not events:
        raise EventFormatError("empty event stream")
    alg = RegularPartitioner(strict=strict, audit=audit)
    lines = []
    for t, e in enumerate(events, 1):
        e = normalize_event(e)
        colors = alg.init(e) if t == 1 else alg.insert(e)
        lines.append(json.dumps({"round": t, "event": json.loads(dump_event(e)),
                                 "colors": [[v, c] for v, c in colors]},
                                sort_keys=True, separators=(",", ":")))
        if on_round is not None:
            on_round(alg)
    stats = alg.stats()
    lines.append(json.dumps({"stats": stats}, sort_keys=True, separators=(",", ":")))
    return alg, lines


def read_transcript(path: str) -> tuple[list[dict], list[list], dict | None]:
    events, colors, stats = [], [], None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EventFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise EventFormatError(f"line {lineno}: expected an object")
            if "stats" in rec:
                stats = rec["stats"]
                continue
            try:
                events.append(normalize_event(rec["event"]))
                colors.append([(int(v), str(c)) for v, c in rec["colors"]])
            except (KeyError, TypeError, ValueError, EventFormatError) as exc:
                raise EventFormatError(f"line {lineno}: malformed round record ({exc})") from exc
    if not events:
        raise EventFormatError("transcript has no rounds")
    return events, colors, stats


@dataclass
class Report:
    ok: bool
    problems: list[str]
    width: int
    colors_used: int
    bound: int

    def as_dict(self) -> dict:
        return {"ok": self.ok, "problems": self.problems, "width": self.width,
                "colors_used": self.colors_used, "bound": str(self.bound)}


def verify_transcript(events: Sequence[dict], colors: Sequence[Sequence], stats: dict | None = None) -> Report:
    """Replay the events and check every declared chain after every round."""
    state = Presentation()
    problems: list[str] = []
    chains: dict[str, int] = {}
    seen = set()
    for t, (e, cs) in enumerate(zip(events, colors), 1):
        bad = validate_event(state, e)
        if bad:
            problems.append(f"round {t}: illegal event: {bad[0]}")
            break
        rec = apply_event(state, e, validate=False)
        fresh = set(rec["elements"])
        named = {v for v, _ in cs}
        if named != fresh:
            problems.append(f"round {t}: colors given for {sorted(named)} but new elements are {sorted(fresh)}")
        for v, c in cs:
            parse_color(c)
            if v in seen:
                problems.append(f"round {t}: element {v} colored twice")
            seen.add(v)
            m = chains.get(c, 0)
            bad_mask = m & ~state.poset.comparable_mask(v)
            if bad_mask:
                u = next(bits(bad_mask))
                problems.append(f"round {t}: chain {c} holds incomparable {u} and {v}")
            chains[c] = m | (1 << v)
    if len(colors) != len(events):
        problems.append("event and color record counts differ")
    wd = poset_width(state.poset) if state.poset.n else 0
    if state.started and wd != state.w:
        problems.append(f"final width {wd} differs from w={state.w}")
    bound = capacity_of(state.w) if state.started else 0
    if len(chains) > bound:
        problems.append(f"{len(chains)} chains exceed w^2*lambda(w)")
    if stats is not None:
        if stats.get("colors_used") != len(chains):
            problems.append("stats colors_used disagrees with the transcript")
        if stats.get("invariant_alarms"):
            problems.append(f"run reported {stats['invariant_alarms']} invariant alarms")
    return Report(not problems, problems, wd, len(chains), bound)


# --------------------------------------------------------------- adversary

@dataclass
class GameResult:
    chains_used: int
    elements: int
    poset: Poset
    assignment: list[int]
    certified_width: int
    log: list[str]

    def as_dict(self) -> dict:
        return {"chains_used": self.chains_used, "elements": self.elements,
                "assignment": self.assignment, "width": self.certified_width, "log": self.log}


class GameAlgorithm:
    """An on-line algorithm playing the general element-by-element game."""

    def __init__(self, p: Poset):
        self.p = p

    def accept(self, v: int) -> int:
        raise NotImplementedError


class FirstFitPlayer(GameAlgorithm):
    def __init__(self, p: Poset):
        super().__init__(p)
        self.ff = FirstFit(p.less)

    def accept(self, v: int) -> int:
        return self.ff.accept(v)


def adversary_fig1(make_algorithm: Callable[[Poset], GameAlgorithm]) -> GameResult:
    """Force three chains on a width-2 order.

    Two incomparable elements, then one above both; if it joins the chain of
    one of them, a final element above only that one cannot share any chain.
    """
    p = Poset()
    alg = make_algorithm(p)
    chain_members: dict[int, list[int]] = {}
    assignment = []
    log = []

    def present(below):
        v = p.add(below=below)
        c = alg.accept(v)
        if not isinstance(c, int) or c < 0:
            raise ContractError(f"invalid chain {c!r} for element {v}")
        for o in chain_members.get(c, []):
            if not p.comparable(o, v):
                raise ContractError(f"chain {c} would hold incomparable {o} and {v}")
        chain_members.setdefault(c, []).append(v)
        assignment.append(c)
        log.append(f"x{v} below-of {list(below)} -> chain {c}")
        return v, c

    p1, c1 = present([])
    p2, c2 = present([])
    x, cx = present([p1, p2])
    if cx in (c1, c2):
        pc = p1 if cx == c1 else p2
        present([pc])
    wd = poset_width(p)
    return GameResult(len(chain_members), p.n, p, assignment, wd, log)


class ContractError(ValueError):
    pass


def adversary_regular(strict: bool = False) -> tuple[RegularPartitioner, list[dict], int]:
    """Width-2 regular analogue of the three-chain game against the main partitioner.

    The adversary watches the colors and splits a layer so that the new
    level's elements must open a third chain when the first two rounds did not
    already force one.
    """
    events = [init_event(2)]
    alg = RegularPartitioner(strict=strict)
    alg.init(events[0])
    state = alg.pres
    if len(alg.mint) < 3:
        # a matching layer between the two initial levels; the members sit above
        # one minimal element each, so they cannot join the chains of A2 by both
        n = state.poset.n
        e = {"type": "insert", "below": 1, "above": 2, "members": [n, n + 1],
             "down": [[0, n], [1, n + 1]], "up": [[n, 2], [n, 3], [n + 1, 2], [n + 1, 3]]}
        events.append(e)
        alg.insert(e)
    return alg, events, len(alg.mint)


# ------------------------------------------------------------ prop4 oracle

def prop4_chain_cover(tree: NodeTree, family: Iterable[int], matchings: dict[int, dict] | None = None,
                      leaves: Iterable[int] | None = None) -> list[list[int]]:
    """Chain cover of the family's vertices built from one matching per node.

    The family is completed by every leaf lying under no family member; the
    union of the fixed matchings then links each element to one successor,
    giving exactly w paths that are restricted to the family's vertices.
    """
    from .bipartite import lex_first_matching

    family = list(family)
    if not is_ancestor_free(tree, family):
        raise ValueError("family is not ancestor-free")
    if leaves is None:
        leaves = [t.id for t in tree.nodes if not t.children]
    covered = set()
    for f in family:
        stack = [f]
        while stack:
            n = stack.pop()
            covered.add(n)
            stack.extend(tree[n].children)
    extended = family + [l for l in leaves if l not in covered]
    matchings = dict(matchings or {})
    succ: dict[int, int] = {}
    for nid in extended:
        if nid not in matchings:
            matchings[nid] = lex_first_matching(tree[nid].node.bip)
        for a, b in matchings[nid].items():
            if a in succ and succ[a] != b:
                raise ValueError(f"element {a} gets two successors")
            succ[a] = b
    has_pred = set(succ.values())
    verts = set()
    for nid in family:
        verts.update(tree[nid].node.X)
        verts.update(tree[nid].node.Y)
    starts = sorted({v for v in succ} - has_pred)
    out = []
    for s in starts:
        path = [s]
        while path[-1] in succ:
            path.append(succ[path[-1]])
        out.append([v for v in path if v in verts])
    return out


# ---------------------------------------------------------------- audits

def tree_law_violations(tree: NodeTree) -> list[str]:
    """Monotone characteristics, interior containment and a well-formed owner map."""
    out = list(verify_containment(tree))
    for t in tree.nodes:
        if t.parent is not None and not characteristics_lex_leq(t.chars, tree[t.parent].chars):
            out.append(f"node {t.id} {tuple(t.chars)} exceeds its parent {t.parent}")
        if t.parent is not None and t.id not in tree[t.parent].children:
            out.append(f"node {t.id} is missing from the children of {t.parent}")
        if t.owner is None:
            out.append(f"node {t.id} has no owner")
        elif tree[t.owner].classification != "Active":
            out.append(f"node {t.id} is owned by non-active node {t.owner}")
        elif t.owner != t.id and not tree.is_ancestor(t.owner, t.id):
            out.append(f"owner {t.owner} of node {t.id} is not above it")
    seen = [0] * len(tree.nodes)
    for t in tree.nodes:
        for c in t.children:
            seen[c] += 1
    out.extend(f"node {i} has {k} parents" for i, k in enumerate(seen) if k > 1)
    return out


def budget_report(alg: RegularPartitioner) -> dict:
    """Colors minted against the budget, beside every sub-partitioner's own bound."""
    overruns = []
    for m in alg.machines:
        for path in list(m.q.paths.values()) + list(m.q.finished):
            for part in (path.a_part, path.b_part):
                inner = getattr(part, "inner", part)
                if inner is None or not inner.items:
                    continue
                wd = poset_width(edge_poset(alg.p, inner.items))
                if len(inner.chains) > UpGrowing.declared_bound(wd):
                    overruns.append(f"machine {m.source}: {len(inner.chains)} chains on width {wd}")
    for inst in alg.instances:
        r = isqrt(inst.w)
        for chars, cls in inst.registry.classes.items():
            if len(cls.chains) > r ** 3 * lam(r):
                overruns.append(f"instance {inst.id} class {tuple(chars)}: {len(cls.chains)} chains")
    cap = capacity_of(alg.w)
    held = not overruns
    used = len(alg.mint)
    accounting = [] if alg.accounting is None else [f"{c} {why}" for c, why in alg.accounting.alarms]
    return {"colors_minted": used, "capacity": cap, "within_capacity": used <= cap,
            "sub_bounds_held": held, "partitioner_overruns": overruns,
            "accounting_alarms": accounting, "ok": (not held) or used <= cap}


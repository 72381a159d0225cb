"""Round-based presentation of regular posets.

Level ids: the initial minimum level is ``1``, the maximum is ``2`` and the
level inserted in round ``t`` gets id ``t``.  Element ids are dense and must
arrive in order: the initial levels use ``0..2w-1`` and each insertion uses the
next ``w`` ids.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .bipartite import BipartitePoset, non_extendable_edge, perfect_matching
from .poset import Poset, bits, mask_of


@dataclass
class Violation:
    condition: int
    message: str
    witness: Any = None

    def __str__(self) -> str:
        return f"condition ({self.condition}): {self.message}" + (
            f" [witness {self.witness}]" if self.witness is not None else ""
        )


class PresentationError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class EventFormatError(ValueError):
    pass


@dataclass
class Presentation:
    """Ground-truth state: the poset, the level order and the level members."""

    w: int = 0
    poset: Poset = field(default_factory=Poset)
    order: list[int] = field(default_factory=list)
    members: dict[int, list[int]] = field(default_factory=dict)
    rounds: int = 0

    @property
    def started(self) -> bool:
        return bool(self.order)

    def next_level_id(self) -> int:
        return self.rounds + 1

    def consecutive(self, p: int, s: int) -> bool:
        try:
            i = self.order.index(p)
        except ValueError:
            return False
        return i + 1 < len(self.order) and self.order[i + 1] == s

    def layer(self, p: int, s: int) -> BipartitePoset:
        return BipartitePoset.from_poset(self.poset, self.members[p], self.members[s])

    def layers(self) -> list[tuple[int, int]]:
        return list(zip(self.order, self.order[1:]))


def _pairs(raw, what: str) -> list[tuple[int, int]]:
    try:
        return [(int(a), int(b)) for a, b in raw]
    except (TypeError, ValueError) as exc:
        raise EventFormatError(f"{what} must be a list of [a, b] pairs") from exc


def normalize_event(e: dict) -> dict:
    """Type-check an event dict and coerce its fields."""
    if not isinstance(e, dict) or "type" not in e:
        raise EventFormatError("event must be an object with a 'type'")
    kind = e["type"]
    try:
        if kind == "init":
            out = {"type": "init", "w": int(e["w"]), "a1": [int(v) for v in e["a1"]],
                   "a2": [int(v) for v in e["a2"]]}
            if "edges" in e:
                out["edges"] = _pairs(e["edges"], "edges")
            return out
        if kind == "insert":
            return {"type": "insert", "below": int(e["below"]), "above": int(e["above"]),
                    "members": [int(v) for v in e["members"]],
                    "down": _pairs(e["down"], "down"), "up": _pairs(e["up"], "up")}
    except KeyError as exc:
        raise EventFormatError(f"{kind} event missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise EventFormatError(f"malformed {kind} event: {exc}") from exc
    raise EventFormatError(f"unknown event type {kind!r}")


def validate_event(state: Presentation, e: dict) -> list[Violation]:
    """All violated presentation conditions, each with a witness; empty means legal."""
    e = normalize_event(e)
    if e["type"] == "init":
        return _validate_init(state, e)
    return _validate_insert(state, e)


def _validate_init(state: Presentation, e: dict) -> list[Violation]:
    out = []
    w, a1, a2 = e["w"], e["a1"], e["a2"]
    if state.started:
        out.append(Violation(2, "init after the presentation started"))
        return out
    if w < 1:
        out.append(Violation(1, "width must be positive", w))
        return out
    if len(a1) != w or len(a2) != w:
        out.append(Violation(1, "initial levels must have w members", (len(a1), len(a2))))
    if sorted(a1 + a2) != list(range(2 * w)) or len(set(a1 + a2)) != 2 * w:
        out.append(Violation(1, "initial element ids must be 0..2w-1", sorted(a1 + a2)))
    if "edges" in e:
        have = set(e["edges"])
        for a, b in e["edges"]:
            if a not in a1 or b not in a2:
                out.append(Violation(3, "initial edge outside A1 x A2", (a, b)))
        for a in a1:
            for b in a2:
                if (a, b) not in have:
                    out.append(Violation(3, "initial levels not complete; missing pair", (a, b)))
                    return out
    return out


def _validate_insert(state: Presentation, e: dict) -> list[Violation]:
    out: list[Violation] = []
    if not state.started:
        return [Violation(2, "insert before init")]
    w, p, s, new = state.w, e["below"], e["above"], e["members"]
    if not state.consecutive(p, s):
        return [Violation(2, "levels are not consecutive", (p, s))]
    n = state.poset.n
    if len(new) != w:
        out.append(Violation(1, "inserted level must have w members", len(new)))
    if new != list(range(n, n + len(new))):
        out.append(Violation(1, "members must be the next dense ids in order", new))
    if out:
        return out
    lo, hi = state.members[p], state.members[s]
    lo_set, hi_set, new_set = set(lo), set(hi), set(new)
    for a, x in e["down"]:
        if a not in lo_set or x not in new_set:
            out.append(Violation(4, "down edge outside A_p x A_t", (a, x)))
    for x, b in e["up"]:
        if x not in new_set or b not in hi_set:
            out.append(Violation(4, "up edge outside A_t x A_s", (x, b)))
    if out:
        return out
    down = BipartitePoset.from_edges(lo, new, e["down"])
    up = BipartitePoset.from_edges(new, hi, e["up"])
    for name, bip in (("down", down), ("up", up)):
        if perfect_matching(bip) is None:
            out.append(Violation(4, f"{name} layer has no perfect matching"))
            continue
        bad = non_extendable_edge(bip)
        if bad is not None:
            out.append(Violation(4, f"{name} edge extends to no perfect matching", bad))
    poset = state.poset
    below_of = {x: 0 for x in new}
    for a, x in e["down"]:
        below_of[x] |= 1 << a
    for x, b in e["up"]:
        for a in bits(below_of[x]):
            if not poset.less(a, b):
                out.append(Violation(4, "composition a<x<b with a, b incomparable", (a, x, b)))
                return out
    return out


def apply_event(state: Presentation, e: dict, validate: bool = True) -> dict:
    """Apply a legal event; returns a record with the new elements and level id."""
    e = normalize_event(e)
    if validate:
        bad = validate_event(state, e)
        if bad:
            raise PresentationError(bad)
    if e["type"] == "init":
        w = e["w"]
        state.w = w
        a1, a2 = sorted(e["a1"]), sorted(e["a2"])
        for _ in range(2 * w):
            state.poset.add(level=None)
        # ids are dense 0..2w-1 regardless of how a1/a2 interleave
        for a in a1:
            state.poset.level_of[a] = 1
        for b in a2:
            state.poset.level_of[b] = 2
        up_mask = mask_of(a2)
        down_mask = mask_of(a1)
        for a in a1:
            state.poset.up[a] = up_mask
        for b in a2:
            state.poset.down[b] = down_mask
        state.order = [1, 2]
        state.members = {1: a1, 2: a2}
        state.rounds = 2
        return {"level": None, "elements": a1 + a2, "relations": w * w}
    t = state.rounds + 1
    p = e["below"]
    below = {x: [] for x in e["members"]}
    above = {x: [] for x in e["members"]}
    for a, x in e["down"]:
        below[x].append(a)
    for x, b in e["up"]:
        above[x].append(b)
    before = state.poset.pairs()
    for x in e["members"]:
        v = state.poset.add(below[x], above[x], level=t)
        assert v == x
    i = state.order.index(p)
    state.order.insert(i + 1, t)
    state.members[t] = list(e["members"])
    state.rounds = t
    return {"level": t, "elements": list(e["members"]), "relations": state.poset.pairs() - before}


def replay(events: Iterable[dict]) -> Presentation:
    state = Presentation()
    for e in events:
        apply_event(state, e)
    return state


def init_event(w: int) -> dict:
    return {"type": "init", "w": w, "a1": list(range(w)), "a2": list(range(w, 2 * w))}


def read_events(path: str) -> list[dict]:
    """Parse a JSONL event file; errors name the offending line."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(normalize_event(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise EventFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            except EventFormatError as exc:
                raise EventFormatError(f"line {lineno}: {exc}") from exc
    return out


def dump_event(e: dict) -> str:
    e = normalize_event(e)
    if e["type"] == "insert":
        e = dict(e, down=[list(x) for x in e["down"]], up=[list(x) for x in e["up"]])
    elif "edges" in e:
        e = dict(e, edges=[list(x) for x in e["edges"]])
    return json.dumps(e, separators=(",", ":"))


def write_events(path: str, events: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(dump_event(e) + "\n")

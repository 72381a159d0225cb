import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from cases import random_poset
from onlinechains.harness import GeneratorConfig, generate_regular_presentation
from onlinechains.partitioners import (DownGrowing, FirstFit, OnlinePartitioner, UpGrowing,
                                       first_fit_bound, general_partitioner)
from onlinechains.poset import Poset, is_kk_free, width
from onlinechains.regular import RegularPartitioner


def _valid(p: Poset, chains) -> bool:
    return all(p.is_chain(ch) is None for ch in chains)


def _up_growing_orders(n_max: int, w: int = 2):
    """Every up-growing order of width <= 2 with n_max elements, as down-set masks.

    The newcomer sits above a down-closed set D, and what it is incomparable
    with (the complement of D) must be a chain.
    """
    def rec(down):
        n = len(down)
        if n == n_max:
            yield list(down)
            return
        for m in range(1 << n):
            if any(m >> v & 1 and down[v] & ~m for v in range(n)):
                continue
            rest = [v for v in range(n) if not m >> v & 1]
            if any(not (down[a] >> b & 1 or down[b] >> a & 1)
                   for i, a in enumerate(rest) for b in rest[i + 1:]):
                continue
            yield from rec(down + [m])
    yield from rec([])


# -------------------------------------------------------------- first fit

def test_first_fit_reuses_the_lowest_chain():
    # a < c, b incomparable with both
    p = Poset.from_relation(3, [(0, 2)])
    ff = FirstFit(p.less)
    assert [ff.accept(v) for v in range(3)] == [0, 1, 0]


def test_first_fit_on_a_chain_uses_one_chain():
    p = Poset.from_relation(5, [(a, b) for a in range(5) for b in range(a + 1, 5)])
    ff = FirstFit(p.less)
    order = [3, 0, 4, 1, 2]
    assert {ff.accept(v) for v in order} == {0}


def test_first_fit_bound_on_kk_free_orders():
    rng = random.Random(17)
    seen = 0
    for _ in range(400):
        n = rng.randint(4, 14)
        p = random_poset(rng, n, rng.choice([0.3, 0.5, 0.7]))
        k = 2
        if not is_kk_free(p, k):
            continue
        ff = FirstFit(p.less)
        for v in rng.sample(range(n), n):
            ff.accept(v)
        assert _valid(p, ff.chains)
        assert len(ff) <= first_fit_bound(k, width(p))
        seen += 1
    assert seen > 50


def test_base_class_is_abstract():
    with pytest.raises(NotImplementedError):
        OnlinePartitioner(lambda a, b: False).accept(0)


def test_general_partitioner_is_first_fit():
    assert isinstance(general_partitioner(lambda a, b: False), FirstFit)


# ------------------------------------------------------------- up-growing

def test_up_growing_declared_bound():
    assert [UpGrowing.declared_bound(w) for w in (1, 2, 3)] == [1, 3, 6]
    assert DownGrowing.declared_bound(4) == comb(5, 2)


def test_up_growing_on_two_minimal_then_a_top():
    p = Poset.from_relation(3, [(0, 2), (1, 2)])
    ug = UpGrowing(p.less)
    assert [ug.accept(v) for v in range(3)] == [0, 1, 0]
    assert ug.alarms == []


def test_up_growing_flags_a_non_maximal_newcomer():
    p = Poset.from_relation(2, [(1, 0)])
    ug = UpGrowing(p.less)
    ug.accept(0)
    ug.accept(1)
    assert ug.alarms


def test_up_growing_width_two_game_tree_is_within_three_chains():
    worst = 0
    count = 0
    for down in _up_growing_orders(8):
        ug = UpGrowing(lambda a, b: down[b] >> a & 1 == 1)
        for v in range(len(down)):
            ug.accept(v)
        p = Poset.from_relation(len(down), [(a, b) for b in range(len(down)) for a in range(b)
                                            if down[b] >> a & 1])
        assert _valid(p, ug.chains)
        worst = max(worst, len(ug))
        count += 1
    assert count == 14127
    assert worst == UpGrowing.declared_bound(2) == 3


def test_down_growing_mirrors_up_growing():
    rng = random.Random(6)
    for _ in range(100):
        n = rng.randint(1, 10)
        p = random_poset(rng, n, 0.4)
        # present by decreasing topological position so each newcomer is minimal
        order = sorted(range(n), key=lambda v: -bin(p.down[v]).count("1"))
        dg = DownGrowing(p.less)
        ug = UpGrowing(lambda a, b: p.less(b, a))
        assert [dg.accept(v) for v in order] == [ug.accept(v) for v in order]
        assert _valid(p, dg.chains) and dg.alarms == []


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1), st.floats(0.0, 1.0))
def test_up_growing_chains_are_chains(n, seed, density):
    p = random_poset(random.Random(seed), n, density)
    order = sorted(range(n), key=lambda v: bin(p.down[v]).count("1"))
    ug = UpGrowing(p.less)
    for v in order:
        ug.accept(v)
    assert _valid(p, ug.chains) and ug.alarms == []
    assert sorted(v for ch in ug.chains for v in ch) == list(range(n))


# ------------------------------------------------- swapping the partitioner

class LastFit(OnlinePartitioner):
    """Highest chain that still fits; a deliberately different valid choice."""

    def accept(self, item) -> int:
        for i in range(len(self.chains) - 1, -1, -1):
            if all(self.comparable(item, o) for o in self.chains[i]):
                return self._place(item, i)
        return self._place(item, len(self.chains))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_engine_stays_correct_with_another_general_partitioner(seed):
    events = generate_regular_presentation(GeneratorConfig(w=5, rounds=60, seed=seed))
    outs = []
    for factory in (FirstFit, LastFit):
        alg = RegularPartitioner(audit=True, partitioner_factory=factory)
        alg.init(events[0])
        for e in events[1:]:
            alg.insert(e)
        assert alg.all_alarms() == []
        by_color = {}
        for v, c in alg.named.items():
            by_color.setdefault(c, []).append(v)
        assert _valid(alg.p, by_color.values())
        outs.append(alg.stats()["invariant_alarms"])
    assert outs == [0, 0]

from decimal import Decimal, getcontext
from math import comb, isqrt

import pytest

from onlinechains.coloring import (ColorMint, ColoringError, PropertyStarChecker, StrictAccounting, assign_vertex_color,
                                   capacity_of, check_property_star, lambda_budget, parse_color,
                                   project_colors, projection_maps, render, replace_chains_by_colors,
                                   shuffle_colors, witness_edge)
from onlinechains.poset import Poset
from onlinechains.presentation import Presentation, apply_event, init_event


def _k(n):
    """Complete n x n order: rows 0..n-1 below n..2n-1."""
    return Poset.from_relation(2 * n, [(a, n + b) for a in range(n) for b in range(n)])


# ------------------------------------------------------------------ budget

def test_lambda_base_case():
    b = lambda_budget(1)
    assert (b.lam, b.lam1, b.lam2, b.lam3) == (1, 1, 1, 1)


def test_lambda_at_two():
    b = lambda_budget(2)
    assert b.lam2 == 74 == 2 * comb(9, 2) + 2
    assert b.lam1 == 2896 and b.lam3 == 1184
    assert b.lam == 2896 * 74 * 1184


def test_floor_of_half_integer_power_by_decimal():
    getcontext().prec = 80
    for w in range(1, 65):
        assert isqrt(w ** 15) == int(Decimal(w) ** Decimal("7.5"))


def test_lambda_rejects_nonpositive():
    with pytest.raises(ValueError):
        lambda_budget(0)


def test_capacity_is_square_times_lambda():
    assert capacity_of(2) == 4 * lambda_budget(2).lam


# ---------------------------------------------------------- chains->colors

def test_witness_is_the_aligned_edge():
    p = _k(2)
    bundle = {(a, b): (f"r{a}.{b}",) for a in (0, 1) for b in (2, 3)}
    assert witness_edge(p, [0, 1], [2, 3], 1, 3) == (1, 3)
    c = replace_chains_by_colors(p, [0, 1], [2, 3], bundle, "A", 0, (1, 3))
    assert c == ("r1.3", "A0")
    assert replace_chains_by_colors(p, [0, 1], [2, 3], bundle, "A", 0, (1, 3)) == c


def test_witness_needs_a_dominating_edge():
    p = _k(2)
    with pytest.raises(ColoringError):
        witness_edge(p, [0], [2], 1, 3)


def test_witness_for_an_interior_edge():
    st = Presentation()
    apply_event(st, init_event(2))
    apply_event(st, {"type": "insert", "below": 1, "above": 2, "members": [4, 5],
                     "down": [[0, 4], [1, 5]], "up": [[4, 2], [4, 3], [5, 2], [5, 3]]})
    # edge 5<3 lies inside the root; the smallest dominating root edge is 1<3
    assert witness_edge(st.poset, [0, 1], [2, 3], 5, 3) == (1, 3)


# -------------------------------------------------------------- projection

def _projected_setup():
    st = Presentation()
    apply_event(st, init_event(3))
    apply_event(st, {"type": "insert", "below": 1, "above": 2, "members": [6, 7, 8],
                     "down": [[i, 6 + i] for i in range(3)],
                     "up": [[x, b] for x in (6, 7, 8) for b in (3, 4, 5)]})
    return st


def test_identity_projection():
    st = _projected_setup()
    m1, m2 = projection_maps(st.poset, [0, 1, 2], [3, 4, 5], st.members[3], st.members[2])
    assert m1 == {6: 0, 7: 1, 8: 2} and m2 == {3: 3, 4: 4, 5: 5}
    bundle = {(a, b): (f"r{a}.{b}",) for a in range(3) for b in range(3, 6)}
    out = project_colors(bundle, m1, m2, [(6 + i, 3 + j) for i in range(3) for j in range(3)])
    assert all(out[(6 + i, 3 + j)] == (f"r{i}.{3 + j}",) for i in range(3) for j in range(3))


def test_projection_suffix_and_missing_source_edge():
    bundle = {(0, 2): ("r0.2",)}
    out = project_colors(bundle, {5: 0}, {2: 2}, [(5, 2)], ("p0",))
    assert out == {(5, 2): ("r0.2", "p0")}
    with pytest.raises(ColoringError):
        project_colors(bundle, {5: 1}, {2: 2}, [(5, 2)])


def test_projection_along_a_path_keeps_chains():
    # w=1: every split is a single edge and the single color flows unchanged
    st = Presentation()
    apply_event(st, init_event(1))
    bundle = {(0, 1): ("r0.1",)}
    checker = PropertyStarChecker(st.poset)
    checker.add((0, 1), bundle[(0, 1)])
    lower, upper = 1, 2
    for t in range(3):
        n = st.poset.n
        rec = apply_event(st, {"type": "insert", "below": lower, "above": upper, "members": [n],
                               "down": [[st.members[lower][0], n]], "up": [[n, st.members[upper][0]]]})
        m1, m2 = projection_maps(st.poset, [0], [1], st.members[rec["level"]], st.members[upper])
        out = project_colors(bundle, m1, m2, [(n, st.members[upper][0])])
        assert list(out.values()) == [("r0.1",)]
        assert checker.add((n, st.members[upper][0]), out[(n, st.members[upper][0])]) is None
        lower = rec["level"]


# ---------------------------------------------------------------- shuffle

def test_shuffle_single_edge_formula():
    X, Z, Y = [0, 1, 2], [3, 4, 5], [6, 7, 8]
    bundle = {(x, y): (f"c{x}{y}",) for x in X for y in Y}
    low, up = shuffle_colors(bundle, X, Z, Y)
    # edge (x0, y2) lands on z2
    assert low[(0, 5)] == up[(5, 8)] == bundle[(0, 8)]
    # (x1, y2) wraps around to z0
    assert low[(1, 3)] == up[(3, 8)] == bundle[(1, 8)]


def test_shuffle_of_width_one():
    low, up = shuffle_colors({(0, 2): ("r0.2",)}, [0], [1], [2])
    assert low == {(0, 1): ("r0.2",)} and up == {(1, 2): ("r0.2",)}


@pytest.mark.parametrize("u", [3, 4])
def test_shuffle_sends_parent_edges_bijectively(u):
    X, Z, Y = list(range(u)), list(range(u, 2 * u)), list(range(2 * u, 3 * u))
    hits_low, hits_up = {}, {}
    for i, x in enumerate(X):
        for j, y in enumerate(Y):
            k = (i + j) % u
            hits_low.setdefault((x, Z[k]), set()).add((x, y))
            hits_up.setdefault((Z[k], y), set()).add((x, y))
    assert all(len(v) == 1 for v in hits_low.values()) and len(hits_low) == u * u
    assert all(len(v) == 1 for v in hits_up.values()) and len(hits_up) == u * u
    # the chain x_i < z_k < y_j exists in the complete three-level order
    p = Poset.from_relation(3 * u, [(x, z) for x in X for z in Z] + [(z, y) for z in Z for y in Y])
    bundle = {(x, y): (f"{x}.{y}",) for x in X for y in Y}
    low, up = shuffle_colors(bundle, X, Z, Y)
    for (x, z), c in low.items():
        (y,) = [y for (zz, y), cc in up.items() if cc == c and zz == z]
        assert p.less(x, z) and p.less(z, y)


def test_shuffle_needs_complete_parent():
    with pytest.raises(ColoringError):
        shuffle_colors({(0, 2): ("a",)}, [0, 1], [4, 5], [2, 3])


# ---------------------------------------------------------- vertex colors

def test_vertex_gets_minimal_incident_color():
    assert assign_vertex_color([("r1.3",), ("r0.3", "a"), ("r0.3",)]) == ("r0.3",)
    with pytest.raises(ColoringError):
        assign_vertex_color([])


def test_render_round_trip():
    c = ("r0.3", "a2.inf.0.1", "q", "0")
    assert parse_color(render(c)) == c
    with pytest.raises(ValueError):
        parse_color("")


# ------------------------------------------------------------ property (*)

def test_fresh_init_satisfies_property_star():
    p = _k(2)
    edges = {(a, b): (f"r{a}.{b}",) for a in (0, 1) for b in (2, 3)}
    verts = {v: min(c for e, c in edges.items() if v in e) for v in range(4)}
    assert check_property_star(edges, verts, p) is None


def test_shared_color_on_incomparable_edges_is_reported():
    p = Poset.from_relation(4, [(0, 1), (2, 3)])
    edges = {(0, 1): ("g",), (2, 3): ("g",)}
    bad = check_property_star(edges, {}, p)
    assert bad is not None and bad[0] == "g"
    checker = PropertyStarChecker(p)
    assert checker.add((0, 1), ("g",)) is None
    assert checker.add((2, 3), ("g",)) is not None


def test_prefix_edges_carry_extension_colors():
    # an edge with bundle ("g",) carries ("g", "x"), so they must be comparable
    p = Poset.from_relation(4, [(0, 1), (2, 3)])
    assert check_property_star({(0, 1): ("g",), (2, 3): ("g", "x")}, {}, p) is not None
    # incomparable siblings below a common prefix are fine
    assert check_property_star({(0, 1): ("g", "y"), (2, 3): ("g", "x")}, {}, p) is None
    checker = PropertyStarChecker(p)
    checker.add((0, 1), ("g", "y"))
    assert checker.add((2, 3), ("g", "x")) is None
    assert checker.add((2, 3), ("g",)) is not None


# ------------------------------------------------------------ accounting

def test_strict_accounting_accepts_small_slots_and_flags_overflow():
    acc = StrictAccounting(2)
    acc.check(("r0.2", "a2.inf.0.1", "q", "0"))
    acc.check(("r1.3", "a2.inf.0.0", "B3"))
    assert acc.alarms == []
    # at w=2, the edge-chain slot holds fewer than 16 * 2**4 = 256 values
    acc.check(("r0.2", "a2.inf.0.256"))
    acc.check(("r0.9",))
    assert len(acc.alarms) == 2


# ---------------------------------------------------------------- minting

def test_mint_narrows_a_prefix_color():
    m = ColorMint()
    assert m.demand(("r0.1",)) == "r0.1"
    assert m.demand(("r0.1", "a1.inf.0.0", "q")) == "r0.1"
    assert m.paths[0] == ("r0.1", "a1.inf.0.0", "q")
    # a shorter demand reuses the color whose leaf it already contains
    assert m.demand(("r0.1", "a1.inf.0.0")) == "r0.1"
    assert len(m) == 1


def test_mint_splits_diverging_extensions():
    m = ColorMint()
    m.demand(("g",))
    assert m.demand(("g", "x")) == "g"
    # the only g-color now lives below g/x, so g/y needs a fresh one
    assert m.demand(("g", "y")) == "g/y"
    assert m.demand(("g",)) == "g"
    assert m.demand(("h", "x")) == "h/x"
    assert len(m) == 3


def test_mint_leaves_lie_in_every_served_bundle():
    import random
    rng = random.Random(5)
    m = ColorMint()
    served = {}
    for _ in range(400):
        b = tuple(rng.choice("ab") for _ in range(rng.randint(1, 5)))
        served.setdefault(m.demand(b), []).append(b)
    for k, name in enumerate(m.names):
        leaf = m.paths[k]
        assert all(leaf[:len(b)] == b for b in served[name])

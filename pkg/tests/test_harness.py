import json
import random

import pytest

from cases import c6
from onlinechains.bipartite import lex_first_matching
from onlinechains.harness import (ContractError, FirstFitPlayer, GameAlgorithm, GeneratorConfig,
                                  adversary_fig1, adversary_regular, factor_layer,
                                  generate_regular_presentation, prop4_chain_cover, read_transcript,
                                  run_events, verify_transcript)
from onlinechains.node_tree import is_ancestor_free
from onlinechains.poset import brute_force_width
from onlinechains.presentation import EventFormatError, Presentation, apply_event, validate_event


def _compose(B1, B2):
    out = []
    for row in B1:
        m = 0
        for x in range(len(B1)):
            if row >> x & 1:
                m |= B2[x]
        out.append(m)
    return out


def _transcript(events, **kw):
    _, lines = run_events(events, **kw)
    recs = [json.loads(line) for line in lines]
    return [r["colors"] for r in recs[:-1]], recs[-1]["stats"], lines


# -------------------------------------------------------------- generator

def test_c6_factorization_through_identity():
    B = c6().adj
    B1, B2 = factor_layer(B, [0, 1, 2])
    assert B1 == [1, 2, 4] and B2 == list(B)
    assert _compose(B1, B2) == list(B)
    B1, B2 = factor_layer(B, [0, 1, 2], matching_below=False)
    assert B2 == [1, 2, 4] and _compose(B1, B2) == list(B)


def test_factorization_with_a_shuffled_matching():
    rng = random.Random(3)
    for _ in range(100):
        w = rng.randint(1, 6)
        B = [rng.randrange(1, 1 << w) | (1 << i) for i in range(w)]
        tau = rng.sample(range(w), w)
        for below in (True, False):
            B1, B2 = factor_layer(B, tau, below)
            assert _compose(B1, B2) == B


def test_width_one_layers_are_single_edges():
    events = generate_regular_presentation(GeneratorConfig(w=1, rounds=30, seed=4))
    for e in events[1:]:
        assert len(e["down"]) == len(e["up"]) == 1


def test_generated_events_pass_validation():
    for w in range(1, 7):
        for seed in range(25):
            cfg = GeneratorConfig(w=w, rounds=12, seed=seed,
                                  scheme="rejection" if seed % 2 else "factorization")
            st = Presentation()
            for e in generate_regular_presentation(cfg):
                assert validate_event(st, e) == []
                apply_event(st, e, validate=False)


def test_generation_is_seeded():
    cfg = GeneratorConfig(w=4, rounds=20, seed=7)
    assert generate_regular_presentation(cfg) == generate_regular_presentation(cfg)
    other = GeneratorConfig(w=4, rounds=20, seed=8)
    assert generate_regular_presentation(cfg) != generate_regular_presentation(other)


def test_generator_arguments():
    with pytest.raises(ValueError):
        generate_regular_presentation(GeneratorConfig(w=0, rounds=3))


# -------------------------------------------------------------- adversary

def test_adversary_beats_first_fit_in_four_elements():
    res = adversary_fig1(FirstFitPlayer)
    assert res.chains_used == 3 and res.elements == 4
    assert res.assignment == [0, 1, 0, 2]
    assert res.certified_width == 2 == brute_force_width(res.poset)


class _OpenThirdChain(GameAlgorithm):
    def accept(self, v):
        return v


def test_adversary_against_a_cheat_stops_at_three():
    res = adversary_fig1(_OpenThirdChain)
    assert res.chains_used == 3 and res.elements == 3


class _Cheater(GameAlgorithm):
    def accept(self, v):
        return 0


def test_invalid_chain_disqualifies():
    with pytest.raises(ContractError):
        adversary_fig1(_Cheater)


def test_regular_adversary_forces_three_colors():
    alg, events, used = adversary_regular()
    assert used >= 3
    cols, stats, _ = _transcript(events)
    assert verify_transcript(events, cols, stats).ok


# ---------------------------------------------------------- prop4 oracle

def _run_tree(w, rounds, seed):
    events = generate_regular_presentation(GeneratorConfig(w=w, rounds=rounds, seed=seed))
    alg, _ = run_events(events)
    return alg


def _check_cover(alg, family, cover):
    w = alg.w
    assert len(cover) == w
    verts = set()
    for nid in family:
        verts |= set(alg.tree[nid].node.X) | set(alg.tree[nid].node.Y)
    assert sorted(v for ch in cover for v in ch) == sorted(verts)
    for ch in cover:
        assert alg.p.is_chain(ch) is None
    chain_of = {v: k for k, ch in enumerate(cover) for v in ch}
    for nid in family:
        for a, b in lex_first_matching(alg.tree[nid].node.bip).items():
            assert chain_of[a] == chain_of[b]


def test_single_node_cover_keeps_its_matching():
    alg = _run_tree(3, 0, 0)
    cover = prop4_chain_cover(alg.tree, [0])
    _check_cover(alg, [0], cover)


def test_random_families_give_w_chains():
    rng = random.Random(2)
    for seed in range(12):
        alg = _run_tree(rng.randint(2, 5), 25, seed)
        ids = [t.id for t in alg.tree.nodes]
        for _ in range(10):
            fam = []
            for nid in rng.sample(ids, len(ids)):
                if is_ancestor_free(alg.tree, fam + [nid]):
                    fam.append(nid)
                if len(fam) >= 4:
                    break
            _check_cover(alg, fam, prop4_chain_cover(alg.tree, fam))


def test_cover_rejects_nested_families():
    alg = _run_tree(3, 10, 1)
    child = next(t for t in alg.tree.nodes if t.parent is not None)
    with pytest.raises(ValueError):
        prop4_chain_cover(alg.tree, [child.parent, child.id])


# ----------------------------------------------------------- verification

def test_main_transcripts_verify():
    events = generate_regular_presentation(GeneratorConfig(w=4, rounds=30, seed=5))
    cols, stats, _ = _transcript(events, audit=True)
    rep = verify_transcript(events, cols, stats)
    assert rep.ok and rep.width == 4 and rep.colors_used == stats["colors_used"]


def test_verify_reports_an_incomparable_pair():
    events = generate_regular_presentation(GeneratorConfig(w=2, rounds=3, seed=1))
    cols, stats, _ = _transcript(events)
    # put two elements of the antichain A1 on one chain
    cols[0] = [[v, "same"] if v in (0, 1) else [v, c] for v, c in cols[0]]
    rep = verify_transcript(events, cols)
    assert not rep.ok
    assert any("incomparable 0 and 1" in p for p in rep.problems)


def test_verify_catches_double_and_missing_colors():
    events = generate_regular_presentation(GeneratorConfig(w=2, rounds=2, seed=1))
    cols, _, _ = _transcript(events)
    assert not verify_transcript(events, cols[:-1]).ok
    cols[1] = cols[1] + [cols[0][0]]
    assert not verify_transcript(events, cols).ok


def test_verify_flags_mismatched_stats():
    events = generate_regular_presentation(GeneratorConfig(w=2, rounds=2, seed=1))
    cols, stats, _ = _transcript(events)
    rep = verify_transcript(events, cols, dict(stats, colors_used=stats["colors_used"] + 1))
    assert not rep.ok


def test_transcript_round_trip(tmp_path):
    events = generate_regular_presentation(GeneratorConfig(w=3, rounds=6, seed=2))
    cols, stats, lines = _transcript(events)
    path = tmp_path / "t.jsonl"
    path.write_text("\n".join(lines) + "\n")
    ev2, cols2, stats2 = read_transcript(str(path))
    assert stats2 == stats and len(ev2) == len(events)
    assert verify_transcript(ev2, cols2, stats2).ok


def test_truncated_transcript_is_a_parse_error(tmp_path):
    events = generate_regular_presentation(GeneratorConfig(w=2, rounds=2, seed=0))
    _, _, lines = _transcript(events)
    path = tmp_path / "t.jsonl"
    path.write_text(lines[0] + "\n" + lines[1][: len(lines[1]) // 2])
    with pytest.raises(EventFormatError, match="line 2"):
        read_transcript(str(path))
    path.write_text('{"round": 1}\n')
    with pytest.raises(EventFormatError, match="line 1"):
        read_transcript(str(path))


def test_byte_identical_reruns():
    events = generate_regular_presentation(GeneratorConfig(w=5, rounds=40, seed=9))
    assert _transcript(events)[2] == _transcript(events)[2]


def test_verifier_copes_with_an_empty_stream():
    rep = verify_transcript([], [])
    assert rep.width == 0 and rep.ok

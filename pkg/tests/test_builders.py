import random

import pytest
from hypothesis import given, settings, strategies as st

from alcui.apta import accepts
from alcui.bisimq import holds_bisim_quantifier
from alcui.builders import (CounterTooWide, NotWellCounting, TwoTrackAlphabet, WitnessPair, build_bisim_apta,
                            build_counter_apta, build_existence_apta, build_model_apta,
                            conservative_extension_witness, counter_width, decide_conservative_extension,
                            decide_interpolant_nonexistence_at, decode_two_track, encode_two_track,
                            reaches_threshold, reduce_ce_to_ui, verify_witness)
from alcui.model import Interpretation, PointedInterpretation, is_model, segments_equal, sigma_bisimilar
from alcui.syntax import Exists, Inclusion, Name, Not, TBox, Top, parse_concept, parse_tbox, signature_of

from oracles import (S3, S4, T1, T3, T4, chain_pair, naive_bisimilar, random_pointed, random_tbox, random_tree,
                     sig, t4_pair)


def two_level_pair(rng, m, names=("A",)):
    """A random tree and a copy that agrees with it down to depth m and differs below."""
    p1 = random_tree(rng, m + 2, list(names), ["r"], width=2)
    i = p1.interp
    depth = {p1.point: 0}
    for d in sorted(i.domain, key=len):
        for e in i.successors(d, "r"):
            depth[e] = depth[d] + 1
    deep = {d for d, k in depth.items() if k > m}
    keep = {d for d in i.domain if d not in deep or rng.random() < 0.6}
    # a kept deep node needs its parent kept too
    keep = {d for d in keep if all(x in keep for x in _ancestors(d))}
    conc = {a: [d for d in sorted(keep) if (d in i.ext(a)) != (d in deep and rng.random() < 0.4)] for a in names}
    edges = {"r": [(u, v) for u, v in i.role_ext.get("r", ()) if u in keep and v in keep]}
    p2 = PointedInterpretation(Interpretation(sorted(keep), conc, edges), p1.point)
    return WitnessPair(p1, p2, m)


def _ancestors(d):
    parts = d.split(".")
    return [".".join(parts[:k]) for k in range(1, len(parts))]


def test_counter_width():
    assert [counter_width(m) for m in (0, 1, 2, 5, 6, 14)] == [1, 2, 2, 3, 3, 4]
    alpha = TwoTrackAlphabet(sig("A,r"), 2)
    assert alpha.node_names == ["A/1", "A/2", "#c1", "#c2"]
    assert alpha.edge_names == ["r/1", "r/2", "r/12"]


def test_counter_too_wide():
    with pytest.raises(CounterTooWide):
        build_existence_apta(T3, S3, 6, max_counter_bits=2)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_encode_decode_chain_pairs(m):
    w = chain_pair(m)
    enc = encode_two_track(WitnessPair(*w, m), S3)
    back = decode_two_track(enc, S3, m)
    assert naive_bisimilar(back.i1, w[0], S3)
    assert naive_bisimilar(back.i2, w[1], S3)
    assert accepts(build_counter_apta(S3, m, TwoTrackAlphabet(S3, m)), enc)


@given(st.integers(0, 10 ** 9), st.integers(0, 2))
@settings(max_examples=40, deadline=None)
def test_encoding_roundtrip_and_counter_automaton(seed, m):
    rng = random.Random(seed)
    w = two_level_pair(rng, m)
    assert segments_equal(w.i1, w.i2, S3, m)
    enc = encode_two_track(w, S3)
    back = decode_two_track(enc, S3, m)
    assert sigma_bisimilar(back.i1, w.i1, S3) and sigma_bisimilar(back.i2, w.i2, S3)
    assert accepts(build_counter_apta(S3, m, TwoTrackAlphabet(S3, m)), enc)


def test_counter_automaton_rejects_broken_segments():
    m = 1
    alpha = TwoTrackAlphabet(S3, m)
    a = build_counter_apta(S3, m, alpha)
    # labels differ at the root
    i = Interpretation(["e"], {"A/1": ["e"]}, {})
    assert not accepts(a, PointedInterpretation(i, "e"))
    # a track-only edge above depth m
    i = Interpretation(["e", "x"], {"#c1": ["x"]}, {"r/1": [("e", "x")]})
    assert not accepts(a, PointedInterpretation(i, "e"))
    i = Interpretation(["e", "x"], {"#c1": ["x"]}, {"r/12": [("e", "x")]})
    assert accepts(a, PointedInterpretation(i, "e"))
    # a wrong counter value
    i = Interpretation(["e", "x"], {}, {"r/12": [("e", "x")]})
    assert not accepts(a, PointedInterpretation(i, "e"))


def test_decode_reports_bad_counters():
    i = Interpretation(["e", "x"], {}, {"r/12": [("e", "x")]})
    with pytest.raises(NotWellCounting) as err:
        decode_two_track(PointedInterpretation(i, "e"), S3, 1)
    assert err.value.path == ("e", "x")
    i = Interpretation(["e"], {"#c1": ["e"]}, {})
    with pytest.raises(NotWellCounting):
        decode_two_track(PointedInterpretation(i, "e"), S3, 1)


def test_encode_rejects_unequal_segments():
    p = PointedInterpretation(Interpretation(["0", "1"], {}, {"r": [("0", "1")]}), "0")
    q = PointedInterpretation(Interpretation(["0"], {}, {}), "0")
    with pytest.raises(ValueError):
        encode_two_track(WitnessPair(p, q, 1), S3)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_verify_chain_witnesses(m):
    assert verify_witness(WitnessPair(*chain_pair(m), m), T3, S3)


def test_verify_witness_negative_examples():
    i1, i2 = chain_pair(1)
    assert not verify_witness(WitnessPair(i1, i1, 1), T3, S3)
    assert not verify_witness(WitnessPair(i2, i2, 1), T3, S3)
    # segments differ at depth 2
    assert not verify_witness(WitnessPair(i1, i2, 2), T3, S3)
    # under the full signature T3 itself is the interpolant
    assert not verify_witness(WitnessPair(i1, i2, 1), T3, signature_of(T3))


def test_t4_pair_with_listed_signature():
    # with A2 outside the signature the second interpretation is still
    # bisimilar to a model, so the pair is no witness
    w = WitnessPair(*t4_pair(1), 1)
    assert not verify_witness(w, T4, S4)
    assert verify_witness(w, T4, S4 | sig("A2"))


def test_model_automaton_examples():
    a = build_model_apta(T3, S3)
    i1, i2 = chain_pair(2)
    lab = Interpretation(list(i1.interp.domain), {"A": ["0"], "B": list(i1.interp.domain)},
                         {"r": list(i1.interp.role_ext["r"])})
    assert accepts(a, PointedInterpretation(lab, "0"))
    assert not accepts(a, i1)  # B missing
    assert not accepts(a, i2)


@given(st.integers(0, 10 ** 9))
@settings(max_examples=80, deadline=None)
def test_bisim_automaton_matches_ext_oracle(seed):
    rng = random.Random(seed)
    t = random_tbox(rng, max_cl=10)
    s = rng.choice([sig("A,r"), sig("A,B,r"), sig("B")])
    p = random_pointed(rng, 4, ["A", "B"], ["r"])
    want = holds_bisim_quantifier(p, t, s)
    assert accepts(build_bisim_apta(t, s), p) == want
    assert accepts(build_bisim_apta(t, s, reduce=True), p) == want


@given(st.integers(0, 10 ** 9))
@settings(max_examples=60, deadline=None)
def test_model_automaton_matches_is_model(seed):
    rng = random.Random(seed)
    t = random_tbox(rng, max_cl=10)
    p = random_pointed(rng, 4, ["A", "B"], ["r"])
    reach = {p.point}
    todo = [p.point]
    while todo:
        for e in p.interp.successors(todo.pop(), "r"):
            if e not in reach:
                reach.add(e)
                todo.append(e)
    i = p.interp
    sub = Interpretation(sorted(reach), {a: [d for d in e if d in reach] for a, e in i.concept_ext.items()},
                         {"r": [(u, v) for u, v in i.role_ext.get("r", ()) if u in reach]})
    assert accepts(build_model_apta(t, sig("A,B,r")), p) == is_model(sub, t)


@given(st.integers(0, 10 ** 9), st.integers(0, 1))
@settings(max_examples=25, deadline=None)
def test_existence_automaton_matches_verify_witness(seed, m):
    rng = random.Random(seed)
    t = random_tbox(rng, max_cl=6, max_inc=1)
    w = two_level_pair(rng, m)
    a = build_existence_apta(t, S3, m)
    assert accepts(a, encode_two_track(w, S3)) == verify_witness(w, t, S3)


CHAIN_POOL = [T3, parse_tbox("top sub exists r. top"), parse_tbox("A sub exists r. A"),
              parse_tbox("B sub exists r. B\nA sub B or exists r. A")]


def chain_variant(rng, m):
    """Two A-labelled r-chains sharing labels up to depth m, each maybe ending in a loop."""
    shared = [rng.random() < 0.5 for _ in range(m + 1)]

    def make(n, loop):
        dom = [str(k) for k in range(n + 1)]
        a = [str(k) for k in range(n + 1) if (shared[k] if k <= m else rng.random() < 0.5)]
        e = [(str(k), str(k + 1)) for k in range(n)] + ([(str(n), str(n))] if loop else [])
        return PointedInterpretation(Interpretation(dom, {"A": a}, {"r": e}), "0")

    return WitnessPair(make(m + rng.randint(0, 2), rng.random() < 0.8),
                       make(m + rng.randint(0, 2), rng.random() < 0.3), m)


def test_existence_automaton_matches_verify_witness_on_chains():
    rng = random.Random(5)
    seen = set()
    for k in range(200):
        m = k % 3
        t = rng.choice(CHAIN_POOL) if rng.random() < 0.7 else random_tbox(rng, max_cl=6, max_inc=1)
        w = chain_variant(rng, m)
        want = verify_witness(w, t, S3)
        seen.add(want)
        assert accepts(build_existence_apta(t, S3, m), encode_two_track(w, S3)) == want
    assert seen == {True, False}


def test_existence_automaton_accepts_chain_encodings():
    for m in (1, 2):
        a = build_existence_apta(T3, S3, m)
        assert accepts(a, encode_two_track(WitnessPair(*chain_pair(m), m), S3))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_star_on_t3(m):
    res = decide_interpolant_nonexistence_at(T3, S3, m)
    assert res.holds and not res.exact
    assert verify_witness(res.witness, T3, S3)


@pytest.mark.parametrize("m", [1, 2])
def test_star_fails_on_t1(m):
    res = decide_interpolant_nonexistence_at(T1, S3, m)
    assert not res.holds and res.witness is None


def test_star_fails_for_full_signature():
    res = decide_interpolant_nonexistence_at(T3, signature_of(T3), 1)
    assert not res.holds


def test_reaches_threshold():
    t = parse_tbox("A sub B")  # size 2, so M*M = 2^8
    assert not reaches_threshold(t, 256)
    assert reaches_threshold(t, 257)
    assert not reaches_threshold(t, 1)


def test_conservative_extension_examples():
    assert decide_conservative_extension(T1, T1 | parse_tbox("A sub exists r. top"))
    assert decide_conservative_extension(T3, T3 | parse_tbox("A and B sub A"))
    w = conservative_extension_witness(TBox(), parse_tbox("top sub A"), sig("A"))
    assert w is not None
    assert w.point not in w.interp.ext("A")


@given(st.integers(0, 10 ** 9))
@settings(max_examples=30, deadline=None)
def test_ce_witnesses_are_genuine(seed):
    rng = random.Random(seed)
    t = random_tbox(rng, max_cl=6, max_inc=1)
    extra = random_tbox(rng, max_cl=6, max_inc=1)
    s = signature_of(t) | sig("A,r")
    w = conservative_extension_witness(t, extra, s)
    if w is None:
        # the extension adds nothing visible: every small model of t over s is
        # bisimilar to a model of both
        for _ in range(5):
            p = random_pointed(rng, 3, sorted(s.concepts), sorted(s.roles))
            if accepts(build_model_apta(t, s), p):
                assert holds_bisim_quantifier(p, t | extra, s)
    else:
        assert accepts(build_model_apta(t, s), w)
        assert not holds_bisim_quantifier(w, t | extra, s)


def test_reduce_ce_to_ui_shape():
    c = parse_concept("exists r. A")
    t0, s0 = reduce_ce_to_ui(T3, c)
    x, xr = Name("Xa"), "xr"
    assert Inclusion(Not(c), x) in t0 and Inclusion(x, Exists(xr, x)) in t0
    assert Inclusion(Exists("r", x), x) in t0 and Inclusion(Exists(xr, x), x) not in t0
    assert s0.concepts == signature_of(T3).concepts and s0.roles == {"r", "xr"}
    assert set(T3) <= set(t0)


def test_reduce_ce_to_ui_avoids_clashes():
    t = parse_tbox("Xa sub exists xr. top")
    t0, s0 = reduce_ce_to_ui(t, Top)
    assert "Xa1" in signature_of(t0).concepts
    assert "xr1" in s0.roles


def test_reduction_agrees_with_ce_on_examples():
    # a conservative extension gives a TBox with no nonexistence witness
    t0, s0 = reduce_ce_to_ui(TBox(), Top)
    for m in (0, 1):
        assert not decide_interpolant_nonexistence_at(t0, s0, m).holds

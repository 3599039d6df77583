import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from alcui.apta import (APTA, FALSE, TRUE, AndM, Atom, Box, Dia, NegAtom, OrM, State, UndeclaredSymbol,
                        UnsupportedPriorities, accepts, complement, compress_priorities, f_and, f_atom, f_dia,
                        f_natom, f_or, f_state, from_formulas, intersect, intersect_all, is_empty, is_weak,
                        to_weak, unfold_eps_cycles)
from alcui.bisimq import holds_bisim_quantifier
from alcui.builders import build_bisim_apta
from alcui.model import Interpretation, PointedInterpretation, sigma_bisimilar

from oracles import S1, T1, random_apta, random_pointed, random_tbox, sig


def auto(delta, prio=None, node=("A",), edge=("r",), init="q0"):
    prio = prio or {q: 0 for q in delta}
    return APTA(list(delta), node, edge, init, delta, prio)


def loop_point():
    return PointedInterpretation(Interpretation(["d"], {}, {"r": [("d", "d")]}), "d")


def test_from_formulas_examples():
    a = from_formulas({"q": f_and(f_atom("A"), f_dia("r", f_state("q")))}, {"A"}, {"r"}, "q")
    assert len(a) == 3
    assert a.delta["q"].kind == "and"
    b = from_formulas({"q": ("true",)}, {"A"}, {"r"}, "q")
    assert b.delta["q"] == TRUE and len(b) == 1
    formulas = {"q0": f_or(f_state("t1"), f_state("t2"), f_state("t3")),
            "t1": f_atom("A"), "t2": f_natom("A"), "t3": ("true",)}
    c = from_formulas(formulas, {"A"}, {"r"}, "q0", priority={"q0": 2, "t1": 0, "t2": 0, "t3": 0})
    ors = [q for q in c.states if c.delta[q].kind == "or"]
    assert len(ors) == 2
    assert all(c.priority[q] == 2 for q in ors)


def test_from_formulas_rejects_undeclared():
    with pytest.raises(UndeclaredSymbol):
        from_formulas({"q": f_atom("Z")}, {"A"}, {"r"}, "q")
    with pytest.raises(UndeclaredSymbol):
        from_formulas({"q": f_dia("s", ("true",))}, {"A"}, {"r"}, "q")
    with pytest.raises(UndeclaredSymbol):
        from_formulas({"q": f_state("nowhere")}, {"A"}, {"r"}, "q")


def test_dump_format():
    a = auto({"q0": AndM("q1", "q2"), "q1": Atom("A"), "q2": Dia("r", "q0")}, {"q0": 0, "q1": 1, "q2": 0})
    assert a.dump() == "q0: 0 / q1 and q2\nq1: 1 / A\nq2: 0 / <r> q0\n"


def test_apta_validation():
    with pytest.raises(ValueError):
        APTA(["q0"], ["A"], ["r"], "q1", {"q0": TRUE}, {"q0": 0})
    with pytest.raises(ValueError):
        APTA(["q0"], ["A"], ["r"], "q0", {"q0": State("q9")}, {"q0": 0})


def test_complement_examples():
    a = auto({"q0": Dia("r", "q0")})
    c = complement(a)
    assert set(c.priority.values()) == {1}
    assert c.delta["q0"] == Box("r", "q0")
    rng = random.Random(1)
    for _ in range(50):
        a = random_apta(rng)
        cc = complement(complement(a))
        p = random_pointed(rng, 3, ["A"], ["r"])
        assert accepts(cc, p) == accepts(a, p)


def test_complement_of_bisim_automaton_rejects_models():
    from alcui.typesys import compute_types, model_from_type
    ts = compute_types(T1)
    c = complement(build_bisim_apta(T1, S1))
    for k in ts.types:
        p = model_from_type(ts, k)
        assert not accepts(c, PointedInterpretation(p.interp.restrict(S1), p.point))


def test_intersect_examples():
    rng = random.Random(2)
    true_auto = auto({"t": TRUE}, init="t")
    for _ in range(50):
        a = random_apta(rng)
        p = random_pointed(rng, 3, ["A"], ["r"])
        assert accepts(intersect(a, true_auto), p) == accepts(a, p)
        assert not accepts(intersect(a, complement(a)), p)


def test_accepts_examples():
    assert accepts(auto({"q0": TRUE}), loop_point())
    assert accepts(auto({"q0": Dia("r", "q0")}, {"q0": 0}), loop_point())
    assert not accepts(auto({"q0": Dia("r", "q0")}, {"q0": 1}), loop_point())
    # box over no successors is won trivially, dia is lost
    lone = PointedInterpretation(Interpretation(["d"]), "d")
    assert accepts(auto({"q0": Box("r", "q0")}, {"q0": 1}), lone)
    assert not accepts(auto({"q0": Dia("r", "q0")}, {"q0": 0}), lone)


def test_is_empty_examples():
    assert is_empty(auto({"q0": FALSE})) is None
    assert is_empty(auto({"q0": AndM("a", "b"), "a": Atom("A"), "b": NegAtom("A")})) is None
    w = is_empty(build_bisim_apta(T1, S1))
    assert w is not None
    assert accepts(build_bisim_apta(T1, S1), w)
    assert holds_bisim_quantifier(w, T1, S1)


def test_is_empty_refuses_wide_priorities():
    a = auto({"q0": Dia("r", "q1"), "q1": Dia("r", "q0")}, {"q0": 1, "q1": 2})
    with pytest.raises(UnsupportedPriorities):
        is_empty(a)


def test_compress_priorities():
    assert compress_priorities({"a": 1, "b": 2}) == {"a": 1, "b": 2}
    assert compress_priorities({"a": 2, "b": 4}) == {"a": 0, "b": 0}
    assert compress_priorities({"a": 1, "b": 3}) == {"a": 1, "b": 1}
    assert compress_priorities({"a": 0, "b": 3, "c": 5}) == {"a": 0, "b": 1, "c": 1}


def test_weak_conversion_preserves_language():
    rng = random.Random(5)
    done = 0
    while done < 30:
        a = random_apta(rng, n=3)
        if is_weak(a):
            continue
        w, _ = to_weak(a, a.priority)
        assert is_weak(w)
        for _ in range(5):
            p = random_pointed(rng, 3, ["A"], ["r"])
            assert accepts(w, p) == accepts(a, p)
        done += 1


@given(st.integers(0, 10 ** 9))
@settings(max_examples=150, deadline=None)
def test_boolean_laws(seed):
    rng = random.Random(seed)
    a = random_apta(rng, prios=(0, 1, 2, 3))
    b = random_apta(rng, prios=(0, 1, 2, 3))
    p = random_pointed(rng, 4, ["A"], ["r"])
    x, y = accepts(a, p), accepts(b, p)
    assert accepts(complement(a), p) == (not x)
    assert accepts(intersect(a, b), p) == (x and y)
    assert accepts(intersect_all([a, b, complement(b)], ["a.", "b.", "c."]), p) is False


@given(st.integers(0, 10 ** 9))
@settings(max_examples=100, deadline=None)
def test_bisimulation_closure(seed):
    rng = random.Random(seed)
    a = random_apta(rng, prios=(0, 1, 2))
    p = random_pointed(rng, 3, ["A"], ["r"])
    i = p.interp
    dom = list(i.domain) + [d + "'" for d in i.domain]
    conc = {k: list(e) + [d + "'" for d in e] for k, e in i.concept_ext.items()}
    edges = {r: list(e) + [(u + "'", v + "'") for u, v in e] + [(u, v + "'") for u, v in e]
             for r, e in i.role_ext.items()}
    q = PointedInterpretation(Interpretation(dom, conc, edges), p.point + "'")
    assert sigma_bisimilar(p, q, sig("A,r"))
    assert accepts(a, p) == accepts(a, q)


def small_interps(n):
    dom = [str(k) for k in range(n)]
    pairs = [(u, v) for u in dom for v in dom]
    for lab in range(2 ** n):
        for e in range(2 ** len(pairs)):
            i = Interpretation(dom, {"A": [dom[j] for j in range(n) if (lab >> j) & 1]},
                               {"r": [pairs[j] for j in range(len(pairs)) if (e >> j) & 1]})
            yield PointedInterpretation(i, "0")


SMALL = [p for n in (1, 2) for p in small_interps(n)]


@given(st.integers(0, 10 ** 9))
@settings(max_examples=150, deadline=None)
def test_emptiness_against_bounded_search(seed):
    rng = random.Random(seed)
    a = random_apta(rng, n=rng.randint(2, 5), prios=(0, 1))
    w = is_empty(a)
    found = any(accepts(a, p) for p in SMALL)
    if found:
        assert w is not None
    if w is not None:
        assert accepts(a, w)


def test_emptiness_on_complements_and_intersections():
    rng = random.Random(11)
    for _ in range(40):
        # complements of larger instances branch over every type at every node
        t = random_tbox(rng, max_cl=8)
        s = rng.choice([sig("A,r"), sig("A,B,r")])
        a = build_bisim_apta(t, s)
        for b in (a, complement(a)):
            w = is_empty(b)
            found = any(accepts(b, PointedInterpretation(p.interp, p.point)) for p in SMALL[:40])
            if found:
                assert w is not None
            if w is not None:
                assert accepts(b, w)


def test_emptiness_witness_examples_product():
    a = auto({"q0": AndM("a", "b"), "a": Dia("r", "q1"), "b": Box("r", "q2"),
              "q1": Atom("A"), "q2": OrM("q3", "q4"), "q3": NegAtom("A"), "q4": Dia("r", "q1")},
             {q: 0 for q in ("q0", "a", "b", "q1", "q2", "q3", "q4")})
    w = is_empty(a)
    assert w is not None and accepts(a, w)
    assert list(itertools.islice(small_interps(1), 1))


def test_unfold_eps_cycles_examples():
    # an even epsilon loop accepts, an odd one rejects
    even = auto({"q0": OrM("q1", "q2"), "q1": State("q0"), "q2": Atom("A")}, {"q0": 0, "q1": 0, "q2": 0})
    odd = auto({"q0": OrM("q1", "q2"), "q1": State("q0"), "q2": Atom("A")}, {"q0": 1, "q1": 1, "q2": 1})
    u, _ = unfold_eps_cycles(even, even.priority)
    assert {u.delta[q].kind for q in u.states} >= {"true"}
    bare = PointedInterpretation(Interpretation(["d"]), "d")
    assert accepts(even, bare) and accepts(u, bare)
    v, _ = unfold_eps_cycles(odd, odd.priority)
    assert not accepts(odd, bare) and not accepts(v, bare)
    assert is_empty(odd) is not None  # still satisfiable through A
    plain = auto({"q0": Dia("r", "q0")})
    assert unfold_eps_cycles(plain, plain.priority)[0] is plain


def test_pure_epsilon_cycle_is_empty():
    a = auto({"q0": AndM("q3", "q1"), "q1": AndM("q0", "q0"), "q2": OrM("q2", "q0"), "q3": AndM("q2", "q2")},
             {"q0": 0, "q1": 0, "q2": 1, "q3": 0})
    assert not is_weak(a)
    assert is_empty(a) is None
    assert not any(accepts(a, p) for p in SMALL)


@given(st.integers(0, 10 ** 9))
@settings(max_examples=80, deadline=None)
def test_unfolding_preserves_acceptance(seed):
    rng = random.Random(seed)
    a = random_apta(rng, n=rng.randint(2, 5), prios=(0, 1))
    if not is_weak(a):
        a, _ = to_weak(a, compress_priorities(a.priority))
    u, _ = unfold_eps_cycles(a, a.priority)
    for p in SMALL[::7]:
        assert accepts(a, p) == accepts(u, p)

"""Automata for the bisimulation quantifier, models of a TBox, the two-track
existence test, and the deciders built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

from .apta import (
    APTA, F_FALSE, F_TRUE, complement, f_and, f_atom, f_box, f_dia, f_natom, f_or,
    f_state, from_formulas, intersect, intersect_all, is_empty,
)
from .bisimq import holds_bisim_quantifier
from .model import Interpretation, PointedInterpretation, segment_code, segments_equal
from .syntax import (
    Concept, Exists, Inclusion, Name, Not, Signature, TBox, Top,
    internalize, nnf, render, signature_of, size,
)
from .typesys import TypeSet, compute_types


class CounterTooWide(RuntimeError):
    pass


class NotWellCounting(ValueError):
    def __init__(self, msg, path=()):
        super().__init__(msg + (f" (path {' -> '.join(path)})" if path else ""))
        self.path = tuple(path)


# ---------------------------------------------------------------- two-track names

def track_name(a: str, track: int) -> str:
    return f"{a}/{track}"


def track_role(r: str, track) -> str:
    return f"{r}/{track}"


def counter_name(j: int) -> str:
    return f"#c{j}"


def counter_width(m: int) -> int:
    return max(1, math.ceil(math.log2(m + 2)))


@dataclass(frozen=True)
class TwoTrackAlphabet:
    sigma: Signature
    m: int

    @property
    def k(self) -> int:
        return counter_width(self.m)

    @property
    def node_names(self) -> List[str]:
        out = [track_name(a, i) for a in sorted(self.sigma.concepts) for i in (1, 2)]
        return out + [counter_name(j) for j in range(1, self.k + 1)]

    @property
    def edge_names(self) -> List[str]:
        return [track_role(r, i) for r in sorted(self.sigma.roles) for i in (1, 2, 12)]


@dataclass
class WitnessPair:
    i1: PointedInterpretation
    i2: PointedInterpretation
    depth: int


# ---------------------------------------------------------------- the bisimulation automaton

def type_preorder(ts: TypeSet, s: Signature) -> set:
    """Pairs (u, v) such that the transition formula of u implies that of v.

    Greatest relation where u and v agree on the Sigma-names in the closure,
    every Sigma-role successor allowed for u is below one allowed for v, and
    each diamond of v is implied by a diamond of u.
    """
    names = [a for a in sorted(s.concepts) if Name(a) in ts.index.index]
    roles = sorted(s.roles)
    types = list(ts.types)
    lab = {k: tuple(ts.holds(k, Name(a)) for a in names) for k in types}
    succ = {(k, r): ts.succ(k, r) for k in types for r in roles}
    dias = {k: [(r, ts.witnesses(k, r, body)) for r, body in ts.demands(k) if r in s.roles]
            for k in types}
    le = {(u, v) for u in types for v in types if lab[u] == lab[v]}
    changed = True
    while changed:
        changed = False
        for u, v in list(le):
            if u == v:
                continue
            ok = all(any((x, y) in le for y in succ[v, r]) for r in roles for x in succ[u, r])
            if ok:
                ok = all(any(r2 == r and all(any((x, y) in le for y in wv) for x in wu)
                             for r2, wu in dias[u])
                         for r, wv in dias[v])
            if not ok:
                le.discard((u, v))
                changed = True
    return le


def bisim_formulas(ts: TypeSet, s: Signature, reduce: bool = False) -> Tuple[Dict[str, tuple], List[str]]:
    """Transition formulas of the automaton for the bisimulation quantifier.

    With reduce, types with equivalent formulas share one state and every
    disjunction keeps only its strongest members.
    """
    names = [a for a in sorted(s.concepts) if Name(a) in ts.index.index]
    roles = sorted(s.roles)
    tid = lambda k: f"t{k}"
    if reduce:
        le = type_preorder(ts, s)
        rep = {}
        for k in ts.types:
            rep[k] = min(u for u in ts.types if (k, u) in le and (u, k) in le)
        keep = sorted(set(rep.values()))

        def pick(group):
            group = sorted({rep[u] for u in group})
            return [u for u in group if not any((u, v) in le and (v, u) not in le for v in group)]
    else:
        keep = list(ts.types)

        def pick(group):
            return list(group)
    formulas = {"q0": f_or(*[f_state(tid(k)) for k in pick(ts.types)])}
    for k in keep:
        parts = []
        for a in names:
            parts.append(f_atom(a) if ts.holds(k, Name(a)) else f_natom(a))
        for r in roles:
            parts.append(f_box(r, f_or(*[f_state(tid(u)) for u in pick(ts.succ(k, r))])))
        for r, body in ts.demands(k):
            if r in s.roles:
                parts.append(f_dia(r, f_or(*[f_state(tid(u)) for u in pick(ts.witnesses(k, r, body))])))
        formulas[tid(k)] = f_and(*parts)
    order = ["q0"] + [tid(k) for k in keep]
    return formulas, order


def build_bisim_apta(t: TBox, s: Signature, ts: Optional[TypeSet] = None,
                     reduce: bool = False) -> APTA:
    ts = compute_types(t) if ts is None else ts
    formulas, order = bisim_formulas(ts, s, reduce)
    return from_formulas(formulas, s.concepts, s.roles, "q0", 0, order=order)


def build_model_apta(t: TBox, s: Signature) -> APTA:
    """Accepts (I,d) iff every element reachable from d over roles in s satisfies C_T."""
    ct = nnf(internalize(t))
    roles = sorted(s.roles | signature_of(t).roles)
    names = s.concepts | signature_of(t).concepts
    formulas = {"q0": f_and(f_state(_cstate(ct)), *[f_box(r, f_state("q0")) for r in sorted(s.roles)])}
    order = ["q0"]
    todo = [ct]
    seen = set()
    while todo:
        c = todo.pop()
        q = _cstate(c)
        if q in seen:
            continue
        seen.add(q)
        order.append(q)
        k = c.kind
        if k == "top":
            formulas[q] = F_TRUE
        elif k == "bot":
            formulas[q] = F_FALSE
        elif k == "name":
            formulas[q] = f_atom(c.name)
        elif k == "not":
            formulas[q] = f_natom(c.arg.name)
        elif k in ("and", "or"):
            parts = [f_state(_cstate(c.left)), f_state(_cstate(c.right))]
            formulas[q] = ("and" if k == "and" else "or", tuple(parts))
            todo.extend([c.left, c.right])
        elif k == "exists":
            formulas[q] = f_dia(c.role, f_state(_cstate(c.arg)))
            todo.append(c.arg)
        else:
            formulas[q] = f_box(c.role, f_state(_cstate(c.arg)))
            todo.append(c.arg)
    return from_formulas(formulas, names, roles, "q0", 0, order=order)


def _cstate(c: Concept) -> str:
    return "[" + render(c) + "]"


# ---------------------------------------------------------------- retargeting onto a track

def retarget(f: tuple, track: int) -> tuple:
    kind = f[0]
    if kind == "atom":
        return f_atom(track_name(f[1], track))
    if kind == "natom":
        return f_natom(track_name(f[1], track))
    if kind in ("and", "or"):
        return (kind, tuple(retarget(x, track) for x in f[1]))
    if kind == "dia":
        g = retarget(f[2], track)
        return f_or(f_dia(track_role(f[1], track), g), f_dia(track_role(f[1], 12), g))
    if kind == "box":
        g = retarget(f[2], track)
        return f_and(f_box(track_role(f[1], track), g), f_box(track_role(f[1], 12), g))
    return f


def _track_apta(ts: TypeSet, s: Signature, track: int, alpha: TwoTrackAlphabet,
                start_at_successors: bool = False) -> APTA:
    formulas, order = bisim_formulas(ts, s, reduce=True)
    tformulas = {q: retarget(f, track) for q, f in formulas.items()}
    if start_at_successors:
        tformulas["s0"] = f_and(*[f_box(track_role(r, e), f_state("q0"))
                              for r in sorted(s.roles) for e in (track, 12)])
        order = ["s0"] + order
        init = "s0"
    else:
        init = "q0"
    # a box over a state reference needs the state itself as target, which
    # retarget keeps intact; both copies share the formula for the same target
    return from_formulas(tformulas, alpha.node_names, alpha.edge_names, init, 0, order=order, share=True)


def _counter_formula(v: int, k: int) -> tuple:
    return f_and(*[f_atom(counter_name(j + 1)) if (v >> j) & 1 else f_natom(counter_name(j + 1))
                   for j in range(k)])


def build_counter_apta(s: Signature, m: int, alpha: TwoTrackAlphabet) -> APTA:
    """Counter and segment-equality automaton on the two-track alphabet.

    State n_v asserts that the counter reads v; below depth m+1 both tracks
    carry the same labels; below depth m every edge is shared by both tracks.
    The counter increases by one along every edge and stays at m+1.
    """
    k = alpha.k
    top = m + 1
    formulas = {}
    order = []
    for v in range(top + 1):
        parts = [_counter_formula(v, k)]
        if v <= m:
            for a in sorted(s.concepts):
                a1, a2 = track_name(a, 1), track_name(a, 2)
                parts.append(f_or(f_and(f_atom(a1), f_atom(a2)), f_and(f_natom(a1), f_natom(a2))))
        if v < m:
            for r in sorted(s.roles):
                parts.append(f_box(track_role(r, 1), F_FALSE))
                parts.append(f_box(track_role(r, 2), F_FALSE))
        nxt = f_state(f"n{min(v + 1, top)}")
        for r in sorted(s.roles):
            for e in (1, 2, 12):
                parts.append(f_box(track_role(r, e), nxt))
        formulas[f"n{v}"] = f_and(*parts)
        order.append(f"n{v}")
    return from_formulas(formulas, alpha.node_names, alpha.edge_names, "n0", 0, order=order)


def build_existence_apta(t: TBox, s: Signature, m: int, max_counter_bits: int = 12,
                         ts: Optional[TypeSet] = None) -> APTA:
    alpha = TwoTrackAlphabet(s, m)
    if alpha.k > max_counter_bits:
        raise CounterTooWide(f"counter needs {alpha.k} bits, cap is {max_counter_bits}")
    ts = compute_types(t) if ts is None else ts
    a1 = _track_apta(ts, s, 1, alpha)
    a2 = complement(_track_apta(ts, s, 2, alpha))
    a3 = _track_apta(ts, s, 2, alpha, start_at_successors=True)
    a4 = build_counter_apta(s, m, alpha)
    return intersect_all([a1, a2, a3, a4], ["A1.", "A2.", "A3.", "A4."], "q0")


# ---------------------------------------------------------------- decoding and checking witnesses

def _counter_value(i: Interpretation, d: str, k: int) -> int:
    labels = i.labels(d)
    return sum(1 << j for j in range(k) if counter_name(j + 1) in labels)


def decode_two_track(p: PointedInterpretation, s: Signature, m: int) -> WitnessPair:
    """Split a two-track interpretation into the pair it encodes.

    The counter must read 0 at the point and min(n, m+1) after n steps along
    any path; otherwise NotWellCounting is raised with a path to the first
    offending element.
    """
    alpha = TwoTrackAlphabet(s, m)
    i, root = p.interp, p.point
    k = alpha.k
    edges = [(r, e) for r in sorted(s.roles) for e in (1, 2, 12)]
    parent = {root: None}
    want = {root: 0}
    queue = [root]
    while queue:
        d = queue.pop(0)
        got = _counter_value(i, d, k)
        if got != want[d]:
            path = []
            x = d
            while x is not None:
                path.append(x)
                x = parent[x]
            raise NotWellCounting(f"counter at {d} reads {got}, expected {want[d]}", path[::-1])
        nxt = min(want[d] + 1, m + 1)
        for r, e in edges:
            for x in i.successors(d, track_role(r, e)):
                if x not in want:
                    want[x] = nxt
                    parent[x] = d
                    queue.append(x)
                elif want[x] != nxt:
                    path = []
                    y = d
                    while y is not None:
                        path.append(y)
                        y = parent[y]
                    raise NotWellCounting(f"{x} is reached at two different depths", path[::-1] + [x])
    return WitnessPair(_track(i, root, s, 1), _track(i, root, s, 2), m)


def _track(i: Interpretation, root: str, s: Signature, track: int) -> PointedInterpretation:
    roles = {r: [] for r in sorted(s.roles)}
    seen = {root}
    todo = [root]
    while todo:
        d = todo.pop()
        for r in roles:
            for e in (track, 12):
                for x in i.successors(d, track_role(r, e)):
                    roles[r].append((d, x))
                    if x not in seen:
                        seen.add(x)
                        todo.append(x)
    dom = sorted(seen)
    concepts = {a: [d for d in dom if track_name(a, track) in i.labels(d)] for a in sorted(s.concepts)}
    return PointedInterpretation(Interpretation(dom, concepts, {r: sorted(set(v)) for r, v in roles.items()}), root)


def encode_two_track(w: WitnessPair, s: Signature) -> PointedInterpretation:
    """Two-track interpretation whose decoding gives back the unravelled pair.

    Both interpretations are unravelled to depth w.depth + 1; below that the
    original graphs are kept, renamed apart. The shared part is the common
    depth-m segment, so w must satisfy segment equality.
    """
    m = w.depth
    alpha = TwoTrackAlphabet(s, m)
    concepts: Dict[str, set] = {}
    roles: Dict[str, set] = {}
    dom = set()

    def label(d, names, counter):
        dom.add(d)
        for a in names:
            concepts.setdefault(a, set()).add(d)
        for j in range(alpha.k):
            if (counter >> j) & 1:
                concepts.setdefault(counter_name(j + 1), set()).add(d)

    def edge(r, e, u, v):
        roles.setdefault(track_role(r, e), set()).add((u, v))

    def tail(p: PointedInterpretation, track: int, d: str) -> str:
        # the rest of track `track` below depth m+1, with the counter frozen
        tag = f"{track}:"
        todo = [d]
        seen = {d}
        while todo:
            x = todo.pop()
            label(tag + x, [track_name(a, track) for a in sorted(s.concepts) if x in p.interp.ext(a)], m + 1)
            for r in sorted(s.roles):
                for y in p.interp.successors(x, r):
                    edge(r, track, tag + x, tag + y)
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
        return tag + d


    def build(u1, u2, name, depth):
        # u1, u2 are m-depth-equal positions in the two interpretations
        p1 = PointedInterpretation(w.i1.interp, u1)
        p2 = PointedInterpretation(w.i2.interp, u2)
        names = [track_name(a, t) for a in sorted(s.concepts)
                 for t, p in ((1, p1), (2, p2)) if p.point in p.interp.ext(a)]
        label(name, names, depth)
        for r in sorted(s.roles):
            kids1 = list(w.i1.interp.successors(u1, r))
            kids2 = list(w.i2.interp.successors(u2, r))
            if depth < m:
                rest = m - depth - 1
                codes1 = [segment_code(PointedInterpretation(w.i1.interp, x), s, rest) for x in kids1]
                codes2 = [segment_code(PointedInterpretation(w.i2.interp, y), s, rest) for y in kids2]
                # every child on either side gets a partner with the same segment
                pairs = []
                for x, cx in zip(kids1, codes1):
                    if cx not in codes2:
                        raise ValueError("pair does not share its depth-m segment")
                    pairs.append((x, kids2[codes2.index(cx)]))
                used = {y for _, y in pairs}
                for y, cy in zip(kids2, codes2):
                    if y in used:
                        continue
                    if cy not in codes1:
                        raise ValueError("pair does not share its depth-m segment")
                    pairs.append((kids1[codes1.index(cy)], y))
                for n, (x, y) in enumerate(pairs):
                    child = f"{name}/{r}{n}"
                    edge(r, 12, name, child)
                    build(x, y, child, depth + 1)
            else:
                for x in kids1:
                    edge(r, 1, name, tail(w.i1, 1, x))
                for y in kids2:
                    edge(r, 2, name, tail(w.i2, 2, y))

    build(w.i1.point, w.i2.point, "e", 0)
    interp = Interpretation(sorted(dom), {a: sorted(v) for a, v in concepts.items()},
                            {r: sorted(v) for r, v in roles.items()})
    return PointedInterpretation(interp, "e")


def verify_witness(w: WitnessPair, t: TBox, s: Signature, ts: Optional[TypeSet] = None) -> bool:
    ts = compute_types(t) if ts is None else ts
    if not segments_equal(w.i1, w.i2, s, w.depth):
        return False
    if not holds_bisim_quantifier(w.i1, t, s, ts):
        return False
    if holds_bisim_quantifier(w.i2, t, s, ts):
        return False
    i2 = w.i2.interp
    for r in sorted(s.roles):
        for e in i2.successors(w.i2.point, r):
            if not holds_bisim_quantifier(PointedInterpretation(i2, e), t, s, ts):
                return False
    return True


# ---------------------------------------------------------------- deciders

def conservative_extension_witness(t: TBox, tprime: TBox, sig: Optional[Signature] = None):
    """None if t ∪ tprime is conservative over t, else a model of t over sig that is
    not bisimilar to any model of t ∪ tprime."""
    s = signature_of(t) if sig is None else sig
    both = t | tprime
    a = intersect(build_model_apta(t, s), complement(build_bisim_apta(both, s, reduce=True)))
    return is_empty(a)


def decide_conservative_extension(t: TBox, tprime: TBox, sig: Optional[Signature] = None) -> bool:
    return conservative_extension_witness(t, tprime, sig) is None


class StarResult(NamedTuple):
    holds: bool
    witness: Optional[WitnessPair]
    exact: bool


def tbox_size(t: TBox) -> int:
    return sum(size(i.lhs) + size(i.rhs) for i in t.inclusions)


def reaches_threshold(t: TBox, m: int) -> bool:
    """Whether m >= M*M + 1 with M = 2^(2^|t|), without materializing the bound."""
    # M*M = 2^(2^(|t|+1)); m - 1 >= 2^x iff (m - 1) has more than x bits
    return m >= 2 and (m - 1).bit_length() > 2 ** (tbox_size(t) + 1)


def decide_interpolant_nonexistence_at(t: TBox, s: Signature, m: int,
                                       max_counter_bits: int = 12) -> StarResult:
    ts = compute_types(t)
    a = build_existence_apta(t, s, m, max_counter_bits, ts)
    w = is_empty(a)
    exact = reaches_threshold(t, m)
    if w is None:
        return StarResult(False, None, exact)
    pair = decode_two_track(w, s, m)
    if not verify_witness(pair, t, s, ts):
        raise AssertionError("decoded witness pair fails verification")
    return StarResult(True, pair, exact)


def _fresh(base: str, used) -> str:
    name = base
    k = 0
    while name in used:
        k += 1
        name = f"{base}{k}"
    return name


def reduce_ce_to_ui(t: TBox, c: Concept, sig: Optional[Signature] = None) -> Tuple[TBox, Signature]:
    """TBox T0 and signature such that t ∪ {top sub c} is conservative over t iff
    T0 has a uniform interpolant for the signature."""
    base = signature_of(t) if sig is None else sig | signature_of(t)
    full = base | signature_of(TBox([Inclusion(Top, c)]))
    used = full.concepts | full.roles
    a = _fresh("Xa", used)
    r = _fresh("xr", used | {a})
    incl = list(t.inclusions)
    incl.append(Inclusion(Not(c), Name(a)))
    incl.append(Inclusion(Name(a), Exists(r, Name(a))))
    for role in sorted(full.roles):
        incl.append(Inclusion(Exists(role, Name(a)), Name(a)))
    return TBox(incl), Signature(base.concepts, base.roles | {r})

"""Alternating parity tree automata over pointed interpretations.

Runs are evaluated by parity games; emptiness is supported for automata whose
priorities compress to {0, 1}.
"""
from __future__ import annotations

from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from . import games
from .model import Interpretation, PointedInterpretation


class Move(NamedTuple):
    kind: str
    label: Optional[str] = None
    q1: object = None
    q2: object = None

    def successors(self) -> tuple:
        k = self.kind
        if k in ("state", "dia", "box"):
            return (self.q1,)
        if k in ("and", "or"):
            return (self.q1, self.q2)
        return ()

    def __str__(self):
        k = self.kind
        if k == "true":
            return "true"
        if k == "false":
            return "false"
        if k == "atom":
            return self.label
        if k == "natom":
            return "not " + self.label
        if k == "state":
            return str(self.q1)
        if k == "and":
            return f"{self.q1} and {self.q2}"
        if k == "or":
            return f"{self.q1} or {self.q2}"
        if k == "dia":
            return f"<{self.label}> {self.q1}"
        return f"[{self.label}] {self.q1}"


TRUE = Move("true")
FALSE = Move("false")


def Atom(a: str) -> Move:
    return Move("atom", a)


def NegAtom(a: str) -> Move:
    return Move("natom", a)


def State(q) -> Move:
    return Move("state", None, q)


def AndM(q1, q2) -> Move:
    return Move("and", None, q1, q2)


def OrM(q1, q2) -> Move:
    return Move("or", None, q1, q2)


def Dia(r: str, q) -> Move:
    return Move("dia", r, q)


def Box(r: str, q) -> Move:
    return Move("box", r, q)


_DUAL = {"true": "false", "false": "true", "atom": "natom", "natom": "atom",
         "state": "state", "and": "or", "or": "and", "dia": "box", "box": "dia"}


class UndeclaredSymbol(ValueError):
    pass


class UnsupportedPriorities(ValueError):
    def __init__(self, priorities):
        super().__init__(f"emptiness needs priorities within {{0,1}} after compression; got {sorted(priorities)}")
        self.priorities = sorted(priorities)


class APTA:
    def __init__(self, states: Iterable, node_alphabet: Iterable[str], edge_alphabet: Iterable[str],
                 initial, delta: Dict[object, Move], priority: Dict[object, int]):
        self.states = tuple(states)
        self.node_alphabet = frozenset(node_alphabet)
        self.edge_alphabet = frozenset(edge_alphabet)
        self.initial = initial
        self.delta = dict(delta)
        self.priority = dict(priority)
        sset = set(self.states)
        if len(sset) != len(self.states):
            raise ValueError("duplicate states")
        if initial not in sset:
            raise ValueError(f"initial state {initial!r} is not a state")
        for q in self.states:
            if q not in self.delta:
                raise ValueError(f"no move for state {q!r}")
            if q not in self.priority:
                raise ValueError(f"no priority for state {q!r}")
            m = self.delta[q]
            for x in m.successors():
                if x not in sset:
                    raise ValueError(f"move of {q!r} refers to unknown state {x!r}")
            if m.kind in ("atom", "natom") and m.label not in self.node_alphabet:
                raise UndeclaredSymbol(f"concept name {m.label!r} not in node alphabet")
            if m.kind in ("dia", "box") and m.label not in self.edge_alphabet:
                raise UndeclaredSymbol(f"role name {m.label!r} not in edge alphabet")

    def __len__(self):
        return len(self.states)

    def dump(self) -> str:
        return "".join(f"{q}: {self.priority[q]} / {self.delta[q]}\n" for q in self.states)

    def __repr__(self):
        return f"APTA({len(self.states)} states, initial={self.initial!r})"


# ---------------------------------------------------------------- transition formulas
# A formula is a tuple: ("true",) ("false",) ("atom", A) ("natom", A) ("q", state)
# ("and", (f, ...)) ("or", (f, ...)) ("dia", r, f) ("box", r, f).

F_TRUE = ("true",)
F_FALSE = ("false",)


def f_atom(a):
    return ("atom", a)


def f_natom(a):
    return ("natom", a)


def f_state(q):
    return ("q", q)


def f_dia(r, f):
    return ("dia", r, f)


def f_box(r, f):
    return ("box", r, f)


def f_and(*fs):
    items = []
    for f in fs:
        if f == F_FALSE:
            return F_FALSE
        if f == F_TRUE:
            continue
        if f[0] == "and":
            items.extend(f[1])
        else:
            items.append(f)
    if not items:
        return F_TRUE
    if len(items) == 1:
        return items[0]
    return ("and", tuple(items))


def f_or(*fs):
    items = []
    for f in fs:
        if f == F_TRUE:
            return F_TRUE
        if f == F_FALSE:
            continue
        if f[0] == "or":
            items.extend(f[1])
        else:
            items.append(f)
    if not items:
        return F_FALSE
    if len(items) == 1:
        return items[0]
    return ("or", tuple(items))


def from_formulas(formulas: Dict[object, tuple], node_alphabet, edge_alphabet, initial,
                  priority: Union[int, Dict[object, int]] = 0, order: Iterable = None,
                  share: bool = False) -> APTA:
    """Compile transition formulas to atomic moves.

    Each compound subformula gets a fresh intermediate state with the owner's
    priority; n-ary conjunctions and disjunctions become balanced binary trees.
    With share=True, equal subformulas under equal priority reuse one state.
    """
    node_alphabet = frozenset(node_alphabet)
    edge_alphabet = frozenset(edge_alphabet)
    owners = list(order) if order is not None else list(formulas)
    prio_of = (lambda q: priority) if isinstance(priority, int) else (lambda q: priority[q])
    delta: Dict[object, Move] = {}
    prio: Dict[object, int] = {}
    states: List = list(owners)
    taken = set(owners)
    counter = {}
    shared: Dict[tuple, object] = {}

    def fresh(owner):
        k = counter.get(owner, 0)
        while True:
            k += 1
            name = f"{owner}.{k}"
            if name not in taken:
                break
        counter[owner] = k
        taken.add(name)
        states.append(name)
        return name

    def build(f, owner, target=None):
        kind = f[0]
        if kind in ("and", "or") and len(f[1]) == 1:
            return build(f[1][0], owner, target)
        if kind == "q":
            if f[1] not in formulas:
                raise UndeclaredSymbol(f"state {f[1]!r} has no transition formula")
            if target is None:
                return f[1]
            delta[target] = State(f[1])
            prio[target] = prio_of(owner)
            return target
        if target is None and share:
            key = (f, prio_of(owner))
            got = shared.get(key)
            if got is not None:
                return got
        q = fresh(owner) if target is None else target
        if target is None and share:
            shared[key] = q
        prio[q] = prio_of(owner)
        if kind == "true":
            delta[q] = TRUE
        elif kind == "false":
            delta[q] = FALSE
        elif kind in ("atom", "natom"):
            if f[1] not in node_alphabet:
                raise UndeclaredSymbol(f"concept name {f[1]!r} not in node alphabet")
            delta[q] = Atom(f[1]) if kind == "atom" else NegAtom(f[1])
        elif kind in ("dia", "box"):
            if f[1] not in edge_alphabet:
                raise UndeclaredSymbol(f"role name {f[1]!r} not in edge alphabet")
            sub = build(f[2], owner)
            delta[q] = Dia(f[1], sub) if kind == "dia" else Box(f[1], sub)
        else:
            items = f[1]
            half = (len(items) + 1) // 2
            left = items[0] if half == 1 else (kind, items[:half])
            right = items[half] if len(items) - half == 1 else (kind, items[half:])
            a = build(left, owner)
            b = build(right, owner)
            delta[q] = AndM(a, b) if kind == "and" else OrM(a, b)
        return q

    for q in owners:
        build(formulas[q], q, target=q)
    return APTA(states, node_alphabet, edge_alphabet, initial, delta, prio)


# ---------------------------------------------------------------- boolean operations

def complement(a: APTA) -> APTA:
    delta = {}
    for q, m in a.delta.items():
        delta[q] = Move(_DUAL[m.kind], m.label, m.q1, m.q2)
    prio = {q: p + 1 for q, p in a.priority.items()}
    return APTA(a.states, a.node_alphabet, a.edge_alphabet, a.initial, delta, prio)


def rename(a: APTA, prefix: str) -> APTA:
    f = lambda q: f"{prefix}{q}"
    delta = {f(q): Move(m.kind, m.label, None if m.q1 is None else f(m.q1),
                        None if m.q2 is None else f(m.q2)) for q, m in a.delta.items()}
    return APTA([f(q) for q in a.states], a.node_alphabet, a.edge_alphabet, f(a.initial), delta,
                {f(q): p for q, p in a.priority.items()})


def intersect(a: APTA, b: APTA, init_name: str = "q0") -> APTA:
    if set(a.states) & set(b.states):
        a, b = rename(a, "L."), rename(b, "R.")
    taken = set(a.states) | set(b.states)
    q0 = init_name
    while q0 in taken:
        q0 = q0 + "'"
    delta = {q0: AndM(a.initial, b.initial)}
    delta.update(a.delta)
    delta.update(b.delta)
    prio = {q0: 0}
    prio.update(a.priority)
    prio.update(b.priority)
    return APTA((q0,) + a.states + b.states, a.node_alphabet | b.node_alphabet,
                a.edge_alphabet | b.edge_alphabet, q0, delta, prio)


def intersect_all(autos: List[APTA], names: List[str], init_name: str = "q0") -> APTA:
    """Intersection of several automata via a balanced conjunction of their initial states."""
    autos = [rename(x, n) for x, n in zip(autos, names)]
    states, delta, prio = [], {}, {}
    for x in autos:
        if set(x.states) & set(states):
            raise ValueError("component names must give disjoint state sets")
        states.extend(x.states)
        delta.update(x.delta)
        prio.update(x.priority)
    head = []
    counter = [0]

    def tree(items, target=None):
        if len(items) == 1 and target is None:
            return items[0]
        if target is None:
            counter[0] += 1
            target = f"{init_name}.{counter[0]}"
        head.append(target)
        prio[target] = 0
        if len(items) == 1:
            delta[target] = State(items[0])
            return target
        half = (len(items) + 1) // 2
        delta[target] = AndM(tree(items[:half]), tree(items[half:]))
        return target

    tree([x.initial for x in autos], init_name)
    node = frozenset().union(*[x.node_alphabet for x in autos])
    edge = frozenset().union(*[x.edge_alphabet for x in autos])
    return APTA(head + states, node, edge, init_name, delta, prio)


# ---------------------------------------------------------------- membership

_WIN, _LOSE = ("#win",), ("#lose",)


def acceptance_game(a: APTA, p: PointedInterpretation):
    i = p.interp
    g = games.ParityGame()
    g.add(_WIN, 0, 0)
    g.add(_LOSE, 0, 1)
    g.edge(_WIN, _WIN)
    g.edge(_LOSE, _LOSE)
    start = (a.initial, p.point)
    todo = [start]
    seen = {start}
    while todo:
        pos = todo.pop()
        q, d = pos
        m = a.delta[q]
        k = m.kind
        owner = 1 if k in ("and", "box") else 0
        g.add(pos, owner, a.priority[q])
        if k == "true":
            nxt = [_WIN]
        elif k == "false":
            nxt = [_LOSE]
        elif k == "atom":
            nxt = [_WIN if d in i.ext(m.label) else _LOSE]
        elif k == "natom":
            nxt = [_LOSE if d in i.ext(m.label) else _WIN]
        elif k == "state":
            nxt = [(m.q1, d)]
        elif k in ("and", "or"):
            nxt = [(m.q1, d), (m.q2, d)]
        else:
            succ = i.successors(d, m.label)
            if succ:
                nxt = [(m.q1, e) for e in succ]
            else:
                nxt = [_LOSE] if k == "dia" else [_WIN]
        for v in nxt:
            if v not in seen and v is not _WIN and v is not _LOSE:
                seen.add(v)
                todo.append(v)
        g.succ.setdefault(pos, [])
        for v in nxt:
            g.succ[pos].append(v)
            g.pred.setdefault(v, []).append(pos)
    return g, start


def accepts(a: APTA, p: PointedInterpretation) -> bool:
    g, start = acceptance_game(a, p)
    w0, _ = games.solve(g)
    return start in w0


# ---------------------------------------------------------------- emptiness

def compress_priorities(prio: Dict[object, int]) -> Dict[object, int]:
    """Map priorities to the smallest values preserving order and parity."""
    values = sorted(set(prio.values()))
    if not values:
        return {}
    mapping = {}
    cur = values[0] % 2
    mapping[values[0]] = cur
    for prev, v in zip(values, values[1:]):
        if v % 2 != prev % 2:
            cur += 1
        mapping[v] = cur
    return {q: mapping[p] for q, p in prio.items()}


def _sccs(nodes: List[int], succ: List[List[int]]) -> List[int]:
    """Tarjan, iterative; returns component id per node."""
    n = len(nodes)
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, it = work.pop()
            if it == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            for j in range(it, len(succ[v])):
                w = succ[v][j]
                if index[w] == -1:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comp


def is_weak(a: APTA, prio: Dict[object, int] = None) -> bool:
    """Every strongly connected part of the state graph carries a single priority."""
    prio = a.priority if prio is None else prio
    ids = {q: k for k, q in enumerate(a.states)}
    succ = [[ids[x] for x in a.delta[q].successors()] for q in a.states]
    comp = _sccs(list(range(len(a.states))), succ)
    seen = {}
    for q, c in zip(a.states, comp):
        p = prio[q]
        if seen.setdefault(c, p) != p:
            return False
    return True


def to_weak(a: APTA, prio: Dict[object, int]) -> Tuple[APTA, Dict[object, int]]:
    """Ranking construction turning a co-Buechi automaton into a weak one.

    State (q, i) promises that every run path from here stays within rank i;
    odd ranks forbid priority-1 states, and a path must settle in an odd rank.
    """
    n = len(a.states)
    top = 2 * n
    delta, newprio, states = {}, {}, []

    def name(q, i):
        return f"{q}#{i}"

    def choose(q, i, owner_prio):
        # disjunction over all lower-or-equal ranks of q
        opts = [name(q, j) for j in range(i + 1)]
        if len(opts) == 1:
            return opts[0]
        prev = opts[0]
        for j in range(1, len(opts)):
            c = f"{q}<={j}@{i}"
            if c not in delta:
                delta[c] = OrM(prev, opts[j])
                newprio[c] = owner_prio
                states.append(c)
            prev = c
        return prev

    for i in range(top + 1):
        for q in a.states:
            states.append(name(q, i))
    for i in range(top + 1):
        rp = 0 if i % 2 == 1 else 1
        for q in a.states:
            nq = name(q, i)
            newprio[nq] = rp
            m = a.delta[q]
            if prio[q] == 1 and i % 2 == 1:
                delta[nq] = FALSE
                continue
            if m.kind in ("state", "dia", "box"):
                delta[nq] = Move(m.kind, m.label, choose(m.q1, i, rp))
            elif m.kind in ("and", "or"):
                delta[nq] = Move(m.kind, None, choose(m.q1, i, rp), choose(m.q2, i, rp))
            else:
                delta[nq] = m
    init = name(a.initial, top)
    # put the initial state first for readable dumps
    states.remove(init)
    states.insert(0, init)
    out = APTA(states, a.node_alphabet, a.edge_alphabet, init, delta, newprio)
    return out, newprio


def unfold_eps_cycles(a: APTA, prio: Dict[object, int]) -> Tuple[APTA, Dict[object, int]]:
    """Cut the epsilon cycles of a weak automaton.

    Inside one epsilon component of k states, a play that stays for k moves
    has repeated a state, and since the opponent of a positional winner could
    repeat that loop forever, the winner is fixed by the component's priority.
    So (q, j) counts moves spent in the component and turns into true or false
    once j reaches k. Edges leaving the component, and modal edges, reset j.
    """
    ids = {q: k for k, q in enumerate(a.states)}
    eps = [[ids[x] for x in a.delta[q].successors()] if a.delta[q].kind in ("state", "and", "or") else []
           for q in a.states]
    comp = _sccs(list(range(len(eps))), eps)
    members: Dict[int, list] = {}
    for q, c in zip(a.states, comp):
        members.setdefault(c, []).append(q)
    cyclic = {c for c, qs in members.items() if len(qs) > 1 or ids[qs[0]] in eps[ids[qs[0]]]}
    if not cyclic:
        return a, prio
    comp_of = {q: comp[ids[q]] for q in a.states}
    delta, newprio, states = {}, {}, []

    def name(q, j):
        return q if j == 0 else f"{q}~{j}"

    def target(q, x, j):
        # the state reached from (q, j) through an epsilon edge to x
        c = comp_of[q]
        if c not in cyclic or comp_of[x] != c:
            return x
        if j + 1 < len(members[c]):
            return need(x, j + 1)
        v = f"{'true' if prio[q] == 0 else 'false'}~{c}"
        if v not in delta:
            delta[v] = TRUE if prio[q] == 0 else FALSE
            newprio[v] = prio[q]
            states.append(v)
        return v

    def need(q, j):
        nq = name(q, j)
        if nq not in delta:
            m = a.delta[q]
            newprio[nq] = prio[q]
            states.append(nq)
            delta[nq] = m  # marks nq as in progress
            if m.kind == "state":
                delta[nq] = State(target(q, m.q1, j))
            elif m.kind in ("and", "or"):
                delta[nq] = Move(m.kind, None, target(q, m.q1, j), target(q, m.q2, j))
        return nq

    for q in a.states:
        need(q, 0)
    out = APTA(states, a.node_alphabet, a.edge_alphabet, a.initial, delta, newprio)
    return out, newprio


class _Macro(NamedTuple):
    entry: frozenset
    owing: frozenset


class _Resolution(NamedTuple):
    positive: frozenset
    children: tuple  # of (role, _Macro)


class EmptinessChecker:
    """Breakpoint construction on the fly plus a Buechi game over macro-states.

    A macro-state is the set of automaton states a tree node has to satisfy,
    together with the subset still owing a visit to a priority-0 state since
    the last breakpoint. A resolution fixes the disjunctive choices at one node;
    it yields one child per diamond, each child also carrying every box of the
    same role.
    """

    def __init__(self, a: APTA, max_macros: int = 200000):
        prio = compress_priorities(a.priority)
        bad = {p for p in prio.values() if p > 1}
        if bad:
            raise UnsupportedPriorities(set(a.priority.values()))
        if not is_weak(a, prio):
            a, prio = to_weak(a, prio)
        a, prio = unfold_eps_cycles(a, prio)
        self.auto = a
        self.ids = {q: k for k, q in enumerate(a.states)}
        self.names = list(a.states)
        self.moves = [a.delta[q] for q in a.states]
        self.kind = [m.kind for m in self.moves]
        self.succ = [tuple(self.ids[x] for x in m.successors()) for m in self.moves]
        self.odd = [prio[q] == 1 for q in a.states]
        self.max_macros = max_macros
        self.res_cache: Dict[_Macro, List[_Resolution]] = {}
        self.alpha = sorted({m.label for m in self.moves if m.kind in ("atom", "natom")})
        self.alpha_bit = {a: 1 << k for k, a in enumerate(self.alpha)}
        self.dnf_cache: Dict[tuple, List[tuple]] = {}
        self.support_cache: Dict[int, int] = {}
        self.possible_cache: Dict[tuple, bool] = {}
        self.prod_cache: Dict[frozenset, list] = {}
        self.macro_cache: Dict[tuple, _Macro] = {}
        self.children_cache: Dict[tuple, tuple] = {}
        self.shape_cache: Dict[tuple, tuple] = {}
        self.mlabel = [m.label for m in self.moves]
        self.isbox = [k == "box" for k in self.kind]
        self.tbit = [1 << sc[0] if k in ("dia", "box") else 0 for sc, k in zip(self.succ, self.kind)]
        self.toddbit = [b if b and self.odd[sc[0]] else 0 for b, sc in zip(self.tbit, self.succ)]

    # -- one node ---------------------------------------------------------
    def resolutions(self, macro: _Macro) -> List[_Resolution]:
        got = self.res_cache.get(macro)
        if got is not None:
            return got
        raw = self._resolutions_dnf(macro)
        res = []
        for pos, kids in _minimal_resolutions(raw, self.shape_cache):
            label = frozenset(self.alpha[k] for k in _bits(pos)) if isinstance(pos, int) else pos
            children = tuple(sorted(((r, self._macro(e, o)) for r, e, o in kids), key=_child_key))
            res.append(_Resolution(label, children))
        self.res_cache[macro] = res
        return res

    def _macro(self, entry: int, owing: int) -> _Macro:
        key = (entry, owing)
        got = self.macro_cache.get(key)
        if got is None:
            got = self.macro_cache[key] = _Macro(frozenset(_bits(entry)), frozenset(_bits(owing)))
        return got

    def _support(self, q: int) -> int:
        """Letters tested by the moves reachable from q without leaving the node."""
        got = self.support_cache.get(q)
        if got is not None:
            return got
        k = self.kind[q]
        if k in ("atom", "natom"):
            out = self.alpha_bit[self.moves[q].label]
        elif k in ("state", "and", "or"):
            out = 0
            for x in self.succ[q]:
                out |= self._support(x)
        else:
            out = 0
        self.support_cache[q] = out
        return out

    def _possible(self, q: int, pos: int, neg: int) -> bool:
        """Whether q can still hold at a node whose label agrees with pos/neg so far."""
        sup = self._support(q)
        key = (q, pos & sup, neg & sup)
        got = self.possible_cache.get(key)
        if got is not None:
            return got
        k = self.kind[q]
        if k == "false":
            out = False
        elif k == "atom":
            out = not neg & self.alpha_bit[self.moves[q].label]
        elif k == "natom":
            out = not pos & self.alpha_bit[self.moves[q].label]
        elif k == "state":
            out = self._possible(self.succ[q][0], pos, neg)
        elif k == "and":
            out = all(self._possible(x, pos, neg) for x in self.succ[q])
        elif k == "or":
            out = any(self._possible(x, pos, neg) for x in self.succ[q])
        else:
            out = True
        self.possible_cache[key] = out
        return out

    def modal_dnf(self, q: int, owing: bool, label: int) -> List[tuple]:
        """Minimal modal choices (modal, owing-modal) making q true under a full label."""
        sup = self._support(q)
        key = (q, owing, label & sup)
        got = self.dnf_cache.get(key)
        if got is not None:
            return got
        k = self.kind[q]
        if k == "true":
            out = [(0, 0)]
        elif k == "false":
            out = []
        elif k == "atom":
            out = [(0, 0)] if label & self.alpha_bit[self.moves[q].label] else []
        elif k == "natom":
            out = [] if label & self.alpha_bit[self.moves[q].label] else [(0, 0)]
        elif k in ("dia", "box"):
            out = [(1 << q, (1 << q) if owing else 0)]
        elif k == "state":
            x = self.succ[q][0]
            out = self.modal_dnf(x, owing and self.odd[x], label)
        else:
            x, y = self.succ[q]
            fx = self.modal_dnf(x, owing and self.odd[x], label)
            fy = self.modal_dnf(y, owing and self.odd[y], label)
            if k == "or":
                out = _antichain2(set(fx) | set(fy))
            else:
                out = _antichain2({(a[0] | b[0], a[1] | b[1]) for a in fx for b in fy})
        self.dnf_cache[key] = out
        return out

    def _resolutions_dnf(self, macro: _Macro) -> List[_Resolution]:
        odd = self.odd
        owing0 = macro.owing if macro.owing else frozenset(q for q in macro.entry if odd[q])
        entry = sorted(macro.entry)
        used = 0
        for q in entry:
            used |= self._support(q)
        free = [1 << k for k in range(len(self.alpha)) if (used >> k) & 1]
        out: Dict[tuple, int] = {}

        # fix the node label one letter at a time, dropping dead branches early;
        # under a full label only the modal part of a choice matters
        def split(i, pos, neg):
            if not all(self._possible(q, pos, neg) for q in entry):
                return
            if i == len(free):
                self._emit(entry, owing0, pos, out)
                return
            b = free[i]
            split(i + 1, pos | b, neg)
            split(i + 1, pos, neg | b)

        split(0, 0, 0)
        res = []
        cache = self.children_cache
        for t, pos in out.items():
            kids = cache.get(t)
            if kids is None:
                kids = cache[t] = self._children(*t)
            res.append((pos, kids))
        return res

    def _emit(self, entry, owing0, pos, out):
        factors = [tuple(self.modal_dnf(q, q in owing0, pos)) for q in entry]
        key = frozenset(factors)
        terms = self.prod_cache.get(key)
        if terms is None:
            terms = [(0, 0)]
            seen = 0
            for f in sorted(key, key=len):
                fbits = 0
                for t in f:
                    fbits |= t[0]
                prod = {(a[0] | b[0], a[1] | b[1]) for a in terms for b in f}
                # a product of antichains over disjoint states is an antichain already
                terms = list(prod) if not fbits & seen else _antichain2(prod)
                seen |= fbits
                if not terms:
                    break
            self.prod_cache[key] = terms
        for t in terms:
            out.setdefault(t, pos)

    def _children(self, modal: int, ow: int) -> tuple:
        """Children (role, entry mask, owing mask): one per diamond, each with
        the targets of all boxes of the same role."""
        isbox, label, tbit, toddbit = self.isbox, self.mlabel, self.tbit, self.toddbit
        box_e: Dict[str, int] = {}
        box_o: Dict[str, int] = {}
        dias = []
        x = modal
        while x:
            low = x & -x
            x ^= low
            q = low.bit_length() - 1
            if isbox[q]:
                r = label[q]
                box_e[r] = box_e.get(r, 0) | tbit[q]
                if ow & low:
                    box_o[r] = box_o.get(r, 0) | toddbit[q]
            else:
                dias.append((q, low))
        kids: Dict[tuple, int] = {}
        for q, low in dias:
            r = label[q]
            e = box_e.get(r, 0) | tbit[q]
            o = box_o.get(r, 0)
            if ow & low:
                o |= toddbit[q]
            kids[r, e] = kids.get((r, e), 0) | o
        return tuple((r, e, o) for (r, e), o in kids.items())

    # -- the game ---------------------------------------------------------
    def explore(self, init: _Macro):
        index = {init: 0}
        macros = [init]
        res_of: List[List[List[int]]] = []
        labels: List[List[_Resolution]] = []
        k = 0
        while k < len(macros):
            if len(macros) > self.max_macros:
                raise MemoryError(f"more than {self.max_macros} macro-states")
            m = macros[k]
            rs = self.resolutions(m)
            entry = []
            for r in rs:
                ids = []
                for _, child in r.children:
                    j = index.get(child)
                    if j is None:
                        j = len(macros)
                        index[child] = j
                        macros.append(child)
                    ids.append(j)
                entry.append(ids)
            res_of.append(entry)
            labels.append(rs)
            k += 1
        return macros, res_of, labels

    def solve(self):
        init = _Macro(frozenset([self.ids[self.auto.initial]]), frozenset())
        macros, res_of, labels = self.explore(init)
        n = len(macros)
        acc = [not m.owing for m in macros]
        win = [True] * n
        while True:
            # least fixpoint: reach an accepting macro-state that can stay in `win`
            rank = [-1] * n
            choice = [-1] * n
            for v in range(n):
                if acc[v] and win[v]:
                    for j, kids in enumerate(res_of[v]):
                        if all(win[c] for c in kids):
                            rank[v] = 0
                            choice[v] = j
                            break
            level = 0
            changed = True
            while changed:
                changed = False
                level += 1
                newly = []
                for v in range(n):
                    if rank[v] != -1 or not win[v]:
                        continue
                    for j, kids in enumerate(res_of[v]):
                        if all(rank[c] != -1 for c in kids):
                            newly.append((v, j))
                            break
                for v, j in newly:
                    rank[v] = level
                    choice[v] = j
                    changed = True
            new_win = [r != -1 for r in rank]
            if new_win == win:
                break
            win = new_win
        self.macros, self.res_of, self.labels = macros, res_of, labels
        self.win, self.choice = win, choice
        return win[0]

    def witness(self) -> PointedInterpretation:
        res_of, labels, choice = self.res_of, self.labels, self.choice
        order = {0: "n0"}
        todo = [0]
        concepts: Dict[str, list] = {}
        roles: Dict[str, list] = {}
        while todo:
            v = todo.pop()
            r = labels[v][choice[v]]
            for a in sorted(r.positive):
                concepts.setdefault(a, []).append(order[v])
            for (role, _), c in zip(r.children, res_of[v][choice[v]]):
                if c not in order:
                    order[c] = f"n{len(order)}"
                    todo.append(c)
                roles.setdefault(role, []).append((order[v], order[c]))
        dom = sorted(order.values(), key=lambda s: int(s[1:]))
        return PointedInterpretation(Interpretation(dom, concepts, roles), "n0")


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _antichain2(terms) -> List[tuple]:
    """Pairs of bitmasks not componentwise above another pair."""
    terms = sorted(terms, key=lambda t: bin(t[0]).count("1") * 2 + bin(t[1]).count("1"))
    if len(terms) > 64:
        return _antichain_np(terms)
    kept: List[tuple] = []
    for m, o in terms:
        for k in kept:
            if k[0] & ~m == 0 and k[1] & ~o == 0:
                break
        else:
            kept.append((m, o))
    return kept


def _antichain_np(terms: List[tuple]) -> List[tuple]:
    # same as above on packed words; terms are already sorted by size
    width = max(max(m.bit_length(), o.bit_length()) for m, o in terms)
    nbytes = max(8, (width + 63) // 64 * 8)
    rows = np.empty((len(terms), 2 * nbytes // 8), dtype=np.uint64)
    for i, (m, o) in enumerate(terms):
        rows[i] = np.frombuffer(m.to_bytes(nbytes, "little") + o.to_bytes(nbytes, "little"),
                                dtype=np.uint64)
    kept_rows = np.empty_like(rows)
    kept = []
    n = 0
    for i, t in enumerate(terms):
        row = rows[i]
        if n and ((kept_rows[:n] & ~row) == 0).all(axis=1).any():
            continue
        kept_rows[n] = row
        n += 1
        kept.append(t)
    return kept


def _minimal_resolutions(res: List[tuple], cache: Optional[dict] = None) -> List[tuple]:
    """Drop resolutions that are no easier than another one.

    Resolutions are (label, children) with children (role, entry mask, owing
    mask). Whether a child can be completed depends on its entry and owing
    sets only, not on the edge leading to it, so one resolution covers another
    when each of its children has both sets included in those of some child of
    the other.
    """
    cache = {} if cache is None else cache
    items = {}
    for label, kids in res:
        got = cache.get(kids)
        if got is None:
            got = cache[kids] = _shape(kids)
        if got[2] not in items:
            items[got[2]] = got + (label, kids)
    if len(items) < 2:
        return [x[3:] for x in items.values()]
    kept = []
    for count, union, shape, label, kids in sorted(items.values(), key=lambda x: x[0]):
        for kunion, kshape, _r in kept:
            if kunion & ~union:
                continue
            for e, o in kshape:
                for e2, o2 in shape:
                    if not (e & ~e2 or o & ~o2):
                        break
                else:
                    break
            else:
                break
        else:
            # only an item with the same union can be covered by a later one
            kept = [k for k in kept if k[0] != union or not _covers(shape, k[1])]
            kept.append((union, shape, (label, kids)))
    return [x[2] for x in kept]


def _shape(kids) -> tuple:
    """(size, union, maximal (entry, owing) pairs) of a child tuple."""
    pairs = sorted({(e, o) for _, e, o in kids}, key=lambda k: -bin(k[0]).count("1"))
    big = []
    for k in pairs:
        if not any(k[0] & ~j[0] == 0 and k[1] & ~j[1] == 0 for j in big):
            big.append(k)
    union = 0
    for e, _o in big:
        union |= e
    return bin(union).count("1"), union, frozenset(big)


def _covers(easy, hard) -> bool:
    return all(any(not (e & ~e2 or o & ~o2) for e2, o2 in hard) for e, o in easy)


def _mask(states) -> int:
    out = 0
    for q in states:
        out |= 1 << q
    return out


def _child_key(item):
    r, m = item
    return (r, sorted(m.entry), sorted(m.owing))


def is_empty(a: APTA, max_macros: int = 200000) -> Optional[PointedInterpretation]:
    """None if the language is empty, otherwise an accepted finite pointed interpretation."""
    checker = EmptinessChecker(a, max_macros)
    if not checker.solve():
        return None
    w = checker.witness()
    if not accepts(a, w):
        raise AssertionError("emptiness witness rejected by the membership game")
    return w

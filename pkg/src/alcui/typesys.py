"""Types over a closure set, type elimination, satisfiability and small models."""
from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from . import _kernels
from .model import Interpretation, PointedInterpretation
from .syntax import (
    And, Concept, Exists, Inclusion, Not, TBox, Top,
    closure, internalize, negate, nnf, render,
)

# rows of the candidate type table; beyond this the enumeration is refused
MAX_TYPE_ROWS = 1 << 20


class TypeSpaceTooLarge(RuntimeError):
    pass


def core(c: Concept) -> Concept:
    """Rewrite into top/names/not/and/exists only (or, bot, forall eliminated)."""
    k = c.kind
    if k in ("top", "name"):
        return c
    if k == "bot":
        return Not(Top)
    if k == "not":
        return negate(core(c.arg))
    if k == "and":
        return And(core(c.left), core(c.right))
    if k == "or":
        return negate(And(negate(core(c.left)), negate(core(c.right))))
    if k == "exists":
        return Exists(c.role, core(c.arg))
    return negate(Exists(c.role, negate(core(c.arg))))


class ClosureIndex:
    """Positive core concepts of a closure, children before parents."""

    def __init__(self, roots: Iterable[Concept]):
        pos = set()
        for root in roots:
            stack = [core(root)]
            while stack:
                x = stack.pop()
                if x.kind == "not":
                    x = x.arg
                if x in pos:
                    continue
                pos.add(x)
                stack.extend(x.children())
        pos.add(Top)
        order = sorted(pos, key=lambda x: (_height(x), render(x)))
        self.concepts: List[Concept] = order
        self.index: Dict[Concept, int] = {c: i for i, c in enumerate(order)}
        self.atoms = [i for i, c in enumerate(order) if c.kind in ("name", "exists")]
        self.exists = [i for i, c in enumerate(order) if c.kind == "exists"]
        self.roles = sorted({order[i].role for i in self.exists})

    def literal(self, c: Concept) -> Tuple[int, bool]:
        x = core(c)
        if x.kind == "not":
            return self.index[x.arg], False
        return self.index[x], True

    def __len__(self):
        return len(self.concepts)


_heights: Dict[Concept, int] = {}


def _height(c: Concept) -> int:
    h = _heights.get(c)
    if h is None:
        kids = c.children()
        h = 1 + max((_height(k) for k in kids), default=0)
        _heights[c] = h
    return h


def _eval_rows(idx: ClosureIndex, rows: np.ndarray) -> np.ndarray:
    """Fill determined columns (top, and) of boolean rows in place."""
    for i, c in enumerate(idx.concepts):
        if c.kind == "top":
            rows[:, i] = True
        elif c.kind == "and":
            l, lp = idx.literal(c.left)
            r, rp = idx.literal(c.right)
            a = rows[:, l] if lp else ~rows[:, l]
            b = rows[:, r] if rp else ~rows[:, r]
            rows[:, i] = a & b
    return rows


def _enumerate(idx: ClosureIndex, required: List[Tuple[int, bool]]) -> np.ndarray:
    """All propositionally consistent rows satisfying the required literals.

    Atoms are assigned one at a time; rows on which a required literal is
    already decided false are pruned (three-valued evaluation).
    """
    p = len(idx)
    atoms = idx.atoms
    # three-valued: val (bool) and known (bool)
    val = np.zeros((1, p), dtype=bool)
    known = np.zeros((1, p), dtype=bool)
    top = idx.index[Top]
    val[:, top] = True
    known[:, top] = True
    lits = [(idx.concepts[i], i) for i in range(p)]
    for a in atoms:
        n = val.shape[0]
        val = np.concatenate([val, val])
        known = np.concatenate([known, known])
        val[n:, a] = True
        known[:, a] = True
        # propagate and-nodes
        for c, i in lits:
            if c.kind != "and":
                continue
            l, lp = idx.literal(c.left)
            r, rp = idx.literal(c.right)
            lv = val[:, l] if lp else ~val[:, l]
            rv = val[:, r] if rp else ~val[:, r]
            lk, rk = known[:, l], known[:, r]
            false_ = (lk & ~lv) | (rk & ~rv)
            true_ = lk & lv & rk & rv
            known[:, i] = false_ | true_
            val[:, i] = true_
        keep = np.ones(val.shape[0], dtype=bool)
        for i, pol in required:
            v = val[:, i] if pol else ~val[:, i]
            keep &= ~known[:, i] | v
        val = val[keep]
        known = known[keep]
        if val.shape[0] > MAX_TYPE_ROWS:
            raise TypeSpaceTooLarge(f"more than {MAX_TYPE_ROWS} candidate types over {len(atoms)} atoms")
    return val


class TypeSet:
    """Types surviving elimination, as packed bitsets over a closure index."""

    def __init__(self, tbox: TBox, idx: ClosureIndex, rows: np.ndarray, ct: Concept):
        self.tbox = tbox
        self.index = idx
        self.ct = ct
        self.rows = rows
        self.words = _kernels.pack_rows(rows) if len(rows) else np.zeros((0, 1), np.uint64)
        self.bits = [int(sum(1 << j for j in np.flatnonzero(row))) for row in rows]
        self._succ: Dict[Tuple[int, str], List[int]] = {}
        self._demand = {}
        for r in idx.roles:
            self._demand[r] = [self._demand_of(b, r) for b in self.bits]

    def _demand_of(self, bits: int, role: str) -> int:
        idx = self.index
        out = 0
        for e in idx.exists:
            c = idx.concepts[e]
            if c.role != role:
                continue
            j, pol = idx.literal(c.arg)
            if ((bits >> j) & 1) == pol:
                out |= 1 << e
        return out

    def __len__(self):
        return len(self.bits)

    @property
    def types(self) -> List[int]:
        return list(range(len(self.bits)))

    def holds(self, t: int, c: Concept) -> bool:
        j, pol = self.index.literal(c)
        return ((self.bits[t] >> j) & 1) == pol

    def members(self, t: int) -> List[Concept]:
        b = self.bits[t]
        out = []
        for i, c in enumerate(self.index.concepts):
            out.append(c if (b >> i) & 1 else negate(c))
        return out

    def reaches(self, t: int, role: str, u: int) -> bool:
        """t ~>_role u: every existential over role whose body holds in u is in t."""
        dem = self._demand.get(role)
        if dem is None:
            return True
        return dem[u] & ~self.bits[t] == 0

    def succ(self, t: int, role: str) -> List[int]:
        key = (t, role)
        got = self._succ.get(key)
        if got is None:
            got = [u for u in range(len(self.bits)) if self.reaches(t, role, u)]
            self._succ[key] = got
        return got

    def demands(self, t: int):
        """Existentials (role, body concept) contained in type t."""
        idx = self.index
        out = []
        for e in idx.exists:
            if (self.bits[t] >> e) & 1:
                c = idx.concepts[e]
                out.append((c.role, c.arg))
        return out

    def witnesses(self, t: int, role: str, body: Concept) -> List[int]:
        return [u for u in self.succ(t, role) if self.holds(u, body)]

    def render_type(self, t: int, pool: Optional[Iterable[Concept]] = None) -> str:
        pool = closure(self.tbox, with_top=True) if pool is None else pool
        mem = sorted(render(c) for c in pool if self.holds(t, c))
        return ", ".join(mem)


def compute_types(t: TBox, extra: Iterable[Concept] = ()) -> TypeSet:
    extra = list(extra)
    ct = nnf(internalize(t))
    idx = ClosureIndex(list(closure(t, extra, with_top=True)) + [ct])
    required = [idx.literal(ct)]
    rows = _enumerate(idx, required)
    rows = _eval_rows(idx, rows) if len(rows) else rows
    # keep only rows that really contain C_T (enumeration pruned undecided ones lazily)
    j, pol = idx.literal(ct)
    if len(rows):
        rows = rows[rows[:, j] == pol]
    alive = _eliminate(idx, rows)
    rows = rows[alive]
    # stable order: by bit pattern
    if len(rows):
        keys = [tuple(np.flatnonzero(r)) for r in rows]
        order = sorted(range(len(rows)), key=lambda i: (len(keys[i]), keys[i]))
        rows = rows[order]
    return TypeSet(t, idx, rows, ct)


def _eliminate(idx: ClosureIndex, rows: np.ndarray) -> np.ndarray:
    n = len(rows)
    if n == 0:
        return np.zeros(0, dtype=bool)
    tw = _kernels.pack_rows(rows)
    roles = idx.roles
    role_no = {r: k for k, r in enumerate(roles)}
    ex_role, ex_idx, ex_body, ex_pol = [], [], [], []
    dem_bits = np.zeros((max(1, len(roles)), n, len(idx)), dtype=bool)
    for e in idx.exists:
        c = idx.concepts[e]
        j, pol = idx.literal(c.arg)
        ex_role.append(role_no[c.role])
        ex_idx.append(e)
        ex_body.append(j)
        ex_pol.append(pol)
        holds = rows[:, j] if pol else ~rows[:, j]
        dem_bits[role_no[c.role], :, e] = holds
    dem = np.stack([_kernels.pack_rows(dem_bits[k]) for k in range(dem_bits.shape[0])])
    alive = np.ones(n, dtype=bool)
    return _kernels.eliminate(tw, dem, ex_role, ex_idx, ex_body, ex_pol, alive)


def satisfiable(c: Concept, t: TBox) -> bool:
    ts = compute_types(t, [c])
    return any(ts.holds(k, c) for k in ts.types)


def entails(t: TBox, inc: Inclusion) -> bool:
    return not satisfiable(And(inc.lhs, Not(inc.rhs)), t)


def entails_tbox(t: TBox, other: TBox) -> bool:
    return all(entails(t, inc) for inc in other)


def equivalent_tboxes(a: TBox, b: TBox) -> bool:
    return entails_tbox(a, b) and entails_tbox(b, a)


def model_from_type(ts: TypeSet, t0: int) -> PointedInterpretation:
    """Finite model over the surviving types, pointed at t0.

    Each existential demand of a type is met by the lowest-numbered witness.
    """
    if not 0 <= t0 < len(ts):
        raise ValueError("type not in the type set")
    names = [c for c in ts.index.concepts if c.kind == "name"]
    edges: Dict[str, set] = {}
    for t in ts.types:
        for role, body in ts.demands(t):
            u = ts.witnesses(t, role, body)[0]
            edges.setdefault(role, set()).add((f"t{t}", f"t{u}"))
    dom = [f"t{k}" for k in ts.types]
    concepts = {a.name: [f"t{k}" for k in ts.types if ts.holds(k, a)] for a in names}
    interp = Interpretation(dom, concepts, {r: sorted(e) for r, e in edges.items()})
    return PointedInterpretation(interp, f"t{t0}")

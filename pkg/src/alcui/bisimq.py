"""Extension sets and the bisimulation quantifier on finite pointed interpretations."""
from __future__ import annotations

from typing import Dict, FrozenSet, Optional

from .model import Interpretation, PointedInterpretation
from .syntax import Name, Signature, TBox
from .typesys import TypeSet, compute_types


class ExtTable:
    def __init__(self, table: Dict[str, FrozenSet[int]], types: TypeSet):
        self.table = table
        self.types = types

    def __getitem__(self, d: str) -> FrozenSet[int]:
        return self.table[d]

    def __repr__(self):
        return f"ExtTable({ {d: sorted(v) for d, v in self.table.items()} })"


def ext_table(i: Interpretation, t: TBox, s: Signature, ts: Optional[TypeSet] = None) -> ExtTable:
    """Greatest fixpoint of element/type pairs compatible with a Sigma-bisimilar model."""
    ts = compute_types(t) if ts is None else ts
    # names outside the closure are unconstrained by t, so they never block agreement
    names = sorted(a for a in s.concepts if Name(a) in ts.index.index)
    roles = sorted(s.roles)
    tlabel = {}
    for k in ts.types:
        tlabel[k] = tuple(ts.holds(k, Name(a)) for a in names)
    z: Dict[str, set] = {}
    for d in i.domain:
        lab = tuple(d in i.ext(a) for a in names)
        z[d] = {k for k in ts.types if tlabel[k] == lab}
    demands = {k: [(r, ts.witnesses(k, r, body)) for r, body in ts.demands(k) if r in s.roles]
               for k in ts.types}
    changed = True
    while changed:
        changed = False
        for d in i.domain:
            dead = []
            for k in z[d]:
                if not _ok(i, d, k, roles, ts, demands, z):
                    dead.append(k)
            if dead:
                z[d].difference_update(dead)
                changed = True
    return ExtTable({d: frozenset(v) for d, v in z.items()}, ts)


def _ok(i, d, k, roles, ts, demands, z) -> bool:
    for r in roles:
        succ = ts.succ(k, r)
        for e in i.successors(d, r):
            ze = z[e]
            if not any(u in ze for u in succ):
                return False
    for r, wit in demands[k]:
        found = False
        for e in i.successors(d, r):
            ze = z[e]
            if any(u in ze for u in wit):
                found = True
                break
        if not found:
            return False
    return True


def holds_bisim_quantifier(p: PointedInterpretation, t: TBox, s: Signature,
                           ts: Optional[TypeSet] = None) -> bool:
    return bool(ext_table(p.interp, t, s, ts).table[p.point])

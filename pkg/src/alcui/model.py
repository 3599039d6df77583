"""Finite interpretations, concept evaluation and bisimulations."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from .syntax import (
    Concept, Exists, Forall, Not, Signature, TBox, Name,
    conj, disj,
)


class Interpretation:
    """A finite interpretation. Element ids are opaque strings."""

    def __init__(self, domain: Iterable[str], concepts: Mapping[str, Iterable[str]] = None,
                 roles: Mapping[str, Iterable[Tuple[str, str]]] = None):
        dom = []
        seen = set()
        for d in domain:
            d = str(d)
            if d not in seen:
                seen.add(d)
                dom.append(d)
        if not dom:
            raise ValueError("domain must be nonempty")
        self.domain: Tuple[str, ...] = tuple(dom)
        self._dset = frozenset(dom)
        cext = {}
        for name, ext in (concepts or {}).items():
            ext = frozenset(str(e) for e in ext)
            bad = ext - self._dset
            if bad:
                raise ValueError(f"concept {name}: elements {sorted(bad)} not in domain")
            cext[name] = ext
        rext = {}
        for name, pairs in (roles or {}).items():
            ps = frozenset((str(a), str(b)) for a, b in pairs)
            for a, b in ps:
                if a not in self._dset or b not in self._dset:
                    raise ValueError(f"role {name}: pair ({a},{b}) not in domain")
            rext[name] = ps
        self.concept_ext: Dict[str, FrozenSet[str]] = cext
        self.role_ext: Dict[str, FrozenSet[Tuple[str, str]]] = rext
        succ = {}
        for r, ps in rext.items():
            table = {}
            for a, b in sorted(ps):
                table.setdefault(a, []).append(b)
            succ[r] = {a: tuple(bs) for a, bs in table.items()}
        self._succ = succ

    def ext(self, name: str) -> FrozenSet[str]:
        return self.concept_ext.get(name, frozenset())

    def successors(self, d: str, role: str) -> Tuple[str, ...]:
        return self._succ.get(role, {}).get(d, ())

    def roles_of(self, d: str):
        return [r for r in sorted(self._succ) if d in self._succ[r]]

    def labels(self, d: str) -> FrozenSet[str]:
        return frozenset(a for a, ext in self.concept_ext.items() if d in ext)

    def __contains__(self, d):
        return d in self._dset

    def __eq__(self, other):
        return (isinstance(other, Interpretation) and self.domain == other.domain
                and {k: v for k, v in self.concept_ext.items() if v} ==
                {k: v for k, v in other.concept_ext.items() if v}
                and {k: v for k, v in self.role_ext.items() if v} ==
                {k: v for k, v in other.role_ext.items() if v})

    def __repr__(self):
        return f"Interpretation({len(self.domain)} elements)"

    def restrict(self, sig: Signature) -> "Interpretation":
        return Interpretation(
            self.domain,
            {a: e for a, e in self.concept_ext.items() if a in sig.concepts},
            {r: e for r, e in self.role_ext.items() if r in sig.roles},
        )


@dataclass(frozen=True)
class PointedInterpretation:
    interp: Interpretation
    point: str

    def __post_init__(self):
        if self.point not in self.interp:
            raise ValueError(f"point {self.point!r} not in domain")


def pointed(interp: Interpretation, point=None) -> PointedInterpretation:
    return PointedInterpretation(interp, interp.domain[0] if point is None else str(point))


# ---------------------------------------------------------------- file format

def interpretation_to_json(i: Interpretation, point: Optional[str] = None) -> str:
    doc = {
        "domain": list(i.domain),
        "concepts": {a: sorted(e) for a, e in sorted(i.concept_ext.items())},
        "roles": {r: [list(p) for p in sorted(e)] for r, e in sorted(i.role_ext.items())},
    }
    if point is not None:
        doc["point"] = point
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def interpretation_from_json(text: str):
    """Returns (Interpretation, point or None)."""
    doc = json.loads(text)
    if not isinstance(doc, dict) or "domain" not in doc:
        raise ValueError("interpretation document needs a 'domain' field")
    i = Interpretation(doc["domain"], doc.get("concepts", {}), doc.get("roles", {}))
    point = doc.get("point")
    if point is not None and point not in i:
        raise ValueError(f"point {point!r} not in domain")
    return i, point


def load_pointed(path: str) -> PointedInterpretation:
    with open(path, encoding="utf-8") as fh:
        i, point = interpretation_from_json(fh.read())
    return pointed(i, point)


def save_pointed(p: PointedInterpretation, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(interpretation_to_json(p.interp, p.point))


# ---------------------------------------------------------------- semantics

def eval_concept(i: Interpretation, c: Concept) -> FrozenSet[str]:
    memo: Dict[Concept, FrozenSet[str]] = {}
    full = frozenset(i.domain)

    def ev(x: Concept) -> FrozenSet[str]:
        got = memo.get(x)
        if got is not None:
            return got
        k = x.kind
        if k == "top":
            v = full
        elif k == "bot":
            v = frozenset()
        elif k == "name":
            v = i.ext(x.name)
        elif k == "not":
            v = full - ev(x.arg)
        elif k == "and":
            v = ev(x.left) & ev(x.right)
        elif k == "or":
            v = ev(x.left) | ev(x.right)
        elif k == "exists":
            body = ev(x.arg)
            v = frozenset(d for d in i.domain if any(e in body for e in i.successors(d, x.role)))
        else:
            body = ev(x.arg)
            v = frozenset(d for d in i.domain if all(e in body for e in i.successors(d, x.role)))
        memo[x] = v
        return v

    return ev(c)


def is_model(i: Interpretation, t: TBox) -> bool:
    return all(eval_concept(i, inc.lhs) <= eval_concept(i, inc.rhs) for inc in t)


def sigma_bisimulation(i1: Interpretation, i2: Interpretation, s: Signature) -> set:
    """Largest Sigma-bisimulation between i1 and i2, as a set of pairs."""
    names = sorted(s.concepts)
    roles = sorted(s.roles)
    lab1 = {d: tuple(d in i1.ext(a) for a in names) for d in i1.domain}
    lab2 = {d: tuple(d in i2.ext(a) for a in names) for d in i2.domain}
    z = {(a, b) for a in i1.domain for b in i2.domain if lab1[a] == lab2[b]}
    changed = True
    while changed:
        changed = False
        for a, b in list(z):
            ok = True
            for r in roles:
                s1, s2 = i1.successors(a, r), i2.successors(b, r)
                if any(not any((x, y) in z for y in s2) for x in s1) or \
                        any(not any((x, y) in z for x in s1) for y in s2):
                    ok = False
                    break
            if not ok:
                z.discard((a, b))
                changed = True
    return z


def sigma_bisimilar(p1: PointedInterpretation, p2: PointedInterpretation, s: Signature) -> bool:
    return (p1.point, p2.point) in sigma_bisimulation(p1.interp, p2.interp, s)


def m_bisimulation_levels(i1: Interpretation, i2: Interpretation, s: Signature, m: int):
    """List z_0 .. z_m of the depth-bounded bisimilarity relations."""
    names = sorted(s.concepts)
    roles = sorted(s.roles)
    lab1 = {d: tuple(d in i1.ext(a) for a in names) for d in i1.domain}
    lab2 = {d: tuple(d in i2.ext(a) for a in names) for d in i2.domain}
    z = {(a, b) for a in i1.domain for b in i2.domain if lab1[a] == lab2[b]}
    levels = [z]
    for _ in range(m):
        prev = z
        z = set()
        for a, b in prev:
            ok = True
            for r in roles:
                s1, s2 = i1.successors(a, r), i2.successors(b, r)
                if any(not any((x, y) in prev for y in s2) for x in s1) or \
                        any(not any((x, y) in prev for x in s1) for y in s2):
                    ok = False
                    break
            if ok:
                z.add((a, b))
        levels.append(z)
    return levels


def m_bisimilar(p1: PointedInterpretation, p2: PointedInterpretation, s: Signature, m: int) -> bool:
    return (p1.point, p2.point) in m_bisimulation_levels(p1.interp, p2.interp, s, m)[-1]


# ---------------------------------------------------------------- segments

def unravel_segment(p: PointedInterpretation, m: int, roles: Optional[Iterable[str]] = None
                    ) -> PointedInterpretation:
    """Tree of all role paths of length <= m from the point.

    Node ids are the paths written as `d0/r:d1/s:d2...`.
    """
    i = p.interp
    role_list = sorted(i.role_ext) if roles is None else sorted(roles)
    root = p.point
    domain = [root]
    concepts: Dict[str, list] = {}
    edges: Dict[str, list] = {}
    origin = {root: root}
    frontier = [root]
    for _ in range(m):
        nxt = []
        for node in frontier:
            d = origin[node]
            for r in role_list:
                for e in i.successors(d, r):
                    child = f"{node}/{r}:{e}"
                    origin[child] = e
                    domain.append(child)
                    edges.setdefault(r, []).append((node, child))
                    nxt.append(child)
        frontier = nxt
    for node in domain:
        for a in i.labels(origin[node]):
            concepts.setdefault(a, []).append(node)
    return PointedInterpretation(Interpretation(domain, concepts, edges), root)


def _tree_code(i: Interpretation, d: str, s: Signature, depth: int, memo) -> str:
    key = (d, depth)
    got = memo.get(key)
    if got is not None:
        return got
    lab = ",".join(sorted(a for a in i.labels(d) if a in s.concepts))
    kids = []
    if depth > 0:
        for r in sorted(s.roles):
            for e in i.successors(d, r):
                kids.append(r + ":" + _tree_code(i, e, s, depth - 1, memo))
    code = "[" + lab + "|" + ";".join(sorted(kids)) + "]"
    memo[key] = code
    return code


def segment_code(p: PointedInterpretation, s: Signature, m: int) -> str:
    """Canonical encoding of the depth-m unravelling restricted to s."""
    return _tree_code(p.interp, p.point, s, m, {})


def segments_equal(p1: PointedInterpretation, p2: PointedInterpretation, s: Signature, m: int) -> bool:
    return segment_code(p1, s, m) == segment_code(p2, s, m)


# ---------------------------------------------------------------- characteristic concepts

def char_concept(p: PointedInterpretation, s: Signature, m: int) -> Concept:
    i = p.interp
    memo = {}

    def go(d: str, k: int) -> Concept:
        key = (d, k)
        got = memo.get(key)
        if got is not None:
            return got
        labs = i.labels(d)
        parts = [Name(a) if a in labs else Not(Name(a)) for a in sorted(s.concepts)]
        if k > 0:
            for r in sorted(s.roles):
                kids = []
                seen = set()
                for e in i.successors(d, r):
                    x = go(e, k - 1)
                    if x not in seen:
                        seen.add(x)
                        kids.append(x)
                kids.sort()
                parts.extend(Exists(r, x) for x in kids)
                parts.append(Forall(r, disj(kids)))
        out = conj(parts)
        memo[key] = out
        return out

    return go(p.point, m)

"""Interpolant computation: canonical m-type concepts, approximants, forgetting."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .syntax import (Bot, Concept, Exists, Forall, Inclusion, Name, Not, Signature, TBox, Top, conj,
                     disj, forall_words, internalize, negate, nnf, role_depth, signature_of, size)
from .typesys import TypeSet, compute_types, entails

DEFAULT_MAX_FAMILY = 10 ** 6


class FamilyTooLarge(Exception):
    def __init__(self, estimate: str, cap: int):
        super().__init__(f"family size {estimate} exceeds cap {cap}")
        self.estimate = estimate
        self.cap = cap


class DepthInfeasible(Exception):
    pass


class NotStratified(Exception):
    def __init__(self, name: str, depths):
        depths = sorted(depths) if not isinstance(depths, str) else depths
        super().__init__(f"{name} is not stratified (depths {depths})")
        self.name = name
        self.depths = depths


# ---------------------------------------------------------------- m-types

def family_size(s: Signature, m: int) -> Tuple[Optional[int], str]:
    """Number of m-types over s, or (None, log-description) once it stops fitting in 64 bits."""
    c, r = len(s.concepts), len(s.roles)
    n = 2 ** c
    for _ in range(m):
        expo = n * r + c
        if expo > 62:
            return None, f"2^{expo}"
        n = 2 ** expo
    return n, str(n)


@dataclass
class CanonicalFamily:
    """All m-types over a signature.

    levels[j] lists the j-types as (true names, per-role sets of (j-1)-type
    indices) with roles in sorted order; the atoms are the m-types.
    """
    sigma: Signature
    depth: int
    levels: List[list]

    def __post_init__(self):
        self.roles = sorted(self.sigma.roles)
        self.names = sorted(self.sigma.concepts)
        self._concepts: Dict[Tuple[int, int], Concept] = {}

    @property
    def atoms(self) -> list:
        return self.levels[self.depth]

    def __len__(self):
        return len(self.atoms)

    def concept(self, j: int, i: int) -> Concept:
        key = (j, i)
        got = self._concepts.get(key)
        if got is not None:
            return got
        val, succ = self.levels[j][i]
        parts: List[Concept] = [Name(a) if a in val else Not(Name(a)) for a in self.names]
        if j > 0:
            full = len(self.levels[j - 1])
            for r, kids in zip(self.roles, succ):
                body = [self.concept(j - 1, k) for k in sorted(kids)]
                parts.extend(Exists(r, b) for b in body)
                if len(kids) < full:
                    parts.append(Forall(r, disj(body)))
        out = conj(parts)
        self._concepts[key] = out
        return out

    @property
    def concepts(self) -> List[Concept]:
        return [self.concept(self.depth, i) for i in range(len(self.atoms))]

    def evaluate(self, c: Concept, j: Optional[int] = None) -> FrozenSet[int]:
        """Indices of the j-types (default: atoms) whose concept entails c.

        Every Sigma-concept of role depth at most j is decided by a j-type, so
        c is equivalent to the disjunction of the returned atoms.
        """
        j = self.depth if j is None else j
        sig = signature_of(c)
        if not sig <= self.sigma:
            raise ValueError(f"concept uses names outside {self.sigma}")
        if role_depth(c) > j:
            raise ValueError(f"concept deeper than {j}")
        memo: Dict[Tuple[Concept, int], FrozenSet[int]] = {}
        return self._eval(c, j, memo)

    def _eval(self, c, j, memo):
        key = (c, j)
        got = memo.get(key)
        if got is not None:
            return got
        level = self.levels[j]
        k = c.kind
        if k == "top":
            out = frozenset(range(len(level)))
        elif k == "bot":
            out = frozenset()
        elif k == "name":
            out = frozenset(i for i, (val, _) in enumerate(level) if c.name in val)
        elif k == "not":
            out = frozenset(range(len(level))) - self._eval(c.arg, j, memo)
        elif k == "and":
            out = self._eval(c.left, j, memo) & self._eval(c.right, j, memo)
        elif k == "or":
            out = self._eval(c.left, j, memo) | self._eval(c.right, j, memo)
        else:
            inner = self._eval(c.arg, j - 1, memo)
            ri = self.roles.index(c.role)
            if k == "exists":
                out = frozenset(i for i, (_, succ) in enumerate(level) if succ[ri] & inner)
            else:
                out = frozenset(i for i, (_, succ) in enumerate(level) if succ[ri] <= inner)
        memo[key] = out
        return out

    def canonize(self, c: Concept) -> Concept:
        return disj(self.concept(self.depth, i) for i in sorted(self.evaluate(c)))


def canonical_concepts(s: Signature, m: int, max_family: int = DEFAULT_MAX_FAMILY) -> CanonicalFamily:
    total, est = family_size(s, m)
    if total is None or total > max_family:
        raise FamilyTooLarge(est, max_family)
    names = sorted(s.concepts)
    vals = [frozenset(a for b, a in enumerate(names) if (v >> b) & 1) for v in range(2 ** len(names))]
    levels = [[(v, ()) for v in vals]]
    nroles = len(s.roles)
    for _ in range(m):
        prev = len(levels[-1])
        subsets = [frozenset(k for k in range(prev) if (x >> k) & 1) for x in range(2 ** prev)]
        combos = [()]
        for _r in range(nroles):
            combos = [c + (sub,) for c in combos for sub in subsets]
        levels.append([(v, c) for v in vals for c in combos])
    return CanonicalFamily(s, m, levels)


class Realizer:
    """Which j-types are satisfiable with respect to a TBox.

    A j-type is realized by a type k of the TBox when the Sigma-names agree and,
    per Sigma-role, some choice of successor types reachable from k meets k's
    demands while realizing exactly the prescribed (j-1)-types.
    """

    def __init__(self, t: TBox, fam: CanonicalFamily, ts: Optional[TypeSet] = None):
        self.fam = fam
        self.ts = compute_types(t) if ts is None else ts
        ts = self.ts
        self.fixed = {a: Name(a) in ts.index.index for a in fam.names}
        self.memo: Dict[Tuple[int, int, int], bool] = {}

    def realizes(self, k: int, j: int, i: int) -> bool:
        key = (k, j, i)
        got = self.memo.get(key)
        if got is not None:
            return got
        self.memo[key] = out = self._realizes(k, j, i)
        return out

    def _realizes(self, k, j, i) -> bool:
        ts = self.ts
        val, succ = self.fam.levels[j][i]
        for a in self.fam.names:
            if self.fixed[a] and ts.holds(k, Name(a)) != (a in val):
                return False
        for r, want in zip(self.fam.roles, succ):
            usable = {}
            for u in ts.succ(k, r):
                got = frozenset(x for x in want if self.realizes(u, j - 1, x))
                if got:
                    usable[u] = got
            covered = frozenset().union(*usable.values()) if usable else frozenset()
            if covered != want:
                return False
            for role, body in ts.demands(k):
                if role != r:
                    continue
                if not any(u in usable for u in ts.witnesses(k, r, body)):
                    return False
        return True

    def satisfiable(self, i: int, j: Optional[int] = None) -> bool:
        j = self.fam.depth if j is None else j
        return any(self.realizes(k, j, i) for k in self.ts.types)


def satisfiable_atoms(t: TBox, fam: CanonicalFamily) -> List[int]:
    real = Realizer(t, fam)
    return [i for i in range(len(fam)) if real.satisfiable(i)]


def approximant(t: TBox, s: Signature, m: int, max_family: int = DEFAULT_MAX_FAMILY) -> TBox:
    """All depth-m Sigma-consequences of t, one inclusion per m-type.

    Each m-type concept X gets X sub (disjunction of atoms consistent with X
    under t). Atoms are pairwise disjoint, so this is X sub X for realizable
    types and X sub bot otherwise; the tautologies are left out.
    """
    fam = canonical_concepts(s, m, max_family)
    ok = set(satisfiable_atoms(t, fam))
    out = []
    for i in range(len(fam)):
        if i not in ok:
            out.append(Inclusion(fam.concept(m, i), Bot))
    return TBox(out)


# ---------------------------------------------------------------- concept forgetting

def bounded_universal(roles: Iterable[str], n: int, c: Concept) -> Concept:
    roles = sorted(roles)
    out = c
    for _ in range(n):
        out = conj([c] + [Forall(r, out) for r in roles])
    return out


def _conjuncts(c: Concept) -> List[Concept]:
    if c.kind == "and":
        return _conjuncts(c.left) + _conjuncts(c.right)
    return [c]


def _disjuncts(c: Concept) -> List[Concept]:
    if c.kind == "or":
        return _disjuncts(c.left) + _disjuncts(c.right)
    return [c]


def _dnf(c: Concept) -> List[FrozenSet[Concept]]:
    """Disjuncts of an NNF concept as sets of literals and restrictions.

    Clashing disjuncts are dropped and subsumed ones removed.
    """
    rows: List[FrozenSet[Concept]] = [frozenset()]
    for part in _conjuncts(c):
        alts: List[FrozenSet[Concept]] = []
        for d in _disjuncts(part):
            alts.extend(_dnf(d) if d.kind == "and" else [frozenset([d])])
        nxt = set()
        for row in rows:
            for alt in alts:
                new = row | alt
                if Bot in new or any(negate(x) in new for x in new if x.kind == "name"):
                    continue
                nxt.add(new - {Top})
        rows = _minimal_sets(nxt)
    return rows


def _minimal_sets(rows) -> List[FrozenSet[Concept]]:
    rows = sorted(set(rows), key=len)
    out: List[FrozenSet[Concept]] = []
    for r in rows:
        if not any(o <= r for o in out):
            out.append(r)
    return out


class _Forgetter:
    def __init__(self, s: Signature):
        self.s = s
        self.memo: Dict[Concept, Concept] = {}

    def run(self, c: Concept) -> Concept:
        got = self.memo.get(c)
        if got is not None:
            return got
        out = disj(_dedupe(x for x in (self.disjunct(row) for row in _dnf(c)) if x is not Bot))
        self.memo[c] = out
        return out

    def disjunct(self, row: FrozenSet[Concept]) -> Concept:
        s = self.s
        lits, ex, al = [], {}, {}
        for x in row:
            k = x.kind
            if k == "exists":
                ex.setdefault(x.role, []).append(x.arg)
            elif k == "forall":
                al.setdefault(x.role, []).append(x.arg)
            else:
                name = x.name if k == "name" else x.arg.name
                if name in s.concepts:
                    lits.append(x)
        parts = sorted(lits)
        for r in sorted(set(ex) | set(al)):
            univ = conj(sorted(set(al.get(r, []))))
            kids = []
            for body in sorted(set(ex.get(r, []))):
                kid = self.run(_and2(body, univ))
                if kid is Bot:
                    return Bot
                kids.append(kid)
            if r not in s.roles:
                continue
            parts.extend(Exists(r, k) for k in _dedupe(kids))
            if r in al:
                u = self.run(univ)
                if u is not Top:
                    parts.append(Forall(r, u))
        return conj(parts)


def _and2(a: Concept, b: Concept) -> Concept:
    if a is Top:
        return b
    if b is Top:
        return a
    return conj([a, b])


def _dedupe(items) -> list:
    seen, out = set(), []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def concept_interpolant(c: Concept, s: Signature) -> Concept:
    """Strongest Sigma-concept entailed by c.

    Works on the disjunctive normal form layer by layer: foreign literals
    are dropped, restrictions over foreign roles only contribute their
    satisfiability, and the existential children are forgotten together with
    the universal constraint on the same role.
    """
    return _Forgetter(s).run(nnf(c))


# ---------------------------------------------------------------- TBox interpolants

def default_depth(t: TBox) -> int:
    n = size(internalize(t))
    return 2 ** (2 ** (n + 1)) + 2 ** n + 2


def tbox_interpolant(t: TBox, s: Signature, m: Optional[int] = None, max_depth: int = 64) -> TBox:
    """Sigma-TBox {top sub C'} forgetting everything outside s from a bounded internalization.

    Only an interpolant when one exists and m is large enough; without m the
    safe default depth is used, which is refused when above max_depth.
    """
    if m is None:
        n = size(internalize(t))
        if n + 1 > 16 or default_depth(t) > max_depth:
            raise DepthInfeasible(f"default depth 2^(2^{n + 1}) + 2^{n} + 2 exceeds {max_depth}; pass m")
        m = default_depth(t)
    roles = signature_of(t).roles
    ct = bounded_universal(roles, m, nnf(internalize(t)))
    return TBox([Inclusion(Top, concept_interpolant(ct, s))])


def concept_depths(t: TBox) -> Dict[str, set]:
    """Restriction-nesting depths at which each concept name occurs in t."""
    out: Dict[str, set] = {}

    def go(c, d):
        if c.kind == "name":
            out.setdefault(c.name, set()).add(d)
        elif c.kind in ("exists", "forall"):
            go(c.arg, d + 1)
        else:
            for k in c.children():
                go(k, d)

    for c in t.concepts():
        go(c, 0)
    return out


def stratified_forget(t: TBox, s: Signature, max_family: int = DEFAULT_MAX_FAMILY) -> TBox:
    sig = signature_of(t)
    lost_roles = sig.roles - s.roles
    if lost_roles:
        r = sorted(lost_roles)[0]
        raise NotStratified(r, "role names cannot be forgotten this way")
    depths = concept_depths(t)
    for a in sorted(sig.concepts - s.concepts):
        if len(depths[a]) > 1:
            raise NotStratified(a, depths[a])
    m = max((role_depth(c) for c in t.concepts()), default=0)
    return approximant(t, s, m, max_family)


# ---------------------------------------------------------------- inseparability checks

def bounded_inseparable(t1: TBox, t2: TBox, s: Signature, m: int, samples: int = 200,
                        seed: int = 0, max_family: int = DEFAULT_MAX_FAMILY,
                        max_size: int = 24) -> Tuple[bool, Optional[Inclusion]]:
    """Compare the Sigma-consequences of depth at most m.

    Exhaustive over all m-types when the family fits (an inclusion C sub D
    follows iff every m-type under C and not D is unsatisfiable), otherwise a
    seeded sample of random inclusions with sides of at most max_size
    nodes. Returns (ok, counterexample).
    """
    try:
        fam = canonical_concepts(s, m, max_family)
    except FamilyTooLarge:
        fam = None
    if fam is not None:
        a = set(satisfiable_atoms(t1, fam))
        b = set(satisfiable_atoms(t2, fam))
        for i in sorted(a ^ b):
            return False, Inclusion(fam.concept(m, i), Bot)
        return True, None
    rng = random.Random(seed)
    for _ in range(samples):
        inc = Inclusion(random_concept(rng, s, m, max_size), random_concept(rng, s, m, max_size))
        if entails(t1, inc) != entails(t2, inc):
            return False, inc
    return True, None


def random_concept(rng: random.Random, s: Signature, depth: int, max_size: Optional[int] = None) -> Concept:
    """Random Sigma-concept of role depth at most depth, redrawn until within max_size."""
    names = sorted(s.concepts)
    roles = sorted(s.roles)

    def go(d):
        pick = rng.random()
        if d == 0 or not roles or pick < 0.3:
            if not names or rng.random() < 0.1:
                return rng.choice([Top, Bot])
            a = Name(rng.choice(names))
            return a if rng.random() < 0.5 else Not(a)
        if pick < 0.5:
            return _and2(go(d), go(d))
        if pick < 0.6:
            return disj([go(d), go(d)])
        r = rng.choice(roles)
        return (Exists if rng.random() < 0.5 else Forall)(r, go(d - 1))

    while True:
        c = go(depth)
        if max_size is None or size(c) <= max_size:
            return c


# ---------------------------------------------------------------- lower-bound family

LOWER_BOUND_SIGNATURE = Signature(frozenset({"A", "B"}), frozenset({"r", "s"}))


def counter_bits(n: int) -> str:
    """Values 0 .. 2^(2^n) - 1 of a 2^n-bit counter, lowest bit first, concatenated."""
    w = 2 ** n
    return "".join(format(v, f"0{w}b")[::-1] for v in range(2 ** w))


def k2(i: int) -> Concept:
    out = Not(Name("B"))
    for _ in range(i):
        out = conj([Exists("r", out), Exists("s", out)])
    return out


def k1(n: int) -> Concept:
    bits = counter_bits(n)
    x = Name("X")
    return conj(forall_words(("r", "s"), i, x if b == "1" else Not(x)) for i, b in enumerate(bits))


def lower_bound_sizes(n: int) -> Dict[str, int]:
    """Expanded node counts of K1 and K2^(m), computed without building them."""
    m = 2 ** n * 2 ** (2 ** n)
    # forall_words over two roles: f(0) = leaf, f(i) = 2 f(i-1) + 3
    leaf_x, leaf_nx = 1, 2
    bits = counter_bits(n)
    total = 0
    for i, b in enumerate(bits):
        f = leaf_x if b == "1" else leaf_nx
        for _ in range(i):
            f = 2 * f + 3
        total += f
    k1_size = total + (len(bits) - 1)
    return {"m": m, "K1": k1_size, "K2": 5 * 2 ** m - 3}


def lower_bound_family(n: int, max_size: int = DEFAULT_MAX_FAMILY) -> Tuple[TBox, TBox]:
    sizes = lower_bound_sizes(n)
    big = max(sizes["K1"], sizes["K2"])
    if big > max_size:
        raise FamilyTooLarge(str(big), max_size)
    m = sizes["m"]
    a, x = Name("A"), Name("X")
    minus = TBox([
        Inclusion(Top, conj([Forall("r", Not(a)), Forall("s", Not(a))])),
        Inclusion(a, conj([Not(x)] + [forall_words(("r", "s"), i, Not(x)) for i in range(1, 2 ** n)])),
    ])
    extra = Inclusion(a, disj([Not(k1(n)), Not(k2(m))]))
    return minus, TBox(list(minus) + [extra])

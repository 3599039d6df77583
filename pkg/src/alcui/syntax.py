"""ALC concepts, inclusions, TBoxes and signatures.

Concepts are immutable trees with cached hashes; everything downstream keys
dictionaries on them, so hashing has to be cheap.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


class Concept:
    __slots__ = ("_hash",)
    kind = ""

    def children(self) -> tuple:
        return ()

    def _key(self) -> tuple:
        raise NotImplementedError

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((self.kind,) + self._key())
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Concept) or self.kind != other.kind:
            return False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __setattr__(self, name, value):
        raise AttributeError("concepts are immutable")

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"<{render(self)}>"

    def __lt__(self, other):
        return render(self) < render(other)


class _Const(Concept):
    __slots__ = ()

    def _key(self):
        return ()


class TopC(_Const):
    __slots__ = ()
    kind = "top"


class BotC(_Const):
    __slots__ = ()
    kind = "bot"


Top = TopC()
Bot = BotC()


class Name(Concept):
    __slots__ = ("name",)
    kind = "name"

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


class Not(Concept):
    __slots__ = ("arg",)
    kind = "not"

    def __init__(self, arg: Concept):
        object.__setattr__(self, "arg", arg)

    def children(self):
        return (self.arg,)

    def _key(self):
        return (self.arg,)


class _Binary(Concept):
    __slots__ = ("left", "right")

    def __init__(self, left: Concept, right: Concept):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def children(self):
        return (self.left, self.right)

    def _key(self):
        return (self.left, self.right)


class And(_Binary):
    __slots__ = ()
    kind = "and"


class Or(_Binary):
    __slots__ = ()
    kind = "or"


class _Restriction(Concept):
    __slots__ = ("role", "arg")

    def __init__(self, role: str, arg: Concept):
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "arg", arg)

    def children(self):
        return (self.arg,)

    def _key(self):
        return (self.role, self.arg)


class Exists(_Restriction):
    __slots__ = ()
    kind = "exists"


class Forall(_Restriction):
    __slots__ = ()
    kind = "forall"


def conj(items: Iterable[Concept]) -> Concept:
    """Right-nested conjunction; the empty conjunction is top."""
    items = list(items)
    if not items:
        return Top
    out = items[-1]
    for c in reversed(items[:-1]):
        out = And(c, out)
    return out


def disj(items: Iterable[Concept]) -> Concept:
    """Right-nested disjunction; the empty disjunction is bot."""
    items = list(items)
    if not items:
        return Bot
    out = items[-1]
    for c in reversed(items[:-1]):
        out = Or(c, out)
    return out


def forall_words(roles, length: int, c: Concept) -> Concept:
    """Conjunction of forall w.c over all role words w of the given length."""
    if length == 0:
        return c
    inner = forall_words(roles, length - 1, c)
    return conj(Forall(r, inner) for r in sorted(roles))


# ---------------------------------------------------------------- rendering

_render_cache: dict = {}


def render(c: Concept) -> str:
    # iterative post-order so deep concepts do not hit the recursion limit
    cache = _render_cache
    hit = cache.get(c)
    if hit is not None:
        return hit
    stack = [(c, False)]
    while stack:
        node, ready = stack.pop()
        if node in cache:
            continue
        kids = node.children()
        if not ready and any(k not in cache for k in kids):
            stack.append((node, True))
            stack.extend((k, False) for k in kids if k not in cache)
            continue
        k = node.kind
        if k == "top":
            s = "top"
        elif k == "bot":
            s = "bot"
        elif k == "name":
            s = node.name
        elif k == "not":
            s = "not " + cache[node.arg]
        elif k == "and":
            s = "(" + cache[node.left] + " and " + cache[node.right] + ")"
        elif k == "or":
            s = "(" + cache[node.left] + " or " + cache[node.right] + ")"
        elif k == "exists":
            s = "exists " + node.role + ". " + cache[node.arg]
        else:
            s = "forall " + node.role + ". " + cache[node.arg]
        cache[node] = s
    if len(cache) > 200000:
        out = cache[c]
        cache.clear()
        return out
    return cache[c]


def size(c: Concept) -> int:
    """Number of syntax tree nodes."""
    n = 0
    stack = [c]
    while stack:
        x = stack.pop()
        n += 1
        stack.extend(x.children())
    return n


# ---------------------------------------------------------------- inclusions

@dataclass(frozen=True)
class Inclusion:
    lhs: Concept
    rhs: Concept

    def __str__(self):
        return f"{render(self.lhs)} sub {render(self.rhs)}"


class TBox:
    """Finite ordered set of inclusions (duplicates stored once)."""

    def __init__(self, inclusions: Iterable[Inclusion] = ()):
        seen = {}
        for inc in inclusions:
            seen.setdefault(inc, None)
        self._incs = tuple(seen)

    @property
    def inclusions(self) -> tuple:
        return self._incs

    def __iter__(self) -> Iterator[Inclusion]:
        return iter(self._incs)

    def __len__(self):
        return len(self._incs)

    def __eq__(self, other):
        return isinstance(other, TBox) and set(self._incs) == set(other._incs)

    def __hash__(self):
        return hash(frozenset(self._incs))

    def __or__(self, other: "TBox") -> "TBox":
        return TBox(self._incs + tuple(other))

    def __repr__(self):
        return "TBox(" + "; ".join(str(i) for i in self._incs) + ")"

    def render(self) -> str:
        return "".join(str(i) + "\n" for i in self._incs)

    def concepts(self) -> list:
        out = []
        for inc in self._incs:
            out.append(inc.lhs)
            out.append(inc.rhs)
        return out


@dataclass(frozen=True)
class Signature:
    concepts: frozenset = field(default_factory=frozenset)
    roles: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "concepts", frozenset(self.concepts))
        object.__setattr__(self, "roles", frozenset(self.roles))

    def __or__(self, other: "Signature") -> "Signature":
        return Signature(self.concepts | other.concepts, self.roles | other.roles)

    def __and__(self, other: "Signature") -> "Signature":
        return Signature(self.concepts & other.concepts, self.roles & other.roles)

    def __le__(self, other: "Signature") -> bool:
        return self.concepts <= other.concepts and self.roles <= other.roles

    def names(self) -> list:
        return sorted(self.concepts) + sorted(self.roles)

    def __str__(self):
        return ",".join(self.names())


def parse_signature(text: str) -> Signature:
    """Comma-separated names; upper-case initial means concept name."""
    cs, rs = set(), set()
    for raw in text.split(","):
        name = raw.strip()
        if not name:
            continue
        if _CNAME.fullmatch(name):
            cs.add(name)
        elif _RNAME.fullmatch(name) and name not in _KEYWORDS:
            rs.add(name)
        else:
            raise ParseError(f"bad signature name {name!r}", 1, 1)
    return Signature(frozenset(cs), frozenset(rs))


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


_CNAME = re.compile(r"[A-Z][A-Za-z0-9_]*")
_RNAME = re.compile(r"[a-z][A-Za-z0-9_]*")
_KEYWORDS = {"top", "bot", "not", "and", "or", "exists", "forall", "sub", "equiv"}
_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\.)|([A-Za-z][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str, line: int):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.lastindex is None:
            break
        val = m.group(m.lastindex)
        col = m.start(m.lastindex) + 1
        if m.lastindex == 5:
            raise ParseError(f"unexpected character {val!r}", line, col)
        toks.append((val, col))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, text: str, line: int = 1):
        self.line = line
        self.toks = _tokenize(text, line)
        self.i = 0
        self.end_col = len(text) + 1

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def col(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else self.end_col

    def fail(self, msg):
        raise ParseError(msg, self.line, self.col())

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input" + (f", expected {expected!r}" if expected else ""))
        if expected is not None and tok != expected:
            self.fail(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    # or-level > and-level > unary
    def concept(self):
        left = self.conjunction()
        while self.peek() == "or":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek() == "and":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input, expected a concept")
        if tok == "(":
            self.take()
            c = self.concept()
            self.take(")")
            return c
        if tok == "top":
            self.take()
            return Top
        if tok == "bot":
            self.take()
            return Bot
        if tok == "not":
            self.take()
            return Not(self.unary())
        if tok in ("exists", "forall"):
            self.take()
            role = self.peek()
            if role is None or not _RNAME.fullmatch(role) or role in _KEYWORDS:
                if role is not None and _CNAME.fullmatch(role):
                    self.fail(f"concept name {role!r} used as a role")
                self.fail(f"expected a role name, found {role!r}")
            self.take()
            self.take(".")
            body = self.unary()
            return Exists(role, body) if tok == "exists" else Forall(role, body)
        if _CNAME.fullmatch(tok):
            self.take()
            return Name(tok)
        if _RNAME.fullmatch(tok) and tok not in _KEYWORDS:
            self.fail(f"role name {tok!r} used as a concept")
        self.fail(f"unexpected token {tok!r}")

    def at_end(self):
        return self.i >= len(self.toks)


def parse_concept(text: str) -> Concept:
    lines = text.split("\n")
    # concepts are single-line in practice; join keeps column numbers honest
    if len(lines) > 1:
        text = " ".join(lines)
    p = _Parser(text)
    c = p.concept()
    if not p.at_end():
        p.fail(f"unexpected token {p.peek()!r}")
    return c


def parse_tbox(text: str) -> TBox:
    incs = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        p = _Parser(body, lineno)
        lhs = p.concept()
        op = p.peek()
        if op not in ("sub", "equiv"):
            p.fail("expected 'sub' or 'equiv'" + (f", found {op!r}" if op else ""))
        p.take()
        rhs = p.concept()
        if not p.at_end():
            p.fail(f"unexpected token {p.peek()!r}")
        incs.append(Inclusion(lhs, rhs))
        if op == "equiv":
            incs.append(Inclusion(rhs, lhs))
    return TBox(incs)


def parse_inclusion(text: str) -> Inclusion:
    t = parse_tbox(text)
    if len(t) != 1:
        raise ParseError("expected a single 'C sub D' statement", 1, 1)
    return t.inclusions[0]


# ---------------------------------------------------------------- normal forms

def nnf(c: Concept) -> Concept:
    return _nnf(c, False)


def _nnf(c: Concept, neg: bool) -> Concept:
    k = c.kind
    if k == "top":
        return Bot if neg else Top
    if k == "bot":
        return Top if neg else Bot
    if k == "name":
        return Not(c) if neg else c
    if k == "not":
        return _nnf(c.arg, not neg)
    if k == "and":
        l, r = _nnf(c.left, neg), _nnf(c.right, neg)
        return Or(l, r) if neg else And(l, r)
    if k == "or":
        l, r = _nnf(c.left, neg), _nnf(c.right, neg)
        return And(l, r) if neg else Or(l, r)
    if k == "exists":
        b = _nnf(c.arg, neg)
        return Forall(c.role, b) if neg else Exists(c.role, b)
    b = _nnf(c.arg, neg)
    return Exists(c.role, b) if neg else Forall(c.role, b)


def negate(c: Concept) -> Concept:
    """Single negation, collapsing a double negation."""
    return c.arg if c.kind == "not" else Not(c)


def _flatten(c: Concept, kind: str, out: list):
    if c.kind == kind:
        _flatten(c.left, kind, out)
        _flatten(c.right, kind, out)
    else:
        out.append(c)


def canonical(c: Concept) -> Concept:
    """Flatten nested and/or, drop duplicate operands and sort them by rendering."""
    k = c.kind
    if k in ("and", "or"):
        parts = []
        _flatten(c, k, parts)
        uniq = {}
        for p in parts:
            cp = canonical(p)
            uniq.setdefault(render(cp), cp)
        items = [uniq[key] for key in sorted(uniq)]
        return conj(items) if k == "and" else disj(items)
    if k == "not":
        return Not(canonical(c.arg))
    if k == "exists":
        return Exists(c.role, canonical(c.arg))
    if k == "forall":
        return Forall(c.role, canonical(c.arg))
    return c


def subconcepts(c: Concept) -> Iterator[Concept]:
    stack = [c]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(x.children())


def closure(t: TBox, extra: Iterable[Concept] = (), with_top: bool = False) -> set:
    """Subconcepts of the TBox concepts and `extra`, closed under single negation."""
    out = set()
    roots = list(t.concepts()) + list(extra)
    if with_top:
        roots.append(Top)
    for root in roots:
        for s in subconcepts(root):
            out.add(s)
            out.add(negate(s))
    return out


def role_depth(c: Concept) -> int:
    memo = {}

    def go(x):
        v = memo.get(x)
        if v is not None:
            return v
        kids = x.children()
        if x.kind in ("exists", "forall"):
            v = 1 + go(x.arg)
        elif kids:
            v = max(go(k) for k in kids)
        else:
            v = 0
        memo[x] = v
        return v

    return go(c)


def signature_of(x: Union[Concept, Inclusion, TBox]) -> Signature:
    if isinstance(x, Inclusion):
        roots = [x.lhs, x.rhs]
    elif isinstance(x, TBox):
        roots = x.concepts()
    else:
        roots = [x]
    cs, rs = set(), set()
    seen = set()
    for root in roots:
        for s in subconcepts(root):
            if s in seen:
                continue
            seen.add(s)
            if s.kind == "name":
                cs.add(s.name)
            elif s.kind in ("exists", "forall"):
                rs.add(s.role)
    return Signature(frozenset(cs), frozenset(rs))


def internalize(t: TBox) -> Concept:
    """The concept C_T with {top sub C_T} equivalent to t."""
    return conj(nnf(Or(Not(inc.lhs), inc.rhs)) for inc in t)

"""Command-line frontend: `alcui SUBCOMMAND ...`.

Exit codes: 0 yes/success, 1 no (or unknown), 2 usage or input error,
3 resource cap hit.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from .bisimq import holds_bisim_quantifier
from .builders import (CounterTooWide, WitnessPair, conservative_extension_witness,
                       decide_interpolant_nonexistence_at, verify_witness)
from .compute import (DEFAULT_MAX_FAMILY, DepthInfeasible, FamilyTooLarge, NotStratified, approximant,
                      lower_bound_family, lower_bound_sizes, tbox_interpolant)
from .model import load_pointed, m_bisimilar, save_pointed, sigma_bisimilar
from .syntax import ParseError, parse_concept, parse_inclusion, parse_signature, parse_tbox, signature_of
from .typesys import TypeSpaceTooLarge, compute_types, entails, satisfiable

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


@dataclass
class Verdict:
    """answer is yes, no or unknown; strength is "exact" or "bounded(m)"."""
    answer: str
    certificate: Optional[List[str]] = None
    strength: str = "exact"
    output: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Verdict":
        doc = json.loads(text)
        if doc.get("answer") not in ("yes", "no", "unknown"):
            raise ValueError("answer must be yes, no or unknown")
        strength = doc.get("strength", "exact")
        if strength != "exact" and not (strength.startswith("bounded(") and strength.endswith(")")):
            raise ValueError(f"bad strength {strength!r}")
        return cls(doc["answer"], doc.get("certificate"), strength, doc.get("output"), doc.get("extra", {}))

    @property
    def code(self) -> int:
        return EXIT_YES if self.answer == "yes" else EXIT_NO


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(str(e)) from e


def _tbox(path: str):
    return parse_tbox(_read(path))


def _pointed(path: str):
    _read(path)
    return load_pointed(path)


def _yes(flag: bool, **kw) -> Verdict:
    return Verdict("yes" if flag else "no", **kw)


def cmd_sat(a) -> Verdict:
    return _yes(satisfiable(parse_concept(a.concept), _tbox(a.tbox)))


def cmd_entails(a) -> Verdict:
    return _yes(entails(_tbox(a.tbox), parse_inclusion(a.inclusion)))


def cmd_types(a) -> Verdict:
    ts = compute_types(_tbox(a.tbox))
    lines = [f"{k}: {{{ts.render_type(k)}}}" for k in ts.types]
    return Verdict("yes" if len(ts) else "no", output="\n".join(lines), extra={"count": len(ts)})


def cmd_bisim(a) -> Verdict:
    p1, p2 = _pointed(a.int1), _pointed(a.int2)
    s = parse_signature(a.sigma)
    if a.depth is None:
        return _yes(sigma_bisimilar(p1, p2, s))
    return _yes(m_bisimilar(p1, p2, s, a.depth), strength=f"bounded({a.depth})")


def cmd_holds_eq(a) -> Verdict:
    return _yes(holds_bisim_quantifier(_pointed(a.interp), _tbox(a.tbox), parse_signature(a.sigma)))


def cmd_ce(a) -> Verdict:
    t1, t2 = _tbox(a.tbox1), _tbox(a.tbox2)
    w = conservative_extension_witness(t1, t2)
    if w is None:
        return Verdict("yes")
    cert = None
    if a.out:
        path = a.out + ".json"
        save_pointed(w, path)
        cert = [path]
    return Verdict("no", certificate=cert, output="model of the first TBox with no bisimilar model of both")


def cmd_ui_exists(a) -> Verdict:
    """Yes when (*_m) holds, i.e. the depth-m approximant is not an interpolant."""
    t, s = _tbox(a.tbox), parse_signature(a.sigma)
    res = decide_interpolant_nonexistence_at(t, s, a.depth, a.max_counter_bits)
    strength = "exact" if res.exact else f"bounded({a.depth})"
    if not res.holds:
        return Verdict("no" if res.exact else "unknown", strength=strength)
    cert = None
    if a.out:
        cert = [a.out + ".1.json", a.out + ".2.json"]
        save_pointed(res.witness.i1, cert[0])
        save_pointed(res.witness.i2, cert[1])
    return Verdict("yes", certificate=cert, strength=strength)


def cmd_ui_compute(a) -> Verdict:
    t, s = _tbox(a.tbox), parse_signature(a.sigma)
    ui = tbox_interpolant(t, s, a.depth)
    strength = "exact" if a.depth is None else f"bounded({a.depth})"
    return _emit_tbox(ui, a, strength)


def cmd_approximate(a) -> Verdict:
    ui = approximant(_tbox(a.tbox), parse_signature(a.sigma), a.depth, a.max_family)
    return _emit_tbox(ui, a, f"bounded({a.depth})")


def _emit_tbox(t, a, strength) -> Verdict:
    text = t.render().rstrip("\n")
    cert = None
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        cert = [a.out]
    return Verdict("yes", certificate=cert, strength=strength, output=text)


def cmd_verify_witness(a) -> Verdict:
    t, s = _tbox(a.tbox), parse_signature(a.sigma)
    w = WitnessPair(_pointed(a.int1), _pointed(a.int2), a.depth)
    return _yes(verify_witness(w, t, s), strength=f"bounded({a.depth})")


def cmd_lower_bound(a) -> Verdict:
    minus, full = lower_bound_family(a.n, a.max_family)
    lines = [full.render()]
    extra = {}
    if a.stats:
        extra = lower_bound_sizes(a.n)
        lines.append(f"# m = {extra['m']}, |K1| = {extra['K1']}, |K2^(m)| = {extra['K2']}, "
                     f"|sig| = {len(signature_of(full).names())}")
    return Verdict("yes", output="\n".join(lines), extra=extra)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alcui", description="Uniform interpolation and conservative extensions for ALC.")
    p.add_argument("--json", action="store_true", help="print the verdict as JSON")
    p.add_argument("--max-counter-bits", type=int, default=12)
    p.add_argument("--max-family", type=int, default=DEFAULT_MAX_FAMILY)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, *args):
        q = sub.add_parser(name)
        for arg in args:
            q.add_argument(arg)
        q.set_defaults(fn=fn)
        return q

    add("sat", cmd_sat, "tbox", "concept")
    add("entails", cmd_entails, "tbox", "inclusion")
    add("types", cmd_types, "tbox")
    q = add("bisim", cmd_bisim, "int1", "int2")
    q.add_argument("--sigma", required=True)
    q.add_argument("--depth", type=int)
    q = add("holds-eq", cmd_holds_eq, "tbox", "interp")
    q.add_argument("--sigma", required=True)
    q = add("ce", cmd_ce, "tbox1", "tbox2")
    q.add_argument("--out", help="path prefix for the counter-model")
    q = add("ui-exists", cmd_ui_exists, "tbox")
    q.add_argument("--sigma", required=True)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--out", help="path prefix for the witness pair")
    q = add("ui-compute", cmd_ui_compute, "tbox")
    q.add_argument("--sigma", required=True)
    q.add_argument("--depth", type=int)
    q.add_argument("--out")
    q = add("approximate", cmd_approximate, "tbox")
    q.add_argument("--sigma", required=True)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--out")
    q = add("verify-witness", cmd_verify_witness, "tbox", "int1", "int2")
    q.add_argument("--sigma", required=True)
    q.add_argument("--depth", type=int, required=True)
    q = add("lower-bound", cmd_lower_bound)
    q.add_argument("n", type=int)
    q.add_argument("--stats", action="store_true")
    return p


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_YES
    try:
        v = a.fn(a)
    except (FamilyTooLarge, CounterTooWide, DepthInfeasible, TypeSpaceTooLarge) as e:
        print(f"alcui: resource cap: {e}", file=err)
        return EXIT_CAP
    except (UsageError, ParseError, NotStratified, ValueError, KeyError) as e:
        print(f"alcui: {e}", file=err)
        return EXIT_USAGE
    if a.json:
        print(v.to_json(), file=out)
    else:
        if v.output:
            print(v.output, file=out)
        line = v.answer if v.strength == "exact" else f"{v.answer} [{v.strength}]"
        if v.certificate:
            line += " certificate: " + ", ".join(v.certificate)
        print(line, file=out)
    return v.code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

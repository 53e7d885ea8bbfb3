"""Reader and writer for the line-oriented ``.crn`` network format.

Example::

    # Michaelis-Menten
    E + S <-> ES @ 0.1, 1000
    ES -> E + P @ 0.3
    init E = 10
    init S = 100
    input S
    output P

Bracketed terms (``[E]``) are promoters: they scale the forward rate and are
neither consumed nor produced, whichever side they are written on.  Braced
terms (``{E}``) scale the backward rate of a reversible reaction.  ``0``
denotes an empty side.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import Network, NetworkError, Reaction, Species

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_INT = re.compile(r"\d+")


class ParseError(ValueError):
    """Syntax or semantic error in a network file, with a 1-based source span."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class NetworkDocument:
    network: Network
    declared_input: str | None = None
    declared_output: str | None = None
    source_spans: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.declared_input is not None and self.declared_input == self.declared_output:
            raise ValueError("input and output species must be distinct")


class _Cursor:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def col(self) -> int:
        return self.pos + 1

    def error(self, msg: str, pos: int | None = None) -> ParseError:
        p = self.pos if pos is None else pos
        return ParseError(msg, self.lineno, min(p, max(len(self.text) - 1, 0)) + 1)

    def peek(self, s: str) -> bool:
        self.skip_ws()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str) -> None:
        if not self.peek(s):
            raise self.error(f"expected {s!r}")
        self.pos += len(s)

    def match(self, rx: re.Pattern) -> str | None:
        self.skip_ws()
        m = rx.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def ident(self, what: str = "identifier") -> tuple[str, int]:
        self.skip_ws()
        start = self.pos
        tok = self.match(_IDENT)
        if tok is None:
            raise self.error(f"expected {what}")
        return tok, start

    def number(self) -> tuple[float, int]:
        self.skip_ws()
        start = self.pos
        tok = self.match(_NUMBER)
        if tok is None:
            raise self.error("expected a number")
        if self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] in "._"):
            raise self.error("malformed number", start)
        return float(tok), start


def _parse_side(cur: _Cursor, stop: tuple[str, ...]):
    """Return (coefficients {name: [count, col]}, promoters, reverse promoters, mentions)."""
    terms: dict[str, list] = {}
    proms: dict[str, int] = {}
    rproms: dict[str, int] = {}
    mentions: list[tuple[str, int]] = []
    cur.skip_ws()
    if cur.match(re.compile(r"0(?![0-9A-Za-z_.\[{])")) is not None:
        return terms, proms, rproms, mentions
    while True:
        cur.skip_ws()
        start = cur.pos
        if cur.peek("[") or cur.peek("{"):
            opening = cur.text[cur.pos]
            cur.expect(opening)
            name, col = cur.ident("promoter species")
            cur.expect("]" if opening == "[" else "}")
            (proms if opening == "[" else rproms).setdefault(name, col)
            mentions.append((name, col))
        else:
            coeff = 1
            num = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+")
            c = cur.match(num)
            if c is not None:
                if not _INT.fullmatch(c):
                    raise cur.error(f"stoichiometric coefficient {c!r} must be a positive integer", start)
                coeff = int(c)
                if coeff <= 0:
                    raise cur.error("stoichiometric coefficient must be positive", start)
            name, col = cur.ident("species name")
            entry = terms.setdefault(name, [0, col])
            entry[0] += coeff
            mentions.append((name, col))
        cur.skip_ws()
        if cur.peek("+"):
            cur.expect("+")
            continue
        if any(cur.peek(s) for s in stop) or cur.at_end():
            return terms, proms, rproms, mentions
        raise cur.error("expected '+' or end of side")


def parse(text: str) -> NetworkDocument:
    """Parse ``.crn`` source text into a :class:`NetworkDocument`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    order: dict[str, int] = {}
    spans: dict = {}
    raw_rxns = []
    inits: list[tuple[str, float, int, int]] = []
    io: dict[str, tuple[str, int, int]] = {}
    used: set[str] = set()

    def declare(name: str, lineno: int, col: int) -> None:
        order.setdefault(name, len(order))
        spans.setdefault(("species", name), (lineno, col + 1))

    for lineno, raw in enumerate(lines, start=1):
        content = raw.split("#", 1)[0].rstrip()
        if not content.strip():
            continue
        cur = _Cursor(content, lineno)
        if "->" in content:
            cur.skip_ws()
            name = None
            name_col = cur.pos
            m = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*:").match(content, cur.pos)
            if m:
                name = m.group(1)
                cur.pos = m.end()
            lhs, lprom, lrprom, lment = _parse_side(cur, ("<->", "->"))
            if cur.peek("<->"):
                cur.expect("<->")
                reversible = True
            elif cur.peek("->"):
                cur.expect("->")
                reversible = False
            else:
                raise cur.error("expected '->' or '<->'")
            rhs, rprom, rrprom, rment = _parse_side(cur, ("@",))
            cur.expect("@")
            rate_col = cur.pos
            kf, kf_col = cur.number()
            kb = None
            if cur.peek(","):
                cur.expect(",")
                kb, kb_col = cur.number()
            if not cur.at_end():
                raise cur.error("unexpected trailing text")
            if kf <= 0:
                raise ParseError("rate constants must be positive", lineno, kf_col + 1)
            if kb is not None and kb <= 0:
                raise ParseError("rate constants must be positive", lineno, kb_col + 1)
            if reversible and kb is None:
                raise ParseError("reversible reaction needs a backward rate constant", lineno, rate_col + 1)
            if not reversible and kb is not None:
                raise ParseError("backward rate constant given for an irreversible reaction", lineno, kb_col + 1)
            raw_rxns.append((name, name_col, lineno, lhs, rhs, {**lprom, **rprom}, {**lrprom, **rrprom}, reversible, kf, kb))
            for n, col in lment + rment:
                declare(n, lineno, col)
                used.add(n)
            continue

        kw, kw_col = cur.ident("keyword")
        if kw == "init":
            name, col = cur.ident("species name")
            cur.expect("=")
            val, vcol = cur.number()
            if not cur.at_end():
                raise cur.error("unexpected trailing text")
            if val < 0:
                raise ParseError("initial concentration must be non-negative", lineno, vcol + 1)
            inits.append((name, val, lineno, col + 1))
            # init lines take part in id assignment so canonical files round-trip
            if name not in order:
                order[name] = len(order)
        elif kw in ("input", "output"):
            name, col = cur.ident("species name")
            if not cur.at_end():
                raise cur.error("unexpected trailing text")
            if kw in io:
                raise ParseError(f"duplicate {kw} declaration", lineno, kw_col + 1)
            io[kw] = (name, lineno, col + 1)
        else:
            raise ParseError(f"unknown statement {kw!r}", lineno, kw_col + 1)

    reactions = []
    seen_names: set[str] = set()
    for idx, (name, name_col, lineno, lhs, rhs, fwd_prom, bwd_prom, reversible, kf, kb) in enumerate(raw_rxns):
        rname = name if name is not None else f"R{idx + 1}"
        if rname in seen_names:
            raise ParseError(f"duplicate reaction name {rname!r}", lineno, name_col + 1)
        seen_names.add(rname)
        spans[("reaction", rname)] = (lineno, name_col + 1)
        try:
            reactions.append(
                Reaction(
                    id=idx,
                    name=rname,
                    reactants={order[n]: c for n, (c, _) in lhs.items()},
                    products={order[n]: c for n, (c, _) in rhs.items()},
                    promoters=frozenset(order[n] for n in fwd_prom),
                    reverse_promoters=frozenset(order[n] for n in bwd_prom),
                    reversible=reversible,
                    k_fwd=kf,
                    k_bwd=kb,
                )
            )
        except NetworkError as exc:
            raise ParseError(str(exc), lineno, name_col + 1) from None

    init = [0.0] * len(order)
    seen_init: set[str] = set()
    for name, val, lineno, col in inits:
        if name not in used:
            raise ParseError(f"init for unknown species {name!r}", lineno, col)
        if name in seen_init:
            raise ParseError(f"duplicate init for species {name!r}", lineno, col)
        seen_init.add(name)
        init[order[name]] = val
    for kw, (name, lineno, col) in io.items():
        if name not in used:
            raise ParseError(f"{kw} names unknown species {name!r}", lineno, col)
    if "input" in io and "output" in io and io["input"][0] == io["output"][0]:
        name, lineno, col = io["output"]
        raise ParseError("input and output species must be distinct", lineno, col)

    species = tuple(Species(i, n) for n, i in order.items())
    net = Network(species, tuple(reactions), tuple(init))
    return NetworkDocument(
        network=net,
        declared_input=io.get("input", (None,))[0],
        declared_output=io.get("output", (None,))[0],
        source_spans=spans,
    )


def parse_file(path) -> NetworkDocument:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse(fh.read())


def _fmt_num(x: float) -> str:
    return repr(float(x))


def _side(network: Network, coeffs: dict[int, int], proms=frozenset(), rproms=frozenset()) -> str:
    names = network.species_names
    items = [(j, c) for j, c in coeffs.items()] + [(j, "[]") for j in proms] + [(j, "{}") for j in rproms]
    if not items:
        return "0"
    parts = []
    for j, c in sorted(items, key=lambda t: t[0]):
        if isinstance(c, str):
            parts.append(f"{c[0]}{names[j]}{c[1]}")
        elif c == 1:
            parts.append(names[j])
        else:
            parts.append(f"{c} {names[j]}")
    return " + ".join(parts)


def serialize(doc: NetworkDocument) -> str:
    """Canonical text for ``doc``; ``parse(serialize(doc)) == doc``.

    Init lines come first, in species-id order, so species ids survive the
    round trip even when a species is first mentioned as a promoter.
    """
    net = doc.network
    out = [f"init {sp.name} = {_fmt_num(net.initial[sp.id])}" for sp in net.species]
    for rx in net.reactions:
        lhs = _side(net, rx.reactants, rx.promoters, rx.reverse_promoters)
        rhs = _side(net, rx.products)
        arrow = "<->" if rx.reversible else "->"
        rates = _fmt_num(rx.k_fwd)
        if rx.reversible:
            rates += ", " + _fmt_num(rx.k_bwd)
        out.append(f"{rx.name}: {lhs} {arrow} {rhs} @ {rates}")
    if doc.declared_input is not None:
        out.append(f"input {doc.declared_input}")
    if doc.declared_output is not None:
        out.append(f"output {doc.declared_output}")
    return "\n".join(out) + ("\n" if out else "")

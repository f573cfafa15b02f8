"""Propositions, contexts, and the surface language.

Surface syntax summary:

  A >-> B      implication taking its argument from the left end of the context
  A ->> B      implication taking its argument from the right end
  A * B        ordered pair (contexts concatenate)
  A & B        alternative conjunction (contexts must agree)
  A + B        disjunction
  1[m]         unit at mode m
  up[m] A      raises A to the higher mode m
  down[m] A    lowers A to mode m

Precedence, tightest first: shifts, `*`, `&`/`+`, implications.  Implications
associate to the right, `*` and the `&`/`+` tier to the left.

Contexts are written `(x : A) (y : B)`; the empty context is `.`.
Signature files declare `mode U {W, CL, CR, ML, MR}`, `order U > L`,
`atom P @ L`; `%` starts a comment.  Derivations are s-expressions whose
per-rule layouts live in the tables at the bottom of this module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .errors import ModeMismatch, ParseError, ShiftViolation, UnknownAtom, UnknownMode
from .modes import ModeTheory, StructuralProperty, validate


# --- propositions ---

@dataclass(frozen=True)
class Atom:
    name: str
    mode: str


@dataclass(frozen=True)
class LeftImp:
    """A >-> B: consumes its argument from the left end of the context."""
    arg: "Prop"
    result: "Prop"


@dataclass(frozen=True)
class RightImp:
    """A ->> B: consumes its argument from the right end of the context."""
    arg: "Prop"
    result: "Prop"


@dataclass(frozen=True)
class With:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Plus:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class Fuse:
    left: "Prop"
    right: "Prop"


@dataclass(frozen=True)
class One:
    mode: str


@dataclass(frozen=True)
class Up:
    """up[mode] body: the body lives at a lower mode than `mode`."""
    mode: str
    body: "Prop"


@dataclass(frozen=True)
class Down:
    """down[mode] body: the body lives at a higher mode than `mode`."""
    mode: str
    body: "Prop"


Prop = Atom | LeftImp | RightImp | With | Plus | Fuse | One | Up | Down


def mode_of(p: Prop) -> str:
    """The mode of a proposition; binary connectives share their left child's."""
    match p:
        case Atom(_, m) | One(m) | Up(m, _) | Down(m, _):
            return m
        case LeftImp(a, _) | RightImp(a, _) | With(a, _) | Plus(a, _) | Fuse(a, _):
            return mode_of(a)
    raise TypeError(f"not a proposition: {p!r}")


def prop_size(p: Prop) -> int:
    match p:
        case Atom() | One():
            return 1
        case Up(_, b) | Down(_, b):
            return 1 + prop_size(b)
        case LeftImp(a, b) | RightImp(a, b) | With(a, b) | Plus(a, b) | Fuse(a, b):
            return 1 + prop_size(a) + prop_size(b)
    raise TypeError(f"not a proposition: {p!r}")


def check_prop(theory: ModeTheory, p: Prop, atoms: Optional[Mapping[str, str]] = None) -> str:
    """Check well-formedness of p against the theory and return its mode.

    Binary connectives must agree on their children's modes; shift targets
    must respect the preorder.  When an atom table is supplied, atoms must be
    declared at the mode they carry.
    """
    match p:
        case Atom(name, m):
            if m not in theory.modes:
                raise UnknownMode(m)
            if atoms is not None:
                if name not in atoms:
                    raise UnknownAtom(name)
                if atoms[name] != m:
                    raise ModeMismatch(p, atoms[name], m)
            return m
        case One(m):
            if m not in theory.modes:
                raise UnknownMode(m)
            return m
        case Up(m, body):
            if m not in theory.modes:
                raise UnknownMode(m)
            l = check_prop(theory, body, atoms)
            if not theory.leq(m, l):
                raise ShiftViolation(p, m, l)
            return m
        case Down(m, body):
            if m not in theory.modes:
                raise UnknownMode(m)
            k = check_prop(theory, body, atoms)
            if not theory.leq(k, m):
                raise ShiftViolation(p, k, m)
            return m
        case LeftImp(a, b) | RightImp(a, b) | With(a, b) | Plus(a, b) | Fuse(a, b):
            ma = check_prop(theory, a, atoms)
            mb = check_prop(theory, b, atoms)
            if ma != mb:
                raise ModeMismatch(p, ma, mb)
            return ma
    raise TypeError(f"not a proposition: {p!r}")


# --- contexts ---

@dataclass(frozen=True)
class Hyp:
    var: str
    prop: Prop


OrderedContext = tuple[Hyp, ...]
UnorderedContext = dict[str, Prop]


def ctx_vars(ctx: OrderedContext) -> list[str]:
    return [h.var for h in ctx]


def ctx_consistent(ctx: OrderedContext) -> bool:
    """All occurrences of a variable must label the same proposition."""
    seen: dict[str, Prop] = {}
    for h in ctx:
        if h.var in seen and seen[h.var] != h.prop:
            return False
        seen[h.var] = h.prop
    return True


def gamma_of(ctx: OrderedContext) -> UnorderedContext:
    gamma: UnorderedContext = {}
    for h in ctx:
        if h.var in gamma and gamma[h.var] != h.prop:
            raise ValueError(f"variable {h.var} labels two different propositions")
        gamma[h.var] = h.prop
    return gamma


def gamma_extend(gamma: UnorderedContext, var: str, prop: Prop) -> UnorderedContext:
    new = dict(gamma)
    new[var] = prop
    return new


def context_geq(theory: ModeTheory, ctx: OrderedContext, m: str) -> bool:
    """Independence: every hypothesis mode dominates m."""
    return all(theory.leq(mode_of(h.prop), m) for h in ctx)


def gamma_geq(theory: ModeTheory, gamma: UnorderedContext, m: str) -> bool:
    return all(theory.leq(mode_of(p), m) for p in gamma.values())


# --- generic derivation node (sequent, natural deduction, and skeleton trees) ---

@dataclass(frozen=True)
class Node:
    rule: str
    args: tuple = ()
    subs: tuple["Node", ...] = ()

    def size(self) -> int:
        return 1 + sum(s.size() for s in self.subs)


def node_names(d: Node) -> set[str]:
    """All variable names mentioned anywhere in a derivation's arguments."""
    out: set[str] = set()
    for a in d.args:
        if isinstance(a, str):
            out.add(a)
        elif isinstance(a, tuple) and a and isinstance(a[0], str):
            out.update(x for x in a if isinstance(x, str))
    for s in d.subs:
        out |= node_names(s)
    return out


class NameGen:
    """Fresh variable names with a reserved underscore prefix.

    Seeded with every name already in play so generated names never collide,
    even with user-written underscore names.
    """

    def __init__(self, avoid: Iterator[str] | set[str] = ()):  # type: ignore[assignment]
        self.taken = set(avoid)
        self.counter = 0

    def fresh(self, base: str = "x") -> str:
        base = base.lstrip("_") or "x"
        while True:
            self.counter += 1
            name = f"_{base}{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


# --- lexer ---

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>%[^\n]*)
      | (?P<nl>\n)
      | (?P<arrow2>->>)
      | (?P<arrow1>>->)
      | (?P<turnstile>\|-)
      | (?P<int>\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<sym>[*&+()\[\]{}:.=>,@\#])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str  # "ident" | "int" | literal symbol text | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(line, col, f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(s)
        elif kind == "ident":
            toks.append(Tok("ident", s, line, col))
            col += len(s)
        elif kind == "int":
            toks.append(Tok("int", s, line, col))
            col += len(s)
        else:
            toks.append(Tok(s, s, line, col))
            col += len(s)
        i = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


class _P:
    def __init__(self, toks: list[Tok], atoms: Optional[Mapping[str, str]]):
        self.toks = toks
        self.i = 0
        self.atoms = atoms

    def peek(self) -> Tok:
        return self.toks[self.i]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> Tok:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(t.line, t.col, f"expected {kind!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def fail(self, message: str):
        t = self.peek()
        raise ParseError(t.line, t.col, message)

    def at_ident(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text == word

    # propositions, by descending precedence tier

    def prop(self) -> Prop:
        return self.imp()

    def imp(self) -> Prop:
        left = self.addtier()
        t = self.peek()
        if t.kind == "->>":
            self.next()
            return RightImp(left, self.imp())
        if t.kind == ">->":
            self.next()
            return LeftImp(left, self.imp())
        return left

    def addtier(self) -> Prop:
        p = self.multier()
        while self.peek().kind in ("&", "+"):
            op = self.next().kind
            q = self.multier()
            p = With(p, q) if op == "&" else Plus(p, q)
        return p

    def multier(self) -> Prop:
        p = self.shift()
        while self.peek().kind == "*":
            self.next()
            p = Fuse(p, self.shift())
        return p

    def shift(self) -> Prop:
        t = self.peek()
        if t.kind == "ident" and t.text in ("up", "down"):
            self.next()
            self.expect("[")
            mode = self.expect("ident").text
            self.expect("]")
            body = self.shift()
            return Up(mode, body) if t.text == "up" else Down(mode, body)
        return self.atom()

    def atom(self) -> Prop:
        t = self.peek()
        if t.kind == "(":
            self.next()
            p = self.prop()
            tt = self.peek()
            if tt.kind != ")":
                raise ParseError(tt.line, tt.col, "unclosed parenthesis")
            self.next()
            return p
        if t.kind == "int" and t.text == "1":
            self.next()
            self.expect("[")
            mode = self.expect("ident").text
            self.expect("]")
            return One(mode)
        if t.kind == "ident":
            name = self.next().text
            if self.atoms is not None:
                if name not in self.atoms:
                    raise ParseError(t.line, t.col, f"atom {name} is not declared")
                return Atom(name, self.atoms[name])
            self.fail(f"atom {name} used without a signature")
        self.fail(f"expected a proposition, found {t.text or 'end of input'!r}")

    # contexts

    def context(self) -> OrderedContext:
        if self.peek().kind == ".":
            self.next()
            return ()
        hyps: list[Hyp] = []
        while self.peek().kind == "(":
            self.next()
            var = self.expect("ident").text
            self.expect(":")
            prop = self.prop()
            self.expect(")")
            hyps.append(Hyp(var, prop))
        if not hyps:
            self.fail("expected a context: '(x : A) ...' or '.'")
        ctx = tuple(hyps)
        if not ctx_consistent(ctx):
            t = self.peek()
            raise ParseError(t.line, t.col, "a variable labels two different propositions")
        return ctx

    # derivation s-expressions

    def sexp(self, layouts: Mapping[str, tuple[str, ...]]) -> Node:
        open_t = self.expect("(")
        t = self.expect("ident")
        rule = t.text
        if rule not in layouts:
            raise ParseError(t.line, t.col, f"unknown rule {rule!r}")
        args: list = []
        subs: list[Node] = []
        for kind in layouts[rule]:
            if kind == "sub":
                subs.append(self.sexp(layouts))
            elif kind == "name":
                args.append(self.expect("ident").text)
            elif kind == "int":
                args.append(int(self.expect("int").text))
            elif kind == "prin":
                name = self.expect("ident").text
                occ = 0
                if self.peek().kind == "#":
                    self.next()
                    occ = int(self.expect("int").text)
                args.append((name, occ))
            elif kind == "prop":
                self.expect("{")
                args.append(self.prop())
                self.expect("}")
            elif kind == "pair":
                self.expect("(")
                a = self.expect("ident").text
                b = self.expect("ident").text
                self.expect(")")
                args.append((a, b))
            else:  # pragma: no cover
                raise AssertionError(kind)
        tt = self.peek()
        if tt.kind != ")":
            raise ParseError(tt.line, tt.col, f"too many arguments for rule {rule!r}")
        self.next()
        _ = open_t
        return Node(rule, tuple(args), tuple(subs))


# --- printers ---

def print_prop(p: Prop) -> str:
    # tiers: 0 implications, 1 &/+, 2 *, 3 shifts, 4 atoms
    def go(p: Prop, level: int) -> str:
        match p:
            case Atom(name, _):
                s, mine = name, 4
            case One(m):
                s, mine = f"1[{m}]", 4
            case Up(m, body):
                s, mine = f"up[{m}] {go(body, 3)}", 3
            case Down(m, body):
                s, mine = f"down[{m}] {go(body, 3)}", 3
            case Fuse(a, b):
                s, mine = f"{go(a, 2)} * {go(b, 3)}", 2
            case With(a, b):
                s, mine = f"{go(a, 1)} & {go(b, 2)}", 1
            case Plus(a, b):
                s, mine = f"{go(a, 1)} + {go(b, 2)}", 1
            case RightImp(a, b):
                s, mine = f"{go(a, 1)} ->> {go(b, 0)}", 0
            case LeftImp(a, b):
                s, mine = f"{go(a, 1)} >-> {go(b, 0)}", 0
            case _:  # pragma: no cover
                raise TypeError(f"not a proposition: {p!r}")
        return f"({s})" if mine < level else s

    return go(p, 0)


def print_context(ctx: OrderedContext) -> str:
    if not ctx:
        return "."
    return " ".join(f"({h.var} : {print_prop(h.prop)})" for h in ctx)


def print_node(d: Node, layouts: Mapping[str, tuple[str, ...]]) -> str:
    layout = layouts[d.rule]
    parts = [d.rule]
    ai = 0
    si = 0
    for kind in layout:
        if kind == "sub":
            parts.append(print_node(d.subs[si], layouts))
            si += 1
            continue
        a = d.args[ai]
        ai += 1
        if kind == "name":
            parts.append(a)
        elif kind == "int":
            parts.append(str(a))
        elif kind == "prin":
            name, occ = a
            parts.append(name if occ == 0 else f"{name}#{occ}")
        elif kind == "prop":
            parts.append("{" + print_prop(a) + "}")
        elif kind == "pair":
            parts.append(f"({a[0]} {a[1]})")
    return "(" + " ".join(parts) + ")"


# --- per-rule s-expression layouts ---

SEQ_LAYOUT: dict[str, tuple[str, ...]] = {
    "id": ("name",),
    "impRr": ("name", "sub"),
    "impRl": ("name", "sub"),
    "impLr": ("prin", "int", "sub", "name", "sub"),
    "impLl": ("prin", "int", "sub", "name", "sub"),
    "fuseR": ("int", "sub", "sub"),
    "fuseL": ("prin", "name", "name", "sub"),
    "oneR": (),
    "oneL": ("prin", "sub"),
    "plusR1": ("sub",),
    "plusR2": ("sub",),
    "plusL": ("prin", "name", "sub", "sub"),
    "withR": ("sub", "sub"),
    "withL1": ("prin", "name", "sub"),
    "withL2": ("prin", "name", "sub"),
    "upR": ("sub",),
    "upL": ("prin", "name", "sub"),
    "downR": ("sub",),
    "downL": ("prin", "name", "sub"),
    "cut": ("int", "int", "name", "prop", "sub", "sub"),
    "weak": ("name", "int", "sub"),
    "mobL": ("int", "int", "sub"),
    "mobR": ("int", "int", "sub"),
    "contrL": ("int", "int", "sub"),
    "contrR": ("int", "int", "sub"),
}

ND_LAYOUT: dict[str, tuple[str, ...]] = {
    "hyp": ("name",),
    "oneI": (),
    "oneE": ("prop", "int", "sub", "sub"),
    "fuseI": ("sub", "sub"),
    "fuseE": ("prop", "int", "sub", "pair", "sub"),
    "plusI1": ("sub",),
    "plusI2": ("sub",),
    "plusE": ("prop", "int", "sub", "name", "sub", "sub"),
    "withI": ("sub", "sub"),
    "withE1": ("prop", "sub"),
    "withE2": ("prop", "sub"),
    "impRI": ("name", "sub"),
    "impLI": ("name", "sub"),
    "impRE": ("prop", "sub", "sub"),
    "impLE": ("prop", "sub", "sub"),
    "upI": ("sub",),
    "upE": ("prop", "sub"),
    "downI": ("sub",),
    "downE": ("prop", "int", "sub", "name", "sub"),
    "weak": ("name", "int", "sub"),
    "mobL": ("int", "int", "sub"),
    "mobR": ("int", "int", "sub"),
    "contrL": ("int", "int", "sub"),
    "contrR": ("int", "int", "sub"),
}

SKELETON_LAYOUT: dict[str, tuple[str, ...]] = {
    "hyp": ("name",),
    "impRI": ("name", "sub"),
    "impLI": ("name", "sub"),
    "impRE": ("sub", "sub"),
    "impLE": ("sub", "sub"),
    "fuseI": ("sub", "sub"),
    "fuseE": ("sub", "pair", "sub"),
    "oneI": (),
    "oneE": ("sub", "sub"),
    "withI": ("sub", "sub"),
    "withE1": ("sub",),
    "withE2": ("sub",),
    "plusI1": ("sub",),
    "plusI2": ("sub",),
    "plusE": ("sub", "name", "sub", "sub"),
    "upI": ("sub",),
    "upE": ("sub",),
    "downI": ("sub",),
    "downE": ("sub", "name", "sub"),
}


# --- entry points for single phrases ---

def _finish(p: _P, value):
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(t.line, t.col, f"trailing input starting at {t.text!r}")
    return value


def parse_prop(text: str, atoms: Mapping[str, str]) -> Prop:
    p = _P(tokenize(text), atoms)
    return _finish(p, p.prop())


def parse_context(text: str, atoms: Mapping[str, str]) -> OrderedContext:
    p = _P(tokenize(text), atoms)
    return _finish(p, p.context())


def parse_sequent(text: str, atoms: Mapping[str, str]) -> tuple[OrderedContext, Prop]:
    p = _P(tokenize(text), atoms)
    ctx = p.context()
    p.expect("|-")
    goal = p.prop()
    return _finish(p, (ctx, goal))


def parse_derivation(text: str, atoms: Mapping[str, str], layouts: Mapping[str, tuple[str, ...]]) -> Node:
    p = _P(tokenize(text), atoms)
    return _finish(p, p.sexp(layouts))


# --- signature + theorem files ---

@dataclass(frozen=True)
class Signature:
    theory: ModeTheory
    atoms: Mapping[str, str]


@dataclass(frozen=True)
class TheoremDecl:
    name: str
    ctx: OrderedContext
    goal: Prop


@dataclass(frozen=True)
class ProofBlock:
    name: str
    tag: str  # "seq" | "nd" | "skeleton"
    deriv: Node


_TAG_LAYOUTS = {"seq": SEQ_LAYOUT, "nd": ND_LAYOUT, "skeleton": SKELETON_LAYOUT}


@dataclass(frozen=True)
class SourceFile:
    signature: Signature
    theorems: tuple[TheoremDecl, ...]
    proofs: tuple[ProofBlock, ...]


def parse_file(text: str, *, complete_sigma: bool = False) -> SourceFile:
    """Parse a whole `.oal` file: signature items, theorems, proof blocks."""
    toks = tokenize(text)
    p = _P(toks, None)
    mode_decls: list[tuple[str, list[StructuralProperty]]] = []
    order_decls: list[tuple[str, str]] = []
    atoms: dict[str, str] = {}
    raw_thms: list[tuple[str, int]] = []  # (name, token index of context start)
    theorems: list[TheoremDecl] = []
    proofs: list[ProofBlock] = []

    # two phases: scan signature items first so props can be parsed with atoms
    items: list[tuple[str, int]] = []
    while p.peek().kind != "eof":
        t = p.peek()
        if t.kind != "ident":
            raise ParseError(t.line, t.col, f"expected a declaration, found {t.text!r}")
        word = t.text
        start = p.i
        if word == "mode":
            p.next()
            name = p.expect("ident").text
            p.expect("{")
            props: list[StructuralProperty] = []
            if p.peek().kind != "}":
                while True:
                    pt = p.expect("ident")
                    try:
                        props.append(StructuralProperty[pt.text])
                    except KeyError:
                        raise ParseError(pt.line, pt.col,
                                         f"unknown structural property {pt.text!r}") from None
                    if p.peek().kind == ",":
                        p.next()
                        continue
                    break
            p.expect("}")
            mode_decls.append((name, props))
        elif word == "order":
            p.next()
            a = p.expect("ident").text
            p.expect(">")
            b = p.expect("ident").text
            order_decls.append((a, b))
        elif word == "atom":
            p.next()
            name = p.expect("ident").text
            p.expect("@")
            mode = p.expect("ident").text
            if name in atoms:
                raise ParseError(t.line, t.col, f"atom {name} declared twice")
            atoms[name] = mode
        elif word == "thm":
            p.next()
            name = p.expect("ident").text
            p.expect(":")
            items.append(("thm:" + name, p.i))
            _skip_until_keyword(p)
        elif word == "proof":
            p.next()
            name = p.expect("ident").text
            p.expect(":")
            tagt = p.expect("ident")
            if tagt.text not in _TAG_LAYOUTS:
                raise ParseError(tagt.line, tagt.col,
                                 f"proof tag must be seq, nd, or skeleton, not {tagt.text!r}")
            p.expect("=")
            items.append((f"proof:{name}:{tagt.text}", p.i))
            _skip_until_keyword(p, stop_at_end=True)
        else:
            raise ParseError(t.line, t.col, f"unknown declaration {word!r}")
        _ = start, raw_thms

    theory = validate(mode_decls, order_decls, complete_sigma=complete_sigma)
    for name, mode in atoms.items():
        if mode not in theory.modes:
            raise UnknownMode(mode)
    sig = Signature(theory=theory, atoms=atoms)

    for label, idx in items:
        q = _P(toks, atoms)
        q.i = idx
        if label.startswith("thm:"):
            name = label[4:]
            ctx = q.context()
            q.expect("|-")
            goal = q.prop()
            theorems.append(TheoremDecl(name, ctx, goal))
        else:
            _, name, tag = label.split(":")
            deriv = q.sexp(_TAG_LAYOUTS[tag])
            et = q.peek()
            if not (et.kind == "ident" and et.text == "end"):
                raise ParseError(et.line, et.col, "expected 'end' after the proof body")
            proofs.append(ProofBlock(name, tag, deriv))

    names = [t.name for t in theorems]
    if len(names) != len(set(names)):
        dup = next(n for n in names if names.count(n) > 1)
        raise ParseError(0, 0, f"theorem {dup} declared twice")
    return SourceFile(signature=sig, theorems=tuple(theorems), proofs=tuple(proofs))


_KEYWORDS = {"mode", "order", "atom", "thm", "proof"}


def _skip_until_keyword(p: _P, stop_at_end: bool = False):
    depth = 0
    while p.peek().kind != "eof":
        t = p.peek()
        if t.kind == "(":
            depth += 1
        elif t.kind == ")":
            depth -= 1
        elif depth == 0 and t.kind == "ident":
            if stop_at_end and t.text == "end":
                p.next()
                return
            if not stop_at_end and t.text in _KEYWORDS:
                return
        p.next()
    if stop_at_end:
        t = p.peek()
        raise ParseError(t.line, t.col, "missing 'end' after proof body")

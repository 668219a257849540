"""The input document format: named pc groups, free-nilpotent shorthands,
extensions, and command defaults.

Line-oriented grammar, '#' comments:

    pcgroup NAME { gen g [W]; order g K; conj gj gi = WORD;
                   conj gj gi^-1 = WORD; pow g = WORD; }
    free NAME rank=K class=C;
    extension NAME { fiber F; base B; act t: a -> WORD, b -> WORD; }
    set class C; | set primes P1,P2; | set bound B;

WORD is juxtaposed factors g or g^E (E possibly negative); "1" is the empty
word; `order g 0` declares infinite relative order (the default).

Documents resolve and build at load time: presentations must pass their
consistency check and extensions must assemble.  Parsing a rendered
document yields an identical model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import DocumentError, DuplicateName, ParseError, UnknownName
from .extensions import SplitExtension, action_from_images, build_semidirect
from .freenil import free_nilpotent_pcp
from .pcengine import PcPresentation, consistency_check
from .errors import Inconsistent

_TOKEN = re.compile(r"->|[{};=:,]|[A-Za-z0-9_.][A-Za-z0-9_.^\-]*")


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


def _tokenize(text):
    tokens = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(line, pos)
            if not m:
                raise ParseError(
                    f"unexpected character {line[pos]!r}", line=ln, column=pos + 1
                )
            tokens.append(Token(m.group(), ln, pos + 1))
            pos = m.end()
    return tokens


@dataclass(frozen=True)
class PcGroupDef:
    name: str
    gens: tuple  # (name, weight or None)
    orders: tuple  # (gen name, k)
    conjs: tuple  # (gj, gi, eps, word pairs)
    pows: tuple  # (gen name, word pairs)


@dataclass(frozen=True)
class FreeDef:
    name: str
    rank: int
    nil_class: int


@dataclass(frozen=True)
class ExtensionDef:
    name: str
    fiber: str
    base: str
    acts: tuple  # (base gen, ((fiber gen, word pairs), ...))


@dataclass
class Document:
    groups: dict = field(default_factory=dict)  # name -> def
    extensions: dict = field(default_factory=dict)
    defaults: dict = field(default_factory=dict)
    built_groups: dict = field(default_factory=dict, compare=False)
    built_extensions: dict = field(default_factory=dict, compare=False)

    def __eq__(self, other):
        return (
            isinstance(other, Document)
            and self.groups == other.groups
            and self.extensions == other.extensions
            and self.defaults == other.defaults
        )

    def group(self, name) -> PcPresentation:
        if name not in self.built_groups:
            raise UnknownName(f"no group named {name}")
        return self.built_groups[name]

    def extension(self, name) -> SplitExtension:
        if name not in self.built_extensions:
            raise UnknownName(f"no extension named {name}")
        return self.built_extensions[name]

    def render(self) -> str:
        out = []
        for d in self.groups.values():
            if isinstance(d, FreeDef):
                out.append(f"free {d.name} rank={d.rank} class={d.nil_class};")
                continue
            out.append(f"pcgroup {d.name} {{")
            for g, w in d.gens:
                out.append(f"  gen {g}{'' if w is None else ' ' + str(w)};")
            for g, k in d.orders:
                out.append(f"  order {g} {k};")
            for g, word in d.pows:
                out.append(f"  pow {g} = {_render_word(word)};")
            for gj, gi, eps, word in d.conjs:
                lhs = gi if eps == 1 else f"{gi}^-1"
                out.append(f"  conj {gj} {lhs} = {_render_word(word)};")
            out.append("}")
        for d in self.extensions.values():
            out.append(f"extension {d.name} {{")
            out.append(f"  fiber {d.fiber};")
            out.append(f"  base {d.base};")
            for bgen, pairs in d.acts:
                imgs = ", ".join(f"{fg} -> {_render_word(w)}" for fg, w in pairs)
                out.append(f"  act {bgen}: {imgs};")
            out.append("}")
        for key, value in self.defaults.items():
            if key == "primes":
                out.append(f"set primes {','.join(str(p) for p in value)};")
            else:
                out.append(f"set {key} {value};")
        return "\n".join(out) + "\n"


def _render_word(pairs):
    if not pairs:
        return "1"
    return " ".join(g if e == 1 else f"{g}^{e}" for g, e in pairs)


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expect=None):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("", 1, 1)
            raise ParseError(
                f"unexpected end of input{'; expected ' + expect if expect else ''}",
                line=last.line,
                column=last.column,
            )
        if expect is not None and tok.text != expect:
            raise ParseError(
                f"expected {expect!r}, found {tok.text!r}", line=tok.line, column=tok.column
            )
        self.pos += 1
        return tok

    def ident(self, what="name"):
        tok = self.next(expect=None)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", tok.text):
            raise ParseError(
                f"expected {what}, found {tok.text!r}", line=tok.line, column=tok.column
            )
        return tok

    def integer(self):
        tok = self.next()
        try:
            return int(tok.text)
        except ValueError:
            raise ParseError(
                f"expected an integer, found {tok.text!r}", line=tok.line, column=tok.column
            ) from None

    def word(self, stop_tokens):
        """Factors g or g^E until one of stop_tokens; '1' is the identity."""
        pairs = []
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unterminated word; expected ';'", line=0, column=0)
            if tok.text in stop_tokens:
                break
            self.pos += 1
            if tok.text == "1" and not pairs:
                continue
            if "^" in tok.text:
                name, _, exp = tok.text.partition("^")
                try:
                    e = int(exp)
                except ValueError:
                    raise ParseError(
                        f"bad exponent in {tok.text!r}", line=tok.line, column=tok.column
                    ) from None
            else:
                name, e = tok.text, 1
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", name):
                raise ParseError(
                    f"bad word factor {tok.text!r}", line=tok.line, column=tok.column
                )
            pairs.append(((name, tok.line, tok.column), e))
        return tuple(pairs)


def parse_document(text: str) -> Document:
    """Parse and build; diagnostics carry line and column positions."""
    parser = _Parser(text)
    doc = Document()
    while parser.peek() is not None:
        tok = parser.next()
        if tok.text == "pcgroup":
            _parse_pcgroup(parser, doc)
        elif tok.text == "free":
            _parse_free(parser, doc)
        elif tok.text == "extension":
            _parse_extension(parser, doc)
        elif tok.text == "set":
            _parse_set(parser, doc)
        else:
            raise ParseError(
                f"expected 'pcgroup', 'free', 'extension' or 'set', found {tok.text!r}",
                line=tok.line,
                column=tok.column,
            )
    _build(doc)
    return doc


def _register(doc, name_tok):
    name = name_tok.text
    if name in doc.groups or name in doc.extensions:
        raise DuplicateName(
            f"name {name!r} already defined", line=name_tok.line, column=name_tok.column
        )
    return name


def _parse_pcgroup(parser, doc):
    name_tok = parser.ident()
    name = _register(doc, name_tok)
    parser.next(expect="{")
    gens, orders, conjs, pows = [], [], [], []
    while parser.peek() and parser.peek().text != "}":
        head = parser.next()
        if head.text == "gen":
            g = parser.ident("generator").text
            w = None
            if parser.peek().text != ";":
                w = parser.integer()
            parser.next(expect=";")
            gens.append((g, w))
        elif head.text == "order":
            g = parser.ident("generator").text
            k = parser.integer()
            parser.next(expect=";")
            orders.append((g, k))
        elif head.text == "conj":
            gj = parser.ident("generator").text
            tok = parser.next()
            if tok.text.endswith("^-1"):
                gi, eps = tok.text[:-3], -1
            else:
                gi, eps = tok.text, 1
            parser.next(expect="=")
            word = parser.word({";"})
            parser.next(expect=";")
            conjs.append((gj, (gi, tok.line, tok.column), eps, word))
        elif head.text == "pow":
            g = parser.ident("generator").text
            parser.next(expect="=")
            word = parser.word({";"})
            parser.next(expect=";")
            pows.append((g, word))
        else:
            raise ParseError(
                f"expected 'gen', 'order', 'conj' or 'pow', found {head.text!r}",
                line=head.line,
                column=head.column,
            )
    parser.next(expect="}")
    doc.groups[name] = PcGroupDef(
        name,
        tuple(gens),
        tuple(orders),
        tuple(_strip_conj(c) for c in conjs),
        tuple((g, _strip_word(w)) for g, w in pows),
    )
    doc.groups[name] = _resolve_pcgroup(doc.groups[name], gens, orders, conjs, pows)


def _strip_word(word):
    return tuple((g[0], e) for g, e in word)


def _strip_conj(c):
    gj, gi, eps, word = c
    return (gj, gi[0], eps, _strip_word(word))


def _resolve_pcgroup(defn, gens, orders, conjs, pows):
    known = {g for g, _ in gens}
    for g, k in orders:
        if g not in known:
            raise UnknownName(f"order declared for unknown generator {g!r}")
    for gj, gi, eps, word in conjs:
        gi_name, line, col = gi
        if gj not in known:
            raise UnknownName(f"unknown generator {gj!r}", line=line, column=col)
        if gi_name not in known:
            raise UnknownName(f"unknown generator {gi_name!r}", line=line, column=col)
        for (g, gl, gc), _ in word:
            if g not in known:
                raise UnknownName(f"unknown generator {g!r}", line=gl, column=gc)
    for g, word in pows:
        for (gg, gl, gc), _ in word:
            if gg not in known:
                raise UnknownName(f"unknown generator {gg!r}", line=gl, column=gc)
    return defn


def _parse_free(parser, doc):
    name_tok = parser.ident()
    name = _register(doc, name_tok)
    params = {}
    while parser.peek() and parser.peek().text != ";":
        key = parser.next()
        parser.next(expect="=")
        params[key.text] = parser.integer()
    parser.next(expect=";")
    if set(params) != {"rank", "class"}:
        raise ParseError(
            "free groups need rank=K class=C", line=name_tok.line, column=name_tok.column
        )
    doc.groups[name] = FreeDef(name, params["rank"], params["class"])


def _parse_extension(parser, doc):
    name_tok = parser.ident()
    name = _register(doc, name_tok)
    parser.next(expect="{")
    fiber = base = None
    acts = []
    while parser.peek() and parser.peek().text != "}":
        head = parser.next()
        if head.text == "fiber":
            fiber = parser.ident().text
            parser.next(expect=";")
        elif head.text == "base":
            base = parser.ident().text
            parser.next(expect=";")
        elif head.text == "act":
            bgen = parser.ident("base generator").text
            parser.next(expect=":")
            pairs = []
            while True:
                fgen = parser.ident("fiber generator").text
                parser.next(expect="->")
                word = parser.word({",", ";"})
                pairs.append((fgen, _strip_word(word)))
                if parser.peek().text == ",":
                    parser.next()
                    continue
                break
            parser.next(expect=";")
            acts.append((bgen, tuple(pairs)))
        else:
            raise ParseError(
                f"expected 'fiber', 'base' or 'act', found {head.text!r}",
                line=head.line,
                column=head.column,
            )
    parser.next(expect="}")
    if fiber is None or base is None:
        raise ParseError(
            f"extension {name!r} needs fiber and base",
            line=name_tok.line,
            column=name_tok.column,
        )
    doc.extensions[name] = ExtensionDef(name, fiber, base, tuple(acts))


def _parse_set(parser, doc):
    key = parser.ident("setting").text
    if key == "primes":
        primes = [parser.integer()]
        while parser.peek().text == ",":
            parser.next()
            primes.append(parser.integer())
        parser.next(expect=";")
        doc.defaults["primes"] = tuple(primes)
    elif key in ("class", "bound"):
        doc.defaults[key] = parser.integer()
        parser.next(expect=";")
    else:
        raise ParseError(f"unknown setting {key!r}")


def _build(doc: Document):
    for name, d in doc.groups.items():
        if isinstance(d, FreeDef):
            doc.built_groups[name] = free_nilpotent_pcp(d.rank, d.nil_class)
            continue
        gen_names = tuple(g for g, _ in d.gens)
        weights_given = any(w is not None for _, w in d.gens)
        weights = tuple(w if w is not None else 1 for _, w in d.gens) if weights_given else None
        index = {g: i for i, g in enumerate(gen_names)}
        orders = [0] * len(gen_names)
        for g, k in d.orders:
            orders[index[g]] = k
        conj = {}
        for gj, gi, eps, word in d.conjs:
            conj[(index[gi], index[gj], eps)] = tuple((index[g], e) for g, e in word)
        power_rhs = {}
        for g, word in d.pows:
            power_rhs[index[g]] = tuple((index[gg], e) for gg, e in word)
        pres = PcPresentation(
            names=gen_names,
            rel_orders=tuple(orders),
            weights=weights,
            power_rhs=power_rhs,
            conj=conj,
        )
        violations = consistency_check(pres)
        if violations:
            raise Inconsistent(
                f"pcgroup {name!r} fails its consistency check", violations
            )
        doc.built_groups[name] = pres
    for name, d in doc.extensions.items():
        if d.fiber not in doc.built_groups:
            raise UnknownName(f"extension {name!r}: unknown fiber {d.fiber!r}")
        if d.base not in doc.built_groups:
            raise UnknownName(f"extension {name!r}: unknown base {d.base!r}")
        fiber = doc.built_groups[d.fiber]
        base = doc.built_groups[d.base]
        assignments = {}
        for bgen, pairs in d.acts:
            if bgen not in base.index:
                raise UnknownName(f"extension {name!r}: unknown base generator {bgen!r}")
            img = {}
            for fg, word in pairs:
                if fg not in fiber.index:
                    raise UnknownName(
                        f"extension {name!r}: unknown fiber generator {fg!r}"
                    )
                img[fg] = tuple((fiber.index[g], e) for g, e in word)
            assignments[bgen] = img
        action = action_from_images(base, fiber, assignments)
        doc.built_extensions[name] = build_semidirect(fiber, base, action, name=name)

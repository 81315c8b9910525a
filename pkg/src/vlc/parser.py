"""Lexer and recursive-descent parser for VL module files.

Layout is handled with a single rule: a token that starts a line at or left
of the column of the innermost open block (top level, ``let`` bindings,
``case`` alternatives) ends the current item.  Braces and semicolons may be
used instead.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .surface import (
    App,
    Branch,
    Case,
    IntLit,
    Lam,
    Let,
    ListLit,
    PCons,
    PInt,
    PList,
    PPair,
    PVar,
    Pair,
    Span,
    SurfaceModule,
    Term,
    Unversion,
    Var,
    VerOf,
    free_vars,
)


class ParseError(Exception):
    def __init__(self, message: str, span: Span | None = None, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.span = span
        self.expected = expected

    def __str__(self) -> str:
        where = f" at {self.span}" if self.span else ""
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.args[0]}{where}{exp}"


class DuplicateDefinition(ParseError):
    pass


class RecursiveDefinition(ParseError):
    pass


KEYWORDS = {
    "module", "where", "import", "let", "in", "case", "of",
    "if", "then", "else", "ver", "unversion",
}

BINOPS = {
    "||": (2, "right"),
    "&&": (3, "right"),
    "==": (4, "none"),
    "/=": (4, "none"),
    "<": (4, "none"),
    "<=": (4, "none"),
    ">": (4, "none"),
    ">=": (4, "none"),
    ":": (5, "right"),
    "++": (5, "right"),
    "+": (6, "left"),
    "-": (6, "left"),
    "*": (7, "left"),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<lcomment>--[^\n]*)
  | (?P<bcomment>\{-.*?-\})
  | (?P<version>\d+(?:\.\d+)+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[a-z_][A-Za-z0-9_']*)
  | (?P<conid>[A-Z][A-Za-z0-9_']*)
  | (?P<sym>->|\|\||&&|==|/=|<=|>=|\+\+|[\\=(),\[\]{};:<>+\-*])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str
    text: str
    start: int
    end: int
    line: int
    col: int
    first: bool


def tokenize(source: str, path: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    first = True
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", Span(pos, pos + 1, path))
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
            first = True
        elif kind == "bcomment":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rfind("\n") + 1
        elif kind not in ("ws", "lcomment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, pos, m.end(), line, pos - line_start + 1, first))
            first = False
        pos = m.end()
    tokens.append(Token("eof", "", len(source), len(source), line, 1, True))
    return tokens


_STOP_SYMS = {")", "]", "}", ",", ";", "->", "="}
_STOP_KWS = {"in", "then", "else", "of", "where"}


class Parser:
    def __init__(self, source: str, path: str | None = None):
        self.source = source
        self.path = path
        self.toks = tokenize(source, path)
        self.i = 0
        self.layout: list[int] = [1]
        self.fresh = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def span_from(self, start: int) -> Span:
        end = self.toks[self.i - 1].end if self.i > 0 else start
        return Span(start, max(start, end), self.path)

    def error(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        t = self.tok
        return ParseError(message, Span(t.start, t.end, self.path), expected)

    def at_boundary(self) -> bool:
        t = self.tok
        return t.kind == "eof" or (t.first and t.col <= self.layout[-1])

    def is_sym(self, text: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == text and not self.at_boundary()

    def is_kw(self, text: str) -> bool:
        return self.tok.kind == "kw" and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect_sym(self, text: str) -> Token:
        if not (self.tok.kind == "sym" and self.tok.text == text):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", (repr(text),))
        return self.advance()

    def expect_kw(self, text: str) -> Token:
        if not self.is_kw(text):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", (repr(text),))
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", ("identifier",))
        return self.advance()

    def expect_conid(self) -> Token:
        if self.tok.kind != "conid":
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", ("module name",))
        return self.advance()

    # -- module --------------------------------------------------------------

    def parse_module(self) -> SurfaceModule:
        self.expect_kw("module")
        name = self.expect_conid().text
        self.expect_kw("where")
        imports: list[str] = []
        while self.is_kw("import"):
            self.advance()
            imports.append(self.expect_conid().text)
        defs: list[tuple[str, Term]] = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            if not self.tok.first or self.tok.col != 1:
                raise self.error("definitions must start in the first column")
            start = self.tok.start
            symbol, body = self.parse_binding()
            if symbol in seen:
                raise DuplicateDefinition(f"duplicate definition of {symbol}", Span(start, start + len(symbol), self.path))
            seen.add(symbol)
            defs.append((symbol, body))
        module = SurfaceModule(name, tuple(imports), tuple(defs), path=self.path)
        check_no_recursion(module)
        return module

    def parse_binding(self) -> tuple[str, Term]:
        start = self.tok.start
        name_tok = self.expect_ident()
        params: list[str] = []
        while not self.is_sym("="):
            params.append(self.parse_param())
        self.expect_sym("=")
        self.layout.append(self.layout[-1] + 1 if name_tok.first else name_tok.col + 1)
        body = self.parse_expr()
        self.layout.pop()
        for param in reversed(params):
            body = Lam(param, body, self.span_from(start))
        return name_tok.text, body

    def parse_param(self) -> str:
        if self.tok.kind == "ident":
            return self.advance().text
        if self.is_sym("(") and self.toks[self.i + 1].text == ")":
            self.advance()
            self.advance()
            return "_"
        raise self.error("bad parameter", ("identifier", "()"))

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Term:
        t = self.tok
        if t.kind == "sym" and t.text == "\\" and not self.at_boundary():
            return self.parse_lambda()
        if t.kind == "kw" and not self.at_boundary():
            if t.text == "let":
                return self.parse_let()
            if t.text == "if":
                return self.parse_if()
            if t.text == "case":
                return self.parse_case()
            if t.text == "ver":
                return self.parse_ver()
        return self.parse_op(0)

    def parse_lambda(self) -> Term:
        start = self.advance().start
        binders: list[object] = []
        while not self.is_sym("->"):
            if self.tok.kind == "ident":
                binders.append(self.advance().text)
            elif self.is_sym("(") and self.toks[self.i + 1].text == ")":
                self.advance()
                self.advance()
                binders.append("_")
            else:
                binders.append(self.parse_apattern())
        if not binders:
            raise self.error("lambda without binder", ("identifier",))
        self.expect_sym("->")
        body = self.parse_expr()
        for b in reversed(binders):
            if isinstance(b, str):
                body = Lam(b, body, self.span_from(start))
            else:
                tmp = f"_p{self.fresh}"
                self.fresh += 1
                sp = self.span_from(start)
                body = Lam(tmp, Case(Var(tmp, sp), (Branch(b, body, sp),), sp), sp)
        return body

    def parse_let(self) -> Term:
        start = self.advance().start
        bindings: list[tuple[str, Term, int]] = []
        if self.is_sym("{"):
            self.advance()
            self.layout.append(0)
            while True:
                bstart = self.tok.start
                name, bound = self.parse_binding()
                bindings.append((name, bound, bstart))
                if self.tok.kind == "sym" and self.tok.text == ";":
                    self.advance()
                    continue
                break
            self.layout.pop()
            self.expect_sym("}")
        else:
            col = self.tok.col
            self.layout.append(col)
            while True:
                bstart = self.tok.start
                self.layout.append(col)
                name_tok = self.expect_ident()
                params = []
                while not self.is_sym("="):
                    params.append(self.parse_param())
                self.expect_sym("=")
                bound = self.parse_expr()
                for p in reversed(params):
                    bound = Lam(p, bound, self.span_from(bstart))
                self.layout.pop()
                bindings.append((name_tok.text, bound, bstart))
                if self.tok.kind == "sym" and self.tok.text == ";":
                    self.advance()
                    continue
                if self.tok.first and self.tok.col == col and self.tok.kind == "ident":
                    continue
                break
            self.layout.pop()
        self.expect_kw("in")
        body = self.parse_expr()
        for name, bound, _ in reversed(bindings):
            body = Let(name, bound, body, self.span_from(start))
        return body

    def parse_if(self) -> Term:
        start = self.advance().start
        cond = self.parse_expr()
        self.expect_kw("then")
        yes = self.parse_expr()
        self.expect_kw("else")
        no = self.parse_expr()
        sp = self.span_from(start)
        return Case(cond, (Branch(PInt(0, sp), no, sp), Branch(PVar("_", sp), yes, sp)), sp)

    def parse_case(self) -> Term:
        start = self.advance().start
        scrutinee = self.parse_expr()
        self.expect_kw("of")
        branches: list[Branch] = []
        if self.tok.kind == "sym" and self.tok.text == "{":
            self.advance()
            self.layout.append(0)
            while True:
                branches.append(self.parse_alt())
                if self.tok.kind == "sym" and self.tok.text == ";":
                    self.advance()
                    if self.tok.kind == "sym" and self.tok.text == "}":
                        break
                    continue
                break
            self.layout.pop()
            self.expect_sym("}")
        else:
            col = self.tok.col
            self.layout.append(col)
            while True:
                self.layout.append(col)
                branches.append(self.parse_alt())
                self.layout.pop()
                if self.tok.kind == "sym" and self.tok.text == ";":
                    self.advance()
                    continue
                if self.tok.first and self.tok.col == col and self.tok.kind != "eof":
                    continue
                break
            self.layout.pop()
        return Case(scrutinee, tuple(branches), self.span_from(start))

    def parse_alt(self) -> Branch:
        start = self.tok.start
        pat = self.parse_pattern()
        self.expect_sym("->")
        body = self.parse_expr()
        return Branch(pat, body, self.span_from(start))

    def parse_ver(self) -> Term:
        start = self.advance().start
        self.expect_sym("[")
        items: list[tuple[str, str]] = []
        while True:
            module = self.expect_conid().text
            self.expect_sym("=")
            if self.tok.kind not in ("version", "int"):
                raise self.error("expected a version", ("version",))
            items.append((module, self.advance().text))
            if self.tok.kind == "sym" and self.tok.text == ",":
                self.advance()
                continue
            break
        self.expect_sym("]")
        self.expect_kw("of")
        body = self.parse_expr()
        if len({m for m, _ in items}) != len(items):
            raise ParseError("module pinned twice in ver", self.span_from(start))
        return VerOf(tuple(sorted(items)), body, self.span_from(start))

    def parse_op(self, min_prec: int) -> Term:
        start = self.tok.start
        lhs = self.parse_fexp()
        while True:
            t = self.tok
            if t.kind != "sym" or t.text not in BINOPS or self.at_boundary():
                return lhs
            prec, assoc = BINOPS[t.text]
            if prec < min_prec:
                return lhs
            self.advance()
            rhs = self.parse_op(prec + 1 if assoc != "right" else prec)
            sp = self.span_from(start)
            lhs = App(App(Var(t.text, Span(t.start, t.end, self.path)), lhs, sp), rhs, sp)
            if assoc == "none":
                nt = self.tok
                if nt.kind == "sym" and BINOPS.get(nt.text, (None,))[0] == prec and not self.at_boundary():
                    raise self.error("non-associative operators chained")

    def starts_atom(self) -> bool:
        t = self.tok
        if self.at_boundary():
            return False
        if t.kind in ("ident", "int", "string", "version"):
            return True
        if t.kind == "kw":
            return t.text == "unversion"
        return t.kind == "sym" and t.text in ("(", "[")

    def parse_fexp(self) -> Term:
        start = self.tok.start
        if self.tok.kind == "kw" and self.tok.text == "unversion" and not self.at_boundary():
            self.advance()
            return Unversion(self.parse_fexp(), self.span_from(start))
        if self.tok.kind == "sym" and self.tok.text == "\\" and not self.at_boundary():
            return self.parse_lambda()
        if not self.starts_atom() and not (self.tok.kind == "sym" and self.tok.text == "-"):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", ("expression",))
        fn = self.parse_atom()
        while self.starts_atom():
            if self.tok.kind == "kw":
                arg = self.parse_fexp()
            else:
                arg = self.parse_atom()
            fn = App(fn, arg, self.span_from(start))
        return fn

    def parse_atom(self) -> Term:
        t = self.tok
        start = t.start
        if t.kind == "sym" and t.text == "-" and self.toks[self.i + 1].kind == "int":
            self.advance()
            n = int(self.advance().text)
            return IntLit(-n, self.span_from(start))
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), self.span_from(start))
        if t.kind == "version":
            raise self.error("version literal outside ver", ("expression",))
        if t.kind == "string":
            self.advance()
            text = bytes(t.text[1:-1], "utf-8").decode("unicode_escape")
            sp = self.span_from(start)
            return ListLit(tuple(IntLit(ord(c), sp) for c in text), sp)
        if t.kind == "ident":
            self.advance()
            if t.text in ("true", "false"):
                return IntLit(1 if t.text == "true" else 0, self.span_from(start))
            return Var(t.text, self.span_from(start))
        if t.kind == "sym" and t.text == "(":
            self.advance()
            self.layout.append(0)
            try:
                nxt = self.tok
                if nxt.kind == "sym" and nxt.text == ")":
                    self.advance()
                    return IntLit(0, self.span_from(start))
                if nxt.kind == "sym" and nxt.text in BINOPS and self.toks[self.i + 1].text == ")":
                    self.advance()
                    self.advance()
                    return Var(nxt.text, self.span_from(start))
                first = self.parse_expr()
                if self.tok.kind == "sym" and self.tok.text == ",":
                    self.advance()
                    second = self.parse_expr()
                    self.expect_sym(")")
                    return Pair(first, second, self.span_from(start))
                self.expect_sym(")")
                return first
            finally:
                self.layout.pop()
        if t.kind == "sym" and t.text == "[":
            self.advance()
            self.layout.append(0)
            try:
                items: list[Term] = []
                if not (self.tok.kind == "sym" and self.tok.text == "]"):
                    while True:
                        items.append(self.parse_expr())
                        if self.tok.kind == "sym" and self.tok.text == ",":
                            self.advance()
                            continue
                        break
                self.expect_sym("]")
                return ListLit(tuple(items), self.span_from(start))
            finally:
                self.layout.pop()
        raise self.error(f"unexpected {t.text or 'end of input'!r}", ("expression",))

    # -- patterns ------------------------------------------------------------

    def parse_pattern(self):
        start = self.tok.start
        head = self.parse_apattern()
        if self.tok.kind == "sym" and self.tok.text == ":":
            self.advance()
            tail = self.parse_pattern()
            return PCons(head, tail, self.span_from(start))
        return head

    def parse_apattern(self):
        t = self.tok
        start = t.start
        if t.kind == "ident":
            self.advance()
            if t.text in ("true", "false"):
                return PInt(1 if t.text == "true" else 0, self.span_from(start))
            return PVar(t.text, self.span_from(start))
        if t.kind == "int":
            self.advance()
            return PInt(int(t.text), self.span_from(start))
        if t.kind == "sym" and t.text == "-" and self.toks[self.i + 1].kind == "int":
            self.advance()
            return PInt(-int(self.advance().text), self.span_from(start))
        if t.kind == "sym" and t.text == "(":
            self.advance()
            if self.tok.kind == "sym" and self.tok.text == ")":
                self.advance()
                return PInt(0, self.span_from(start))
            first = self.parse_pattern()
            if self.tok.kind == "sym" and self.tok.text == ",":
                self.advance()
                second = self.parse_pattern()
                self.expect_sym(")")
                return PPair(first, second, self.span_from(start))
            self.expect_sym(")")
            return first
        if t.kind == "sym" and t.text == "[":
            self.advance()
            items = []
            if not (self.tok.kind == "sym" and self.tok.text == "]"):
                while True:
                    items.append(self.parse_pattern())
                    if self.tok.kind == "sym" and self.tok.text == ",":
                        self.advance()
                        continue
                    break
            self.expect_sym("]")
            return PList(tuple(items), self.span_from(start))
        raise self.error(f"unexpected {t.text or 'end of input'!r}", ("pattern",))


def check_no_recursion(module: SurfaceModule) -> None:
    """Reject self-reference and reference cycles among top-level definitions."""
    names = set(module.symbols())
    deps = {name: free_vars(body) & names for name, body in module.defs}
    state: dict[str, int] = {}

    def visit(name: str, path: list[str]) -> None:
        state[name] = 1
        for dep in sorted(deps[name]):
            if state.get(dep) == 1:
                cycle = path[path.index(dep):] + [dep] if dep in path else [name, dep]
                body = module.definition(name)
                raise RecursiveDefinition(
                    "recursive definition " + " -> ".join(cycle), getattr(body, "span", None)
                )
            if dep not in state:
                visit(dep, path + [dep])
        state[name] = 2

    for name in module.symbols():
        if name not in state:
            visit(name, [name])


def parse_module(source: str, path: str | None = None) -> SurfaceModule:
    return Parser(source, path).parse_module()


def parse_expr(source: str) -> Term:
    p = Parser(source)
    p.layout = [0]
    t = p.parse_expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}", ("end of input",))
    return t


# -- pretty printing ----------------------------------------------------------
# Output is single-line per definition with explicit braces, so it re-parses
# to the same tree regardless of layout.


def pretty_pattern(p) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PInt):
        return str(p.value) if p.value >= 0 else f"({p.value})"
    if isinstance(p, PPair):
        return f"({pretty_pattern(p.fst)}, {pretty_pattern(p.snd)})"
    if isinstance(p, PList):
        return "[" + ", ".join(pretty_pattern(i) for i in p.items) + "]"
    return f"({pretty_pattern(p.head)} : {pretty_pattern(p.tail)})"


def pretty_term(t: Term) -> str:
    if isinstance(t, IntLit):
        return str(t.value) if t.value >= 0 else f"({t.value})"
    if isinstance(t, Var):
        return f"({t.name})" if t.name in BINOPS else t.name
    if isinstance(t, Lam):
        return f"(\\{t.param} -> {pretty_term(t.body)})"
    if isinstance(t, App):
        return f"({pretty_term(t.fn)} {pretty_term(t.arg)})"
    if isinstance(t, Let):
        return f"(let {{ {t.name} = {pretty_term(t.bound)} }} in {pretty_term(t.body)})"
    if isinstance(t, Pair):
        return f"({pretty_term(t.fst)}, {pretty_term(t.snd)})"
    if isinstance(t, ListLit):
        return "[" + ", ".join(pretty_term(i) for i in t.items) + "]"
    if isinstance(t, Case):
        alts = "; ".join(f"{pretty_pattern(b.pattern)} -> {pretty_term(b.body)}" for b in t.branches)
        return f"(case {pretty_term(t.scrutinee)} of {{ {alts} }})"
    if isinstance(t, VerOf):
        label = ", ".join(f"{m}={v}" for m, v in t.label)
        return f"(ver [{label}] of {pretty_term(t.body)})"
    if isinstance(t, Unversion):
        return f"(unversion {pretty_term(t.body)})"
    raise TypeError(f"not a surface term: {t!r}")


def pretty_module(m: SurfaceModule) -> str:
    lines = [f"module {m.name} where"]
    lines += [f"import {imp}" for imp in m.imports]
    lines += [f"{name} = {pretty_term(body)}" for name, body in m.defs]
    return "\n".join(lines) + "\n"

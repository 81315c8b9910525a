"""Surface syntax of VL: a small Haskell-flavoured functional language."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    path: str | None = None

    def __str__(self) -> str:
        where = f"{self.path}:" if self.path else ""
        return f"{where}{self.start}-{self.end}"


def _span() -> Span | None:
    return field(default=None, compare=False, repr=False)


# -- patterns ----------------------------------------------------------------


@dataclass(frozen=True)
class PVar:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class PInt:
    value: int
    span: Span | None = _span()


@dataclass(frozen=True)
class PPair:
    fst: Pattern
    snd: Pattern
    span: Span | None = _span()


@dataclass(frozen=True)
class PList:
    items: tuple[Pattern, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class PCons:
    head: Pattern
    tail: Pattern
    span: Span | None = _span()


Pattern = Union[PVar, PInt, PPair, PList, PCons]

WILDCARD = "_"


def pattern_vars(p: Pattern) -> list[str]:
    if isinstance(p, PVar):
        return [] if p.name == WILDCARD else [p.name]
    if isinstance(p, PInt):
        return []
    if isinstance(p, PPair):
        return pattern_vars(p.fst) + pattern_vars(p.snd)
    if isinstance(p, PList):
        return [v for item in p.items for v in pattern_vars(item)]
    return pattern_vars(p.head) + pattern_vars(p.tail)


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Span | None = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Lam:
    param: str
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Let:
    name: str
    bound: Term
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Pair:
    fst: Term
    snd: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class ListLit:
    items: tuple[Term, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class Branch:
    pattern: Pattern
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Case:
    scrutinee: Term
    branches: tuple[Branch, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class VerOf:
    label: tuple[tuple[str, str], ...]
    body: Term
    span: Span | None = _span()


@dataclass(frozen=True)
class Unversion:
    body: Term
    span: Span | None = _span()


Term = Union[IntLit, Var, Lam, App, Let, Pair, ListLit, Case, VerOf, Unversion]


@dataclass(frozen=True)
class SurfaceModule:
    name: str
    imports: tuple[str, ...]
    defs: tuple[tuple[str, Term], ...]
    version: str | None = None
    path: str | None = None

    def definition(self, symbol: str) -> Term:
        for name, body in self.defs:
            if name == symbol:
                return body
        raise KeyError(symbol)

    def symbols(self) -> list[str]:
        return [name for name, _ in self.defs]


def children(t: Term) -> list[Term]:
    if isinstance(t, (IntLit, Var)):
        return []
    if isinstance(t, Lam):
        return [t.body]
    if isinstance(t, App):
        return [t.fn, t.arg]
    if isinstance(t, Let):
        return [t.bound, t.body]
    if isinstance(t, Pair):
        return [t.fst, t.snd]
    if isinstance(t, ListLit):
        return list(t.items)
    if isinstance(t, Case):
        return [t.scrutinee] + [b.body for b in t.branches]
    return [t.body]


def walk(t: Term):
    yield t
    for c in children(t):
        yield from walk(c)


def free_vars(t: Term) -> set[str]:
    if isinstance(t, IntLit):
        return set()
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.param}
    if isinstance(t, Let):
        return free_vars(t.bound) | (free_vars(t.body) - {t.name})
    if isinstance(t, Case):
        out = free_vars(t.scrutinee)
        for b in t.branches:
            out |= free_vars(b.body) - set(pattern_vars(b.pattern))
        return out
    out: set[str] = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def strip_spans(t):
    """Rebuild ``t`` without spans (spans never take part in equality anyway)."""
    import dataclasses

    if isinstance(t, tuple):
        return tuple(strip_spans(x) for x in t)
    if not dataclasses.is_dataclass(t):
        return t
    kwargs = {}
    for f in dataclasses.fields(t):
        value = getattr(t, f.name)
        kwargs[f.name] = None if f.name == "span" else strip_spans(value)
    return type(t)(**kwargs)

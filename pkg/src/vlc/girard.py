"""Girard-style translation between surface VL and VLMini.

Forward: every lambda binds a promoted pattern, every argument is promoted,
case scrutinees are promoted and matched with promoted patterns.  Reverse
erases those promotions again.
"""
from __future__ import annotations

import itertools

from . import surface as S
from .vlmini import (
    MApp,
    MBranch,
    MCase,
    MCon,
    MConst,
    MInt,
    MLam,
    MPromote,
    MUnversion,
    MVar,
    MVerOf,
    PatBox,
    PatCon,
    PatInt,
    PatVar,
)


class ResidualVariable(Exception):
    pass


class _Forward:
    def __init__(self) -> None:
        self.counter = itertools.count(1)

    def pattern(self, p):
        if isinstance(p, S.PVar):
            return PatVar(p.name)
        if isinstance(p, S.PInt):
            return PatInt(p.value)
        if isinstance(p, S.PPair):
            return PatCon("pair", (self.pattern(p.fst), self.pattern(p.snd)))
        if isinstance(p, S.PList):
            return PatCon("list", tuple(self.pattern(i) for i in p.items))
        return PatCon("cons", (self.pattern(p.head), self.pattern(p.tail)))

    def argument(self, t):
        """Translate ``t`` in argument position: the result is a versioned value."""
        if isinstance(t, S.Unversion):
            return MUnversion(MPromote(self.term(t.body)), span=t.span)
        return MPromote(self.term(t))

    def term(self, t):
        if isinstance(t, S.IntLit):
            return MInt(t.value)
        if isinstance(t, S.Var):
            return MVar(t.name, span=t.span)
        if isinstance(t, S.Lam):
            return MLam(PatBox(PatVar(t.param)), self.term(t.body))
        if isinstance(t, S.App):
            return MApp(self.term(t.fn), self.argument(t.arg))
        if isinstance(t, S.Let):
            return MApp(MLam(PatBox(PatVar(t.name)), self.term(t.body)), self.argument(t.bound))
        if isinstance(t, S.Pair):
            return MCon("pair", (self.term(t.fst), self.term(t.snd)))
        if isinstance(t, S.ListLit):
            return MCon("list", tuple(self.term(i) for i in t.items))
        if isinstance(t, S.Case):
            return MCase(
                MPromote(self.term(t.scrutinee)),
                tuple(MBranch(PatBox(self.pattern(b.pattern)), self.term(b.body)) for b in t.branches),
            )
        if isinstance(t, S.VerOf):
            return MVerOf(t.label, self.term(t.body), span=t.span)
        if isinstance(t, S.Unversion):
            y = f"%u{next(self.counter)}"
            return MCase(
                MUnversion(MPromote(self.term(t.body)), span=t.span),
                (MBranch(PatBox(PatVar(y)), MVar(y)),),
            )
        raise TypeError(f"not a surface term: {t!r}")


def forward_translate(t: S.Term):
    return _Forward().term(t)


def _is_unversion_case(t) -> bool:
    if not (isinstance(t, MCase) and isinstance(t.scrutinee, MUnversion) and len(t.branches) == 1):
        return False
    b = t.branches[0]
    return (
        isinstance(b.pattern, PatBox)
        and isinstance(b.pattern.inner, PatVar)
        and b.body == MVar(b.pattern.inner.name)
    )


class _Reverse:
    def __init__(self, erase_version_terms: bool) -> None:
        self.erase = erase_version_terms
        self.counter = itertools.count(0)

    def pattern(self, p):
        if isinstance(p, PatBox):
            return self.pattern(p.inner)
        if isinstance(p, PatVar):
            return S.PVar(p.name)
        if isinstance(p, PatInt):
            return S.PInt(p.value)
        args = [self.pattern(a) for a in p.args]
        if p.con == "pair":
            return S.PPair(args[0], args[1])
        if p.con == "list":
            return S.PList(tuple(args))
        return S.PCons(args[0], args[1])

    def unversion(self, body):
        inner = body.body if isinstance(body, MPromote) else body
        out = self.term(inner)
        return out if self.erase else S.Unversion(out)

    def argument(self, a):
        if isinstance(a, MPromote):
            return self.term(a.body)
        if isinstance(a, MUnversion):
            return self.unversion(a.body)
        return self.term(a)

    def lam(self, p, body):
        core = p.inner if isinstance(p, PatBox) else p
        if isinstance(core, PatVar):
            return S.Lam(core.name, body)
        tmp = f"_r{next(self.counter)}"
        return S.Lam(tmp, S.Case(S.Var(tmp), (S.Branch(self.pattern(core), body),)))

    def term(self, t):
        if isinstance(t, MInt):
            return S.IntLit(t.value)
        if isinstance(t, (MVar, MConst)):
            return S.Var(t.name)
        if isinstance(t, MPromote):
            return self.term(t.body)
        if isinstance(t, MApp):
            fn = t.fn
            if (
                isinstance(fn, MLam)
                and isinstance(fn.pattern, PatBox)
                and isinstance(fn.pattern.inner, PatVar)
            ):
                return S.Let(fn.pattern.inner.name, self.argument(t.arg), self.term(fn.body))
            return S.App(self.term(fn), self.argument(t.arg))
        if isinstance(t, MLam):
            return self.lam(t.pattern, self.term(t.body))
        if isinstance(t, MCon):
            args = [self.term(a) for a in t.args]
            if t.con == "pair":
                return S.Pair(args[0], args[1])
            if t.con == "list":
                return S.ListLit(tuple(args))
            return S.App(S.App(S.Var(":"), args[0]), args[1])
        if isinstance(t, MCase):
            if _is_unversion_case(t):
                return self.unversion(t.scrutinee.body)
            return S.Case(
                self.term(t.scrutinee),
                tuple(S.Branch(self.pattern(b.pattern), self.term(b.body)) for b in t.branches),
            )
        if isinstance(t, MVerOf):
            body = self.term(t.body)
            return body if self.erase else S.VerOf(t.label, body)
        if isinstance(t, MUnversion):
            return self.unversion(t.body)
        raise TypeError(f"not a VLMini term: {t!r}")


def reverse_translate(t, *, erase_version_terms: bool = False) -> S.Term:
    """Erase promotions and promoted patterns.

    With ``erase_version_terms`` the ``ver``/``unversion`` markers are dropped
    as well, which is what code generation wants once versions are resolved.
    """
    return _Reverse(erase_version_terms).term(t)


def normalize_lets(t: S.Term) -> S.Term:
    """Rewrite ``(\\x -> b) a`` into ``let x = a in b`` throughout."""
    if isinstance(t, S.App):
        fn, arg = normalize_lets(t.fn), normalize_lets(t.arg)
        if isinstance(fn, S.Lam):
            return S.Let(fn.param, arg, fn.body)
        return S.App(fn, arg)
    if isinstance(t, S.Lam):
        return S.Lam(t.param, normalize_lets(t.body))
    if isinstance(t, S.Let):
        return S.Let(t.name, normalize_lets(t.bound), normalize_lets(t.body))
    if isinstance(t, S.Pair):
        return S.Pair(normalize_lets(t.fst), normalize_lets(t.snd))
    if isinstance(t, S.ListLit):
        return S.ListLit(tuple(normalize_lets(i) for i in t.items))
    if isinstance(t, S.Case):
        return S.Case(
            normalize_lets(t.scrutinee),
            tuple(S.Branch(b.pattern, normalize_lets(b.body)) for b in t.branches),
        )
    if isinstance(t, S.VerOf):
        return S.VerOf(t.label, normalize_lets(t.body))
    if isinstance(t, S.Unversion):
        return S.Unversion(normalize_lets(t.body))
    return t

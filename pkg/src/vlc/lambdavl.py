"""The λVL core calculus: declarative typing, small-step evaluation, ASCII syntax.

The checker decides ``Γ ⊢ t : A`` exactly.  It walks the term once, collecting
type equations (solved by unification) and grade constraints of the form
``monotone expression ⊑ atom``.  Those are solved by a least fixpoint from ⊥;
since every check against a constant is monotone, the least solution is the
best candidate, which makes the procedure complete for the structural rules
(weak, der, sub).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Union

from .version_algebra import (
    BOTTOM,
    UNIT,
    Labels,
    RVar,
    VersionLabel,
    res_add,
    res_leq,
    res_mul,
    version_key,
)
from .vlmini import INT, Graded, Linear, TArrow, TBox, TVar, Type, TypeEnv


# -- syntax ------------------------------------------------------------------


@dataclass(frozen=True)
class LPVar:
    name: str


@dataclass(frozen=True)
class LPBox:
    name: str


LPattern = Union[LPVar, LPBox]


@dataclass(frozen=True)
class LInt:
    value: int


@dataclass(frozen=True)
class LVar:
    name: str


@dataclass(frozen=True)
class LApp:
    fn: LTerm
    arg: LTerm


@dataclass(frozen=True)
class LLam:
    pattern: LPattern
    body: LTerm


@dataclass(frozen=True)
class LCLet:
    name: str
    bound: LTerm
    body: LTerm


@dataclass(frozen=True)
class LPromote:
    body: LTerm


@dataclass(frozen=True)
class LRecord:
    entries: tuple[tuple[VersionLabel, LTerm], ...]

    def keys(self) -> list[VersionLabel]:
        return [l for l, _ in self.entries]

    def at(self, l: VersionLabel) -> LTerm:
        for k, t in self.entries:
            if k == l:
                return t
        raise KeyError(l)


@dataclass(frozen=True)
class LRecordAt:
    entries: tuple[tuple[VersionLabel, LTerm], ...]
    chosen: VersionLabel

    def keys(self) -> list[VersionLabel]:
        return [l for l, _ in self.entries]

    def at(self, l: VersionLabel) -> LTerm:
        for k, t in self.entries:
            if k == l:
                return t
        raise KeyError(l)


@dataclass(frozen=True)
class LExtract:
    operand: LTerm
    label: VersionLabel


LTerm = Union[LInt, LVar, LApp, LLam, LCLet, LPromote, LRecord, LRecordAt, LExtract]


def record(*entries: tuple[VersionLabel, LTerm]) -> LRecord:
    return LRecord(tuple(entries))


def is_value(t: LTerm) -> bool:
    return isinstance(t, (LInt, LLam, LPromote, LRecord))


def is_versioned_value(t: LTerm) -> bool:
    return isinstance(t, (LPromote, LRecord))


def children(t: LTerm) -> list[LTerm]:
    if isinstance(t, (LInt, LVar)):
        return []
    if isinstance(t, LApp):
        return [t.fn, t.arg]
    if isinstance(t, LLam):
        return [t.body]
    if isinstance(t, LCLet):
        return [t.bound, t.body]
    if isinstance(t, LPromote):
        return [t.body]
    if isinstance(t, (LRecord, LRecordAt)):
        return [x for _, x in t.entries]
    return [t.operand]


def free_vars(t: LTerm) -> set[str]:
    if isinstance(t, LVar):
        return {t.name}
    if isinstance(t, LLam):
        return free_vars(t.body) - {t.pattern.name}
    if isinstance(t, LCLet):
        return free_vars(t.bound) | (free_vars(t.body) - {t.name})
    out: set[str] = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def term_size(t: LTerm) -> int:
    return 1 + sum(term_size(c) for c in children(t))


def label_key(l: VersionLabel):
    return tuple(version_key(v) for _, v in l.assignment)


# -- default version overwriting and substitution ------------------------------


def overwrite_default(t: LTerm, l: VersionLabel) -> LTerm:
    """t@l."""
    if isinstance(t, (LInt, LVar, LPromote, LRecord)):
        return t
    if isinstance(t, LLam):
        return LLam(t.pattern, overwrite_default(t.body, l))
    if isinstance(t, LApp):
        return LApp(overwrite_default(t.fn, l), overwrite_default(t.arg, l))
    if isinstance(t, LCLet):
        return LCLet(t.name, overwrite_default(t.bound, l), overwrite_default(t.body, l))
    if isinstance(t, LExtract):
        return LExtract(overwrite_default(t.operand, l), t.label)
    if isinstance(t, LRecordAt):
        return LRecordAt(t.entries, l) if l in t.keys() else t
    raise TypeError(f"not a λVL term: {t!r}")


_fresh = itertools.count(1)


def substitute(t: LTerm, x: str, s: LTerm) -> LTerm:
    """[s/x]t, renaming binders that would capture free variables of s."""
    if isinstance(t, LVar):
        return s if t.name == x else t
    if isinstance(t, LInt):
        return t
    if isinstance(t, LApp):
        return LApp(substitute(t.fn, x, s), substitute(t.arg, x, s))
    if isinstance(t, LLam):
        y = t.pattern.name
        if y == x:
            return t
        body = t.body
        if y in free_vars(s):
            z = f"{y}'{next(_fresh)}"
            body = substitute(body, y, LVar(z))
            y = z
        return LLam(type(t.pattern)(y), substitute(body, x, s))
    if isinstance(t, LCLet):
        bound = substitute(t.bound, x, s)
        if t.name == x:
            return LCLet(t.name, bound, t.body)
        y, body = t.name, t.body
        if y in free_vars(s):
            z = f"{y}'{next(_fresh)}"
            body = substitute(body, y, LVar(z))
            y = z
        return LCLet(y, bound, substitute(body, x, s))
    if isinstance(t, LPromote):
        return LPromote(substitute(t.body, x, s))
    if isinstance(t, LRecord):
        return LRecord(tuple((l, substitute(u, x, s)) for l, u in t.entries))
    if isinstance(t, LRecordAt):
        return LRecordAt(tuple((l, substitute(u, x, s)) for l, u in t.entries), t.chosen)
    if isinstance(t, LExtract):
        return LExtract(substitute(t.operand, x, s), t.label)
    raise TypeError(f"not a λVL term: {t!r}")


# -- evaluation --------------------------------------------------------------


class _StuckType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Stuck"

    def __bool__(self) -> bool:
        return False


Stuck = _StuckType()


class FuelExhausted(Exception):
    def __init__(self, term: LTerm, steps: int):
        super().__init__(f"evaluation did not finish within {steps} steps")
        self.term = term
        self.steps = steps


def newest_label(labels: list[VersionLabel]) -> VersionLabel:
    return max(labels, key=label_key)


Chooser = Callable[[list[VersionLabel]], VersionLabel]


def eval_step(t: LTerm, choose: Chooser = newest_label):
    """One reduction at the redex picked by the evaluation context, or Stuck."""
    if isinstance(t, LApp):
        if is_value(t.fn):
            if isinstance(t.fn, LLam):
                p = t.fn.pattern
                if isinstance(p, LPVar):
                    return substitute(t.fn.body, p.name, t.arg)  # E-abs1
                return LCLet(p.name, t.arg, t.fn.body)  # E-abs2
            return Stuck
        fn = eval_step(t.fn, choose)
        return Stuck if fn is Stuck else LApp(fn, t.arg)
    if isinstance(t, LExtract):
        u = t.operand
        if isinstance(u, LPromote):
            return overwrite_default(u.body, t.label)  # E-ex1
        if isinstance(u, LRecord):
            if t.label in u.keys():
                return overwrite_default(u.at(t.label), t.label)  # E-ex2
            return Stuck
        if is_value(u):
            return Stuck
        inner = eval_step(u, choose)
        return Stuck if inner is Stuck else LExtract(inner, t.label)
    if isinstance(t, LCLet):
        u = t.bound
        if isinstance(u, LPromote):
            return substitute(t.body, t.name, u.body)  # E-clet, ▷□ then ▷var
        if isinstance(u, LRecord):
            chosen = choose(u.keys())
            return substitute(t.body, t.name, LRecordAt(u.entries, chosen))  # E-clet on a record
        if is_value(u):
            return Stuck
        inner = eval_step(u, choose)
        return Stuck if inner is Stuck else LCLet(t.name, inner, t.body)
    if isinstance(t, LRecordAt):
        return overwrite_default(t.at(t.chosen), t.chosen)  # E-veri
    return Stuck


@dataclass
class EvalResult:
    term: LTerm
    steps: int
    status: str  # "value" or "stuck"
    trace: list[LTerm] = field(default_factory=list)


def evaluate(t: LTerm, fuel: int = 10_000, *, choose: Chooser = newest_label, trace: bool = False) -> EvalResult:
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    seen = [t] if trace else []
    steps = 0
    while True:
        if is_value(t):
            return EvalResult(t, steps, "value", seen)
        if steps >= fuel:
            raise FuelExhausted(t, steps)
        nxt = eval_step(t, choose)
        if nxt is Stuck:
            return EvalResult(t, steps, "stuck", seen)
        t = nxt
        steps += 1
        if trace:
            seen.append(t)


# -- declarative typing ------------------------------------------------------


class _Fail(Exception):
    def __init__(self, reason: str, term=None):
        super().__init__(reason)
        self.reason = reason
        self.term = term


@dataclass
class Diagnosis:
    ok: bool
    term: LTerm | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _Checker:
    """One run of the declarative decision procedure."""

    def __init__(self) -> None:
        self.counter = itertools.count(1)
        self.tsub: dict[str, Type] = {}
        self.rsub: dict[str, object] = {}
        # grade constraints: (list of products, rhs atom, origin term)
        self.grades: list[tuple[list[tuple], object, LTerm]] = []
        self.members: list[tuple[VersionLabel, object, LTerm]] = []

    # variables

    def tvar(self) -> TVar:
        return TVar(f"?t{next(self.counter)}")

    def rvar(self) -> RVar:
        return RVar(f"?r{next(self.counter)}")

    def rfind(self, r):
        while isinstance(r, RVar) and r.name in self.rsub:
            r = self.rsub[r.name]
        return r

    def tresolve(self, a: Type) -> Type:
        while isinstance(a, TVar) and a.name in self.tsub:
            a = self.tsub[a.name]
        return a

    def zonk(self, a: Type) -> Type:
        a = self.tresolve(a)
        if isinstance(a, TArrow):
            return TArrow(self.zonk(a.arg), self.zonk(a.res))
        if isinstance(a, TBox):
            return TBox(self.rfind(a.res), self.zonk(a.body))
        return a

    def occurs(self, name: str, a: Type) -> bool:
        a = self.tresolve(a)
        if isinstance(a, TVar):
            return a.name == name
        if isinstance(a, TArrow):
            return self.occurs(name, a.arg) or self.occurs(name, a.res)
        if isinstance(a, TBox):
            return self.occurs(name, a.body)
        return False

    def unify_res(self, r1, r2, where) -> None:
        r1, r2 = self.rfind(r1), self.rfind(r2)
        if r1 == r2:
            return
        if isinstance(r1, RVar):
            self.rsub[r1.name] = r2
        elif isinstance(r2, RVar):
            self.rsub[r2.name] = r1
        else:
            raise _Fail(f"resource {r1} does not match {r2}", where)

    def unify(self, a: Type, b: Type, where) -> None:
        a, b = self.tresolve(a), self.tresolve(b)
        if a == b:
            return
        if isinstance(a, TVar):
            if self.occurs(a.name, b):
                raise _Fail("infinite type", where)
            self.tsub[a.name] = b
            return
        if isinstance(b, TVar):
            self.unify(b, a, where)
            return
        if isinstance(a, TArrow) and isinstance(b, TArrow):
            self.unify(a.arg, b.arg, where)
            self.unify(a.res, b.res, where)
            return
        if isinstance(a, TBox) and isinstance(b, TBox):
            self.unify_res(a.res, b.res, where)
            self.unify(a.body, b.body, where)
            return
        raise _Fail(f"type {self.zonk(a)} does not match {self.zonk(b)}", where)

    # walk: returns (type, usage) with usage: name -> list of scale tuples

    def walk(self, env: dict[str, tuple[str, Type]], t: LTerm):
        if isinstance(t, LInt):
            return INT, {}
        if isinstance(t, LVar):
            if t.name not in env:
                raise _Fail(f"unbound variable {t.name}", t)
            return env[t.name][1], {t.name: [()]}
        if isinstance(t, LApp):
            fa, fu = self.walk(env, t.fn)
            aa, au = self.walk(env, t.arg)
            res = self.tvar()
            self.unify(fa, TArrow(aa, res), t)
            return res, _merge(fu, au)
        if isinstance(t, LLam):
            name = t.pattern.name
            if isinstance(t.pattern, LPVar):
                arg = self.tvar()
                body, usage = self.walk({**env, name: ("lin", arg)}, t.body)
                self._close_linear(name, usage, t)
                return TArrow(arg, body), usage
            inner, grade = self.tvar(), self.rvar()
            body, usage = self.walk({**env, name: ("gr", inner)}, t.body)
            self._close_graded(name, usage, grade, t)
            return TArrow(TBox(grade, inner), body), usage
        if isinstance(t, LCLet):
            ba, bu = self.walk(env, t.bound)
            inner, grade = self.tvar(), self.rvar()
            self.unify(ba, TBox(grade, inner), t)
            body, usage = self.walk({**env, t.name: ("gr", inner)}, t.body)
            self._close_graded(t.name, usage, grade, t)
            return body, _merge(bu, usage)
        if isinstance(t, LPromote):
            grade = self.rvar()
            a, usage = self.walk(env, t.body)
            return TBox(grade, a), _scale(usage, grade)
        if isinstance(t, (LRecord, LRecordAt)):
            keys = t.keys()
            if len(set(keys)) != len(keys) or not keys:
                raise _Fail("versioned record needs distinct labels", t)
            if isinstance(t, LRecordAt) and t.chosen not in keys:
                raise _Fail("chosen label is not a key of the record", t)
            everything = Labels(frozenset(keys))
            elem = self.tvar()
            usage: dict = {}
            for _, body in t.entries:
                a, u = self.walk(env, body)
                self.unify(a, elem, body)
                usage = _merge(usage, u)
            usage = _scale(usage, everything)
            if isinstance(t, LRecordAt):
                return elem, usage
            return TBox(everything, elem), usage
        if isinstance(t, LExtract):
            if not is_versioned_value(t.operand):
                raise _Fail("extraction from a term that is not a versioned value", t)
            a, usage = self.walk(env, t.operand)
            inner, grade = self.tvar(), self.rvar()
            self.unify(a, TBox(grade, inner), t)
            self.members.append((t.label, grade, t))
            return inner, usage
        raise _Fail(f"unknown term {t!r}", t)

    def _close_linear(self, name: str, usage: dict, where) -> None:
        occ = usage.pop(name, [])
        if len(occ) != 1:
            raise _Fail(f"linear variable {name} used {len(occ)} times", where)
        if occ[0]:
            raise _Fail(f"linear variable {name} used inside a versioned value", where)

    def _close_graded(self, name: str, usage: dict, grade, where) -> None:
        occ = usage.pop(name, [])
        if occ:
            self.grades.append((occ, grade, where))

    # grade solving

    def solve(self) -> dict[str, object]:
        values: dict[str, object] = {}

        def val(atom):
            atom = self.rfind(atom)
            if isinstance(atom, RVar):
                return values.get(atom.name, BOTTOM)
            return atom

        def ev(products):
            total = BOTTOM
            for prod in products:
                acc = UNIT
                for atom in prod:
                    acc = res_mul(acc, val(atom))
                total = res_add(total, acc)
            return total

        changed = True
        while changed:
            changed = False
            for products, rhs, _ in self.grades:
                rhs = self.rfind(rhs)
                if isinstance(rhs, RVar):
                    new = res_add(values.get(rhs.name, BOTTOM), ev(products))
                    if new != values.get(rhs.name, BOTTOM):
                        values[rhs.name] = new
                        changed = True
            for l, rhs, _ in self.members:
                rhs = self.rfind(rhs)
                if isinstance(rhs, RVar):
                    new = res_add(values.get(rhs.name, BOTTOM), Labels(frozenset([l])))
                    if new != values.get(rhs.name, BOTTOM):
                        values[rhs.name] = new
                        changed = True
        for products, rhs, where in self.grades:
            rhs = self.rfind(rhs)
            if not isinstance(rhs, RVar) and not res_leq(ev(products), rhs):
                raise _Fail(f"usage {ev(products)} exceeds grade {rhs}", where)
        for l, rhs, where in self.members:
            rhs = self.rfind(rhs)
            if not isinstance(rhs, RVar) and not (isinstance(rhs, Labels) and l in rhs.labels):
                raise _Fail(f"label {l} not available in {rhs}", where)
        return values

    def ground(self, a: Type, values: dict) -> Type:
        a = self.zonk(a)
        if isinstance(a, TVar):
            return INT
        if isinstance(a, TArrow):
            return TArrow(self.ground(a.arg, values), self.ground(a.res, values))
        if isinstance(a, TBox):
            r = self.rfind(a.res)
            if isinstance(r, RVar):
                r = values.get(r.name, BOTTOM)
            return TBox(r, self.ground(a.body, values))
        return a


def _merge(u1: dict, u2: dict) -> dict:
    out = {k: list(v) for k, v in u1.items()}
    for k, v in u2.items():
        out.setdefault(k, []).extend(v)
    return out


def _scale(usage: dict, r) -> dict:
    return {k: [(r,) + occ for occ in v] for k, v in usage.items()}


def _run_check(gamma: TypeEnv, t: LTerm, a: Type | None):
    ck = _Checker()
    env = {e.name: ("lin" if isinstance(e, Linear) else "gr", e.type) for e in gamma}
    ty, usage = ck.walk(env, t)
    if a is not None:
        ck.unify(ty, a, t)
    for e in gamma:
        occ = usage.pop(e.name, [])
        if isinstance(e, Linear):
            if len(occ) != 1 or occ[0]:
                raise _Fail(f"linear assumption {e.name} must be used exactly once, outside promotions", t)
        elif occ:
            ck.grades.append((occ, e.res, t))
    if usage:
        raise _Fail(f"unbound variables {sorted(usage)}", t)
    values = ck.solve()
    return ck, ty, values


def diagnose_declarative(gamma: TypeEnv, t: LTerm, a: Type) -> Diagnosis:
    try:
        _run_check(gamma, t, a)
    except _Fail as f:
        return Diagnosis(False, f.term, f.reason)
    return Diagnosis(True)


def check_declarative(gamma: TypeEnv, t: LTerm, a: Type) -> bool:
    """Does a derivation of Γ ⊢ t : A exist?"""
    return diagnose_declarative(gamma, t, a).ok


def synth_declarative(t: LTerm, gamma: TypeEnv = TypeEnv()) -> Type | None:
    """A ground type for ``t``: least grades, leftover type variables as Int."""
    try:
        ck, ty, values = _run_check(gamma, t, None)
    except _Fail:
        return None
    return ck.ground(ty, values)


def check_pattern(res, p: LPattern, a: Type) -> TypeEnv | None:
    """R ⊢ p : A ▷ Δ for the declarative pattern rules; None if no rule applies."""
    if isinstance(p, LPVar):
        if res is None:
            return TypeEnv((Linear(p.name, a),))
        return TypeEnv((Graded(p.name, a, res),))
    if res is not None or not isinstance(a, TBox):
        return None
    return TypeEnv((Graded(p.name, a.body, a.res),))


# -- ASCII syntax ------------------------------------------------------------
#   t ::= n | x | \x. t | \[x]. t | t t | let [x] = t in t | [t]
#       | <L=t, ...> | <L=t, ... | L> | t.L
#   L ::= {M=V, ...}


class LParseError(Exception):
    pass


_LTOK = re.compile(
    r"\s*(?:(?P<ver>\d+(?:\.\d+)+)|(?P<int>-?\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[\\.\[\](){}<>|=,]))"
)


def _ltokens(src: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    src = src.rstrip()
    while pos < len(src):
        m = _LTOK.match(src, pos)
        if not m or m.end() == pos:
            raise LParseError(f"unexpected character at {pos}: {src[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    out.append(("eof", ""))
    return out


class _LParser:
    def __init__(self, src: str):
        self.toks = _ltokens(src)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[self.i + k]

    def take(self, text: str | None = None):
        kind, val = self.toks[self.i]
        if text is not None and val != text:
            raise LParseError(f"expected {text!r}, found {val or 'end of input'!r}")
        self.i += 1
        return val

    def label(self) -> VersionLabel:
        self.take("{")
        items = []
        while True:
            mod = self.take()
            self.take("=")
            kind, ver = self.peek()
            if kind not in ("ver", "int"):
                raise LParseError(f"expected a version, found {ver!r}")
            self.take()
            items.append((mod, ver))
            if self.peek()[1] == ",":
                self.take(",")
                continue
            break
        self.take("}")
        return VersionLabel.of(items)

    def term(self) -> LTerm:
        kind, val = self.peek()
        if val == "\\":
            self.take()
            if self.peek()[1] == "[":
                self.take("[")
                name = self.take()
                self.take("]")
                pat: LPattern = LPBox(name)
            else:
                pat = LPVar(self.take())
            self.take(".")
            return LLam(pat, self.term())
        if kind == "id" and val == "let":
            self.take()
            self.take("[")
            name = self.take()
            self.take("]")
            self.take("=")
            bound = self.term()
            self.take("in")
            return LCLet(name, bound, self.term())
        fn = self.postfix()
        while self._starts_atom():
            fn = LApp(fn, self.postfix())
        return fn

    def _starts_atom(self) -> bool:
        kind, val = self.peek()
        if kind == "id":
            return val not in ("in", "let")
        return kind == "int" or val in ("(", "[", "<")

    def postfix(self) -> LTerm:
        t = self.atom()
        while self.peek()[1] == "." and self.peek(1)[1] == "{":
            self.take(".")
            t = LExtract(t, self.label())
        return t

    def atom(self) -> LTerm:
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return LInt(int(val))
        if kind == "id":
            self.take()
            return LVar(val)
        if val == "(":
            self.take()
            t = self.term()
            self.take(")")
            return t
        if val == "[":
            self.take()
            t = self.term()
            self.take("]")
            return LPromote(t)
        if val == "<":
            self.take()
            entries = []
            while True:
                l = self.label()
                self.take("=")
                entries.append((l, self.term()))
                if self.peek()[1] == ",":
                    self.take(",")
                    continue
                break
            chosen = None
            if self.peek()[1] == "|":
                self.take("|")
                chosen = self.label()
            self.take(">")
            if chosen is None:
                return LRecord(tuple(entries))
            return LRecordAt(tuple(entries), chosen)
        raise LParseError(f"unexpected {val or 'end of input'!r}")


def parse_lterm(src: str) -> LTerm:
    p = _LParser(src)
    t = p.term()
    if p.peek()[0] != "eof":
        raise LParseError(f"trailing input at {p.peek()[1]!r}")
    return t


def show_label(l: VersionLabel) -> str:
    return "{" + ",".join(f"{m}={v}" for m, v in l.assignment) + "}"


def show(t: LTerm) -> str:
    if isinstance(t, LInt):
        return str(t.value)
    if isinstance(t, LVar):
        return t.name
    if isinstance(t, LApp):
        fn = show(t.fn)
        if isinstance(t.fn, (LLam, LCLet)):
            fn = f"({fn})"
        arg = show(t.arg)
        if isinstance(t.arg, (LApp, LLam, LCLet)):
            arg = f"({arg})"
        return f"{fn} {arg}"
    if isinstance(t, LLam):
        p = t.pattern.name if isinstance(t.pattern, LPVar) else f"[{t.pattern.name}]"
        return f"\\{p}. {show(t.body)}"
    if isinstance(t, LCLet):
        return f"let [{t.name}] = {show(t.bound)} in {show(t.body)}"
    if isinstance(t, LPromote):
        return f"[{show(t.body)}]"
    if isinstance(t, (LRecord, LRecordAt)):
        inner = ", ".join(f"{show_label(l)}={show(u)}" for l, u in t.entries)
        if isinstance(t, LRecordAt):
            inner += f" | {show_label(t.chosen)}"
        return f"<{inner}>"
    if isinstance(t, LExtract):
        op = show(t.operand)
        if not isinstance(t.operand, (LPromote, LRecord, LRecordAt, LVar, LInt)):
            op = f"({op})"
        return f"{op}.{show_label(t.label)}"
    raise TypeError(f"not a λVL term: {t!r}")

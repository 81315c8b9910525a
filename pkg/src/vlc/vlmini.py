"""The VLMini intermediate language: terms, types, contexts, constraints and substitutions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .version_algebra import (
    BOTTOM,
    UNIT,
    Bottom,
    Labels,
    Resource,
    RVar,
    VersionLabel,
    res_add,
    res_leq,
    res_mul,
)


class VLMiniError(Exception):
    pass


class LinearClash(VLMiniError):
    pass


class TypeMismatch(VLMiniError):
    pass


class LinearInScaledContext(VLMiniError):
    pass


class KindError(VLMiniError):
    pass


class UnificationFailure(VLMiniError):
    pass


class OccursCheck(UnificationFailure):
    pass


class Mismatch(UnificationFailure):
    pass


class ResourceMismatch(UnificationFailure):
    pass


def _nospan():
    return field(default=None, compare=False, repr=False)


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class TInt:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TArrow:
    arg: Type
    res: Type

    def __str__(self) -> str:
        left = f"({self.arg})" if isinstance(self.arg, TArrow) else str(self.arg)
        return f"{left} → {self.res}"


@dataclass(frozen=True)
class TBox:
    res: Resource
    body: Type

    def __str__(self) -> str:
        inner = str(self.body)
        if isinstance(self.body, (TArrow, TBox)):
            inner = f"({inner})"
        return f"□_{res_str(self.res)} {inner}"


@dataclass(frozen=True)
class TCon:
    name: str  # "Pair" or "List"
    args: tuple[Type, ...]

    def __str__(self) -> str:
        if self.name == "List":
            return f"[{self.args[0]}]"
        return "(" + ", ".join(str(a) for a in self.args) + ")"


Type = Union[TInt, TVar, TArrow, TBox, TCon]
INT = TInt()
CON_ARITY = {"Pair": 2, "List": 1}


def t_pair(a: Type, b: Type) -> TCon:
    return TCon("Pair", (a, b))


def t_list(a: Type) -> TCon:
    return TCon("List", (a,))


def res_str(r) -> str:
    if isinstance(r, Labels) and len(r.labels) == 1:
        return "{" + str(next(iter(r.labels))) + "}"
    s = str(r)
    return s if isinstance(r, (RVar, Bottom)) or s == "∅" else s


def erase(a: Type) -> Type:
    """Drop every box layer."""
    if isinstance(a, TBox):
        return erase(a.body)
    if isinstance(a, TArrow):
        return TArrow(erase(a.arg), erase(a.res))
    if isinstance(a, TCon):
        return TCon(a.name, tuple(erase(x) for x in a.args))
    return a


def type_vars(a: Type) -> set[str]:
    if isinstance(a, TVar):
        return {a.name}
    if isinstance(a, TArrow):
        return type_vars(a.arg) | type_vars(a.res)
    if isinstance(a, TBox):
        return type_vars(a.body)
    if isinstance(a, TCon):
        out: set[str] = set()
        for x in a.args:
            out |= type_vars(x)
        return out
    return set()


def resource_vars(x) -> set[str]:
    """Resource variables in a type, resource expression, env or constraint."""
    if isinstance(x, RVar):
        return {x.name}
    if isinstance(x, (RAdd, RMul)):
        return resource_vars(x.left) | resource_vars(x.right)
    if isinstance(x, TBox):
        return resource_vars(x.res) | resource_vars(x.body)
    if isinstance(x, TArrow):
        return resource_vars(x.arg) | resource_vars(x.res)
    if isinstance(x, TCon):
        out: set[str] = set()
        for a in x.args:
            out |= resource_vars(a)
        return out
    if isinstance(x, TypeEnv):
        out = set()
        for e in x.entries:
            out |= resource_vars(e.type)
            if isinstance(e, Graded):
                out |= resource_vars(e.res)
        return out
    if isinstance(x, (VarDep, LabelDep, And, Or, Top)):
        return constraint_vars(x)
    return set()


def is_ground_type(a: Type) -> bool:
    return not type_vars(a) and not resource_vars(a)


# -- symbolic resource expressions (usage grades during inference) -------------


@dataclass(frozen=True)
class RAdd:
    left: object
    right: object

    def __str__(self) -> str:
        return f"({res_str(self.left)} ⊕ {res_str(self.right)})"


@dataclass(frozen=True)
class RMul:
    left: object
    right: object

    def __str__(self) -> str:
        return f"({res_str(self.left)} ⊗ {res_str(self.right)})"


def _is_ground(r) -> bool:
    return isinstance(r, (Bottom, Labels))


def res_plus(r1, r2):
    if isinstance(r1, Bottom):
        return r2
    if isinstance(r2, Bottom):
        return r1
    if _is_ground(r1) and _is_ground(r2):
        return res_add(r1, r2)
    if r1 == r2:
        return r1
    return RAdd(r1, r2)


def res_times(r1, r2):
    if isinstance(r1, Bottom) or isinstance(r2, Bottom):
        return BOTTOM
    if r1 == UNIT:
        return r2
    if r2 == UNIT:
        return r1
    if _is_ground(r1) and _is_ground(r2):
        return res_mul(r1, r2)
    if r1 == r2:
        return r1
    return RMul(r1, r2)


def eval_res(r):
    """Evaluate a ground resource expression."""
    if isinstance(r, RAdd):
        return res_add(eval_res(r.left), eval_res(r.right))
    if isinstance(r, RMul):
        return res_mul(eval_res(r.left), eval_res(r.right))
    return r


# -- kind context and fresh names --------------------------------------------

KIND_TYPE = "Type"
KIND_LABELS = "Labels"


class KindContext:
    """Σ: kinds of type and resource variables, plus the fresh-name supply.

    One instance is shared by a whole compilation so Σ only ever grows.
    Creation order of variables is recorded; the solver uses it.
    """

    def __init__(self) -> None:
        self.kinds: dict[str, str] = {}
        self.created: dict[str, int] = {}
        self._counter = itertools.count(1)

    def _mint(self, prefix: str, kind: str) -> str:
        n = next(self._counter)
        name = f"{prefix}{n}"
        self.kinds[name] = kind
        self.created[name] = n
        return name

    def fresh_type(self, prefix: str = "t") -> TVar:
        return TVar(self._mint(prefix, KIND_TYPE))

    def fresh_res(self, prefix: str = "α") -> RVar:
        return RVar(self._mint(prefix, KIND_LABELS))

    def declare(self, name: str, kind: str) -> None:
        old = self.kinds.get(name)
        if old is not None and old != kind:
            raise KindError(f"{name} has kind {old}, not {kind}")
        self.kinds[name] = kind
        self.created.setdefault(name, 10**9 + len(self.created))

    def kind_of(self, name: str) -> str | None:
        return self.kinds.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.kinds

    def order_key(self, name: str) -> int:
        return self.created.get(name, 10**12)


# -- contexts ----------------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    name: str
    type: Type

    def __str__(self) -> str:
        return f"{self.name}:{self.type}"


@dataclass(frozen=True)
class Graded:
    name: str
    type: Type
    res: object  # Resource or RAdd/RMul

    def __str__(self) -> str:
        return f"{self.name}:[{self.type}]_{res_str(self.res)}"


Assumption = Union[Linear, Graded]


@dataclass(frozen=True)
class TypeEnv:
    entries: tuple[Assumption, ...] = ()

    def __post_init__(self) -> None:
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise VLMiniError(f"duplicate variable in context: {names}")

    @classmethod
    def of(cls, *entries: Assumption) -> TypeEnv:
        return cls(tuple(entries))

    def lookup(self, name: str) -> Assumption | None:
        for e in self.entries:
            if e.name == name:
                return e
        return None

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def extend(self, other: TypeEnv | Iterable[Assumption]) -> TypeEnv:
        """Γ, Γ' where Γ' shadows same-named assumptions of Γ."""
        new = list(other.entries if isinstance(other, TypeEnv) else other)
        shadowed = {e.name for e in new}
        return TypeEnv(tuple(e for e in self.entries if e.name not in shadowed) + tuple(new))

    def restrict(self, names: Iterable[str]) -> TypeEnv:
        keep = set(names)
        return TypeEnv(tuple(e for e in self.entries if e.name in keep))

    def remove(self, names: Iterable[str]) -> TypeEnv:
        drop = set(names)
        return TypeEnv(tuple(e for e in self.entries if e.name not in drop))

    def as_set(self) -> frozenset:
        return frozenset(self.entries)

    def __iter__(self) -> Iterator[Assumption]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return ", ".join(str(e) for e in self.entries) if self.entries else "∅"


EMPTY_ENV = TypeEnv()


def ctx_concat(g1: TypeEnv, g2: TypeEnv) -> TypeEnv:
    out: list[Assumption] = []
    other = {e.name: e for e in g2.entries}
    for e in g1.entries:
        f = other.pop(e.name, None)
        if f is None:
            out.append(e)
            continue
        if isinstance(e, Linear) or isinstance(f, Linear):
            raise LinearClash(f"variable {e.name} used linearly in both contexts")
        if e.type != f.type:
            raise TypeMismatch(f"{e.name}: {e.type} vs {f.type}")
        out.append(Graded(e.name, e.type, res_plus(e.res, f.res)))
    out.extend(f for f in g2.entries if f.name in other)
    return TypeEnv(tuple(out))


def ctx_scale(r, g: TypeEnv) -> TypeEnv:
    out = []
    for e in g.entries:
        if isinstance(e, Linear):
            raise LinearInScaledContext(f"linear assumption {e.name} in scaled context")
        out.append(Graded(e.name, e.type, res_times(r, e.res)))
    return TypeEnv(tuple(out))


def ctx_union(g1: TypeEnv, g2: TypeEnv) -> TypeEnv:
    """Merge usage of alternative branches: linear entries may repeat."""
    out: list[Assumption] = []
    other = {e.name: e for e in g2.entries}
    for e in g1.entries:
        f = other.pop(e.name, None)
        if f is None:
            out.append(e)
        elif isinstance(e, Linear) and isinstance(f, Linear):
            out.append(e)
        elif isinstance(e, Graded) and isinstance(f, Graded):
            out.append(Graded(e.name, e.type, res_plus(e.res, f.res)))
        else:
            raise LinearClash(f"variable {e.name} used both linearly and graded")
    out.extend(f for f in g2.entries if f.name in other)
    return TypeEnv(tuple(out))


def grade_context(gamma: TypeEnv) -> TypeEnv:
    """[Γ]_Labels: linear x:A becomes x:[A]_∅; graded entries unchanged."""
    return TypeEnv(
        tuple(Graded(e.name, e.type, UNIT) if isinstance(e, Linear) else e for e in gamma.entries)
    )


# -- dependency constraints --------------------------------------------------


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "⊤"


@dataclass(frozen=True)
class VarDep:
    """left ⪯ right: the two labels must agree on every module."""

    left: Resource
    right: Resource

    def __str__(self) -> str:
        return f"{res_str(self.left)} ⪯ {res_str(self.right)}"


@dataclass(frozen=True)
class LabelDep:
    """var ⪯ ⟨M = V, ...⟩: the label of ``var`` fixes the listed components."""

    var: Resource
    dep: tuple[tuple[str, str], ...]

    def __str__(self) -> str:
        return f"{res_str(self.var)} ⪯ {partial_label_str(self.dep)}"


@dataclass(frozen=True)
class And:
    items: tuple

    def __str__(self) -> str:
        return " ∧ ".join(_paren(c) for c in self.items)


@dataclass(frozen=True)
class Or:
    items: tuple
    origin: str | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return " ∨ ".join(_paren(c) for c in self.items)


Constraint = Union[Top, VarDep, LabelDep, And, Or]
TOP = Top()


def _paren(c) -> str:
    return f"({c})" if isinstance(c, (And, Or)) and len(c.items) > 1 else str(c)


def partial_label_str(dep) -> str:
    return "⟨" + ", ".join(f"{m} = {v}" for m, v in dep) + "⟩"


def conj(*cs) -> Constraint:
    items: list = []
    for c in cs:
        if isinstance(c, Top):
            continue
        if isinstance(c, And):
            items.extend(c.items)
        else:
            items.append(c)
    if not items:
        return TOP
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(*cs, origin: str | None = None) -> Constraint:
    items: list = []
    for c in cs:
        if isinstance(c, Or) and c.origin is None:
            items.extend(c.items)
        else:
            items.append(c)
    return Or(tuple(items), origin)


def constraint_vars(c) -> set[str]:
    if isinstance(c, Top):
        return set()
    if isinstance(c, VarDep):
        return resource_vars(c.left) | resource_vars(c.right)
    if isinstance(c, LabelDep):
        return resource_vars(c.var)
    out: set[str] = set()
    for x in c.items:
        out |= constraint_vars(x)
    return out


def constraint_size(c) -> int:
    if isinstance(c, (And, Or)):
        return 1 + sum(constraint_size(x) for x in c.items)
    return 1


def constraint_lines(c) -> list[str]:
    """Top-level conjuncts, one per line."""
    if isinstance(c, And):
        return [str(x) for x in c.items]
    if isinstance(c, Top):
        return []
    return [str(c)]


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class PatVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PatBox:
    inner: Pattern

    def __str__(self) -> str:
        return f"[{self.inner}]"


@dataclass(frozen=True)
class PatInt:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class PatCon:
    con: str  # "pair", "list" (fixed length), "cons"
    args: tuple[Pattern, ...]

    def __str__(self) -> str:
        return _con_str(self.con, [str(a) for a in self.args])


Pattern = Union[PatVar, PatBox, PatInt, PatCon]
WILDCARD = "_"


def _con_str(con: str, parts: list[str]) -> str:
    if con == "pair":
        return "(" + ", ".join(parts) + ")"
    if con == "list":
        return "[" + ", ".join(parts) + "]"
    return f"({parts[0]} : {parts[1]})"


def pattern_binders(p: Pattern) -> list[str]:
    if isinstance(p, PatVar):
        return [] if p.name == WILDCARD else [p.name]
    if isinstance(p, PatBox):
        return pattern_binders(p.inner)
    if isinstance(p, PatCon):
        return [v for a in p.args for v in pattern_binders(a)]
    return []


@dataclass(frozen=True)
class MInt:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class MVar:
    name: str
    span: object = _nospan()

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class MConst:
    """A built-in primitive; typed by its signature, never part of a context."""

    name: str
    span: object = _nospan()

    def __str__(self) -> str:
        return self.name if self.name[0].isalpha() else f"({self.name})"


@dataclass(frozen=True)
class MApp:
    fn: Term
    arg: Term

    def __str__(self) -> str:
        f = str(self.fn)
        if isinstance(self.fn, (MLam, MCase, MVerOf, MUnversion)):
            f = f"({f})"
        a = str(self.arg)
        if isinstance(self.arg, (MApp, MLam, MCase, MVerOf, MUnversion)):
            a = f"({a})"
        return f"{f} {a}"


@dataclass(frozen=True)
class MLam:
    pattern: Pattern
    body: Term

    def __str__(self) -> str:
        return f"λ{self.pattern}.{self.body}"


@dataclass(frozen=True)
class MPromote:
    body: Term

    def __str__(self) -> str:
        return f"[{self.body}]"


@dataclass(frozen=True)
class MCon:
    con: str  # "pair", "list", "cons"
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return _con_str(self.con, [str(a) for a in self.args])


@dataclass(frozen=True)
class MBranch:
    pattern: Pattern
    body: Term


@dataclass(frozen=True)
class MCase:
    scrutinee: Term
    branches: tuple[MBranch, ...]

    def __str__(self) -> str:
        alts = "; ".join(f"{b.pattern} ↦ {b.body}" for b in self.branches)
        return f"case {self.scrutinee} of {{{alts}}}"


@dataclass(frozen=True)
class MVerOf:
    label: tuple[tuple[str, str], ...]
    body: Term
    span: object = _nospan()

    def __str__(self) -> str:
        inner = ", ".join(f"{m}={v}" for m, v in self.label)
        return f"ver [{inner}] of ({self.body})"


@dataclass(frozen=True)
class MUnversion:
    body: Term
    span: object = _nospan()

    def __str__(self) -> str:
        return f"unversion ({self.body})"


Term = Union[MInt, MVar, MConst, MApp, MLam, MPromote, MCon, MCase, MVerOf, MUnversion]


def term_children(t: Term) -> list[Term]:
    if isinstance(t, (MInt, MVar, MConst)):
        return []
    if isinstance(t, MApp):
        return [t.fn, t.arg]
    if isinstance(t, MCon):
        return list(t.args)
    if isinstance(t, MCase):
        return [t.scrutinee] + [b.body for b in t.branches]
    return [t.body]


def walk_term(t: Term) -> Iterator[Term]:
    yield t
    for c in term_children(t):
        yield from walk_term(c)


def term_free_vars(t: Term, *, versioned_only: bool = False) -> set[str]:
    """Free variables; with ``versioned_only`` occurrences under unversion are skipped."""
    if isinstance(t, MVar):
        return {t.name}
    if isinstance(t, (MInt, MConst)):
        return set()
    if isinstance(t, MUnversion) and versioned_only:
        return set()
    if isinstance(t, MLam):
        return term_free_vars(t.body, versioned_only=versioned_only) - set(pattern_binders(t.pattern))
    if isinstance(t, MCase):
        out = term_free_vars(t.scrutinee, versioned_only=versioned_only)
        for b in t.branches:
            out |= term_free_vars(b.body, versioned_only=versioned_only) - set(pattern_binders(b.pattern))
        return out
    out: set[str] = set()
    for c in term_children(t):
        out |= term_free_vars(c, versioned_only=versioned_only)
    return out


# -- substitutions -----------------------------------------------------------


@dataclass(frozen=True)
class Substitution:
    """θ maps type variables to types and resource variables to resources."""

    types: tuple[tuple[str, Type], ...] = ()
    res: tuple[tuple[str, Resource], ...] = ()

    def __post_init__(self) -> None:
        tdom = {k for k, _ in self.types}
        rdom = {k for k, _ in self.res}
        if tdom & rdom:
            raise KindError(f"variables bound at two kinds: {sorted(tdom & rdom)}")
        for k, v in self.types:
            if not isinstance(v, (TInt, TVar, TArrow, TBox, TCon)):
                raise KindError(f"type variable {k} mapped to non-type {v}")
        for k, v in self.res:
            if not isinstance(v, (Bottom, Labels, RVar)):
                raise KindError(f"resource variable {k} mapped to non-resource {v}")

    @classmethod
    def make(cls, types: dict | None = None, res: dict | None = None) -> Substitution:
        return cls(tuple(sorted((types or {}).items())), tuple(sorted((res or {}).items())))

    @property
    def tmap(self) -> dict[str, Type]:
        return dict(self.types)

    @property
    def rmap(self) -> dict[str, Resource]:
        return dict(self.res)

    def domain(self) -> set[str]:
        return {k for k, _ in self.types} | {k for k, _ in self.res}

    def __bool__(self) -> bool:
        return bool(self.types or self.res)

    def __str__(self) -> str:
        parts = [f"{k} ↦ {v}" for k, v in self.types] + [f"{k} ↦ {res_str(v)}" for k, v in self.res]
        return "[" + ", ".join(parts) + "]"


EMPTY_SUBST = Substitution()


def _subst_res(tm: dict, rm: dict, r):
    if isinstance(r, RVar):
        if r.name in tm:
            raise KindError(f"resource position holds type variable {r.name}")
        return rm.get(r.name, r)
    if isinstance(r, RAdd):
        return res_plus(_subst_res(tm, rm, r.left), _subst_res(tm, rm, r.right))
    if isinstance(r, RMul):
        return res_times(_subst_res(tm, rm, r.left), _subst_res(tm, rm, r.right))
    return r


def _subst_type(tm: dict, rm: dict, a: Type) -> Type:
    if isinstance(a, TVar):
        if a.name in rm:
            raise KindError(f"type position holds resource variable {a.name}")
        return tm.get(a.name, a)
    if isinstance(a, TArrow):
        return TArrow(_subst_type(tm, rm, a.arg), _subst_type(tm, rm, a.res))
    if isinstance(a, TBox):
        return TBox(_subst_res(tm, rm, a.res), _subst_type(tm, rm, a.body))
    if isinstance(a, TCon):
        return TCon(a.name, tuple(_subst_type(tm, rm, x) for x in a.args))
    return a


def _subst_constraint(tm: dict, rm: dict, c):
    if isinstance(c, Top):
        return c
    if isinstance(c, VarDep):
        return VarDep(_subst_res(tm, rm, c.left), _subst_res(tm, rm, c.right))
    if isinstance(c, LabelDep):
        return LabelDep(_subst_res(tm, rm, c.var), c.dep)
    if isinstance(c, And):
        return And(tuple(_subst_constraint(tm, rm, x) for x in c.items))
    return Or(tuple(_subst_constraint(tm, rm, x) for x in c.items), c.origin)


def apply_subst(s: Substitution, target):
    tm, rm = s.tmap, s.rmap
    if isinstance(target, (TInt, TVar, TArrow, TBox, TCon)):
        return _subst_type(tm, rm, target)
    if isinstance(target, (Bottom, Labels, RVar, RAdd, RMul)):
        return _subst_res(tm, rm, target)
    if isinstance(target, TypeEnv):
        out = []
        for e in target.entries:
            if isinstance(e, Linear):
                out.append(Linear(e.name, _subst_type(tm, rm, e.type)))
            else:
                out.append(Graded(e.name, _subst_type(tm, rm, e.type), _subst_res(tm, rm, e.res)))
        return TypeEnv(tuple(out))
    if isinstance(target, (Top, VarDep, LabelDep, And, Or)):
        return _subst_constraint(tm, rm, target)
    if isinstance(target, tuple) and len(target) == 2 and not isinstance(target[0], str):
        return (apply_subst(s, target[0]), apply_subst(s, target[1]))
    raise TypeError(f"cannot substitute into {target!r}")


def _occurs(name: str, a: Type) -> bool:
    return name in type_vars(a)


def unify_resources(r1: Resource, r2: Resource) -> Substitution:
    if r1 == r2:
        return EMPTY_SUBST
    if isinstance(r1, RVar):
        return Substitution.make(res={r1.name: r2})
    if isinstance(r2, RVar):
        return Substitution.make(res={r2.name: r1})
    raise ResourceMismatch(f"cannot unify resources {res_str(r1)} and {res_str(r2)}")


def unify_types(a: Type, b: Type) -> Substitution:
    """Σ ⊢ A ∼ B ▷ θ, with an occurs check on variable binding."""
    if a == b:
        return EMPTY_SUBST
    if isinstance(a, TVar):
        if _occurs(a.name, b):
            raise OccursCheck(f"{a} occurs in {b}")
        return Substitution.make(types={a.name: b})
    if isinstance(b, TVar):
        if _occurs(b.name, a):
            raise OccursCheck(f"{b} occurs in {a}")
        return Substitution.make(types={b.name: a})
    if isinstance(a, TArrow) and isinstance(b, TArrow):
        s1 = unify_types(b.arg, a.arg)
        s2 = unify_types(apply_subst(s1, a.res), apply_subst(s1, b.res))
        return subst_compose(s1, s2)
    if isinstance(a, TBox) and isinstance(b, TBox):
        s1 = unify_types(a.body, b.body)
        s2 = unify_resources(apply_subst(s1, a.res), apply_subst(s1, b.res))
        return subst_compose(s1, s2)
    if isinstance(a, TCon) and isinstance(b, TCon) and a.name == b.name and len(a.args) == len(b.args):
        s = EMPTY_SUBST
        for x, y in zip(a.args, b.args):
            s = subst_compose(s, unify_types(apply_subst(s, x), apply_subst(s, y)))
        return s
    raise Mismatch(f"cannot unify {a} with {b}")


def _unify_any(x, y) -> Substitution:
    if isinstance(x, (Bottom, Labels, RVar)) and isinstance(y, (Bottom, Labels, RVar)):
        return unify_resources(x, y)
    if isinstance(x, (Bottom, Labels, RVar)) or isinstance(y, (Bottom, Labels, RVar)):
        raise KindError(f"kind clash between {x} and {y}")
    return unify_types(x, y)


def subst_compose(t1: Substitution, t2: Substitution) -> Substitution:
    """θ1 ⊎ θ2: union, unifying the images of variables bound by both.

    The result is closed under itself so that it is idempotent.  Arguments
    that are not idempotent themselves (chains or cycles such as a ↦ b,
    b ↦ a) are first replaced by the unifier of their own bindings.
    """
    t1, t2 = _idempotent(t1), _idempotent(t2)
    merged: dict[str, object] = {}
    kinds: dict[str, str] = {}
    for k, v in t1.types:
        merged[k], kinds[k] = v, "t"
    for k, v in t1.res:
        merged[k], kinds[k] = v, "r"
    pending = [(k, v, "t") for k, v in t2.types] + [(k, v, "r") for k, v in t2.res]
    while pending:
        k, v, kind = pending.pop(0)
        if k in merged:
            if kinds[k] != kind:
                raise KindError(f"{k} bound at two kinds")
            extra = _unify_any(merged[k], v)
            pending += [(a, b, "t") for a, b in extra.types] + [(a, b, "r") for a, b in extra.res]
        else:
            tm = {a: b for a, b in merged.items() if kinds[a] == "t"}
            rm = {a: b for a, b in merged.items() if kinds[a] == "r"}
            w = _subst_type(tm, rm, v) if kind == "t" else _subst_res(tm, rm, v)
            if w in (TVar(k), RVar(k)):
                continue
            merged[k], kinds[k] = v, kind
    return _close(merged, kinds)


def _idempotent(s: Substitution) -> Substitution:
    s = Substitution(tuple((k, v) for k, v in s.types if v != TVar(k)),
                     tuple((k, v) for k, v in s.res if v != RVar(k)))
    if all(apply_subst(s, v) == v for _, v in s.types + s.res):
        return s
    eq = _Equations()
    for k, v in s.types:
        eq.types(TVar(k), v)
    for k, v in s.res:
        eq.res(RVar(k), v)
    return eq.result()


def _close(merged: dict, kinds: dict) -> Substitution:
    tm = {k: v for k, v in merged.items() if kinds[k] == "t"}
    rm = {k: v for k, v in merged.items() if kinds[k] == "r"}
    for _ in range(len(merged) + 1):
        new_rm = {}
        for k, v in rm.items():
            w = _subst_res(tm, rm, v)
            if w == RVar(k):
                continue
            new_rm[k] = w
        new_tm = {}
        for k, v in tm.items():
            w = _subst_type(tm, new_rm, v)
            if w == TVar(k):
                continue
            if _occurs(k, w):
                raise OccursCheck(f"{k} occurs in {w}")
            new_tm[k] = w
        if new_tm == tm and new_rm == rm:
            break
        tm, rm = new_tm, new_rm
    else:
        raise OccursCheck("substitution does not close")
    return Substitution.make(tm, rm)


class _Equations:
    """Triangular unifier for a whole set of equations, resolved once at the end."""

    def __init__(self) -> None:
        self.tb: dict[str, Type] = {}
        self.rb: dict[str, Resource] = {}

    def rfind(self, r):
        while isinstance(r, RVar) and r.name in self.rb:
            r = self.rb[r.name]
        return r

    def tfind(self, a):
        while isinstance(a, TVar) and a.name in self.tb:
            a = self.tb[a.name]
        return a

    def occurs(self, name: str, a) -> bool:
        a = self.tfind(a)
        if isinstance(a, TVar):
            return a.name == name
        if isinstance(a, TArrow):
            return self.occurs(name, a.arg) or self.occurs(name, a.res)
        if isinstance(a, TBox):
            return self.occurs(name, a.body)
        if isinstance(a, TCon):
            return any(self.occurs(name, x) for x in a.args)
        return False

    def res(self, r1, r2) -> None:
        r1, r2 = self.rfind(r1), self.rfind(r2)
        if r1 == r2:
            return
        if isinstance(r1, RVar):
            self.rb[r1.name] = r2
        elif isinstance(r2, RVar):
            self.rb[r2.name] = r1
        else:
            raise ResourceMismatch(f"cannot unify resources {res_str(r1)} and {res_str(r2)}")

    def types(self, a, b) -> None:
        a, b = self.tfind(a), self.tfind(b)
        if a == b:
            return
        if isinstance(a, TVar) or isinstance(b, TVar):
            v, other = (a, b) if isinstance(a, TVar) else (b, a)
            if self.occurs(v.name, other):
                raise OccursCheck(f"{v} occurs in {self.resolve(other)}")
            self.tb[v.name] = other
            return
        if isinstance(a, TArrow) and isinstance(b, TArrow):
            self.types(b.arg, a.arg)
            self.types(a.res, b.res)
            return
        if isinstance(a, TBox) and isinstance(b, TBox):
            self.types(a.body, b.body)
            self.res(a.res, b.res)
            return
        if isinstance(a, TCon) and isinstance(b, TCon) and a.name == b.name and len(a.args) == len(b.args):
            for x, y in zip(a.args, b.args):
                self.types(x, y)
            return
        raise Mismatch(f"cannot unify {self.resolve(a)} with {self.resolve(b)}")

    def resolve(self, a):
        a = self.tfind(a)
        if isinstance(a, TArrow):
            return TArrow(self.resolve(a.arg), self.resolve(a.res))
        if isinstance(a, TBox):
            return TBox(self.rfind(a.res), self.resolve(a.body))
        if isinstance(a, TCon):
            return TCon(a.name, tuple(self.resolve(x) for x in a.args))
        return a

    def result(self) -> Substitution:
        tm = {k: self.resolve(TVar(k)) for k in self.tb}
        rm = {k: self.rfind(RVar(k)) for k in self.rb}
        return Substitution.make({k: v for k, v in tm.items() if v != TVar(k)},
                                 {k: v for k, v in rm.items() if v != RVar(k)})


def solve_equations(equations) -> Substitution:
    """Most general idempotent unifier of a set of type equations.

    Equivalent to folding ``unify_types`` with ``subst_compose`` over the
    equations, without rebuilding the substitution after each step.
    """
    eq = _Equations()
    for a, b in equations:
        eq.types(a, b)
    return eq.result()


# -- ground semantics helpers (used by tests and the checker) -----------------


def label_in(l: VersionLabel, r: Resource) -> bool:
    return isinstance(r, Labels) and l in r.labels


def res_le(r1, r2) -> bool:
    return res_leq(eval_res(r1), eval_res(r2))

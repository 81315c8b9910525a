"""Bundling: merge the per-version interfaces of a module into one interface."""
from __future__ import annotations

from dataclasses import dataclass, field

from .version_algebra import RVar, version_key
from .vlmini import (
    TOP,
    Constraint,
    KindContext,
    LabelDep,
    Or,
    TArrow,
    TBox,
    TCon,
    TVar,
    Type,
    VarDep,
    conj,
    constraint_lines,
    erase,
    resource_vars,
)


class ErasedTypeMismatch(Exception):
    def __init__(self, symbol: str, versions: list[str], detail: str = ""):
        msg = f"{symbol} has incompatible types across versions {', '.join(versions)}"
        super().__init__(msg + (f": {detail}" if detail else ""))
        self.symbol = symbol
        self.versions = versions


@dataclass
class VersionedInterface:
    module: str
    version: str
    entries: dict[str, tuple[Type, Constraint]] = field(default_factory=dict)


@dataclass
class BundledInterface:
    module: str
    entries: dict[str, tuple[Type, Constraint]] = field(default_factory=dict)
    # Conjunction of every contributing version's own constraints.
    global_constraint: Constraint = TOP
    # symbol -> versions that define it, ascending
    versions: dict[str, list[str]] = field(default_factory=dict)
    # symbol -> the bundle variables minted for it (outermost first)
    gammas: dict[str, list[str]] = field(default_factory=dict)

    def render(self) -> str:
        lines = []
        for symbol, (ty, c) in self.entries.items():
            lines.append(f"{symbol} : {ty} | {c}")
        extra = constraint_lines(self.global_constraint)
        if extra:
            lines.append("-- global")
            lines.extend(extra)
        return "\n".join(lines) + "\n"


def _alpha_eq(a: Type, b: Type, fwd: dict, back: dict) -> bool:
    if isinstance(a, TVar) and isinstance(b, TVar):
        if fwd.setdefault(a.name, b.name) != b.name:
            return False
        return back.setdefault(b.name, a.name) == a.name
    if isinstance(a, TArrow) and isinstance(b, TArrow):
        return _alpha_eq(a.arg, b.arg, fwd, back) and _alpha_eq(a.res, b.res, fwd, back)
    if isinstance(a, TCon) and isinstance(b, TCon):
        return (
            a.name == b.name
            and len(a.args) == len(b.args)
            and all(_alpha_eq(x, y, fwd, back) for x, y in zip(a.args, b.args))
        )
    return a == b


def erased_equal(a: Type, b: Type) -> bool:
    """Equal after removing every □_r, up to renaming of type variables."""
    return _alpha_eq(erase(a), erase(b), {}, {})


def box_resources(a: Type) -> list:
    """Resources at box positions, outer boxes before inner ones, left to right."""
    if isinstance(a, TBox):
        return [a.res] + box_resources(a.body)
    if isinstance(a, TArrow):
        return box_resources(a.arg) + box_resources(a.res)
    if isinstance(a, TCon):
        return [r for x in a.args for r in box_resources(x)]
    return []


def _shape(a: Type):
    """Type skeleton with boxes kept and resources dropped."""
    if isinstance(a, TBox):
        return ("box", _shape(a.body))
    if isinstance(a, TArrow):
        return ("->", _shape(a.arg), _shape(a.res))
    if isinstance(a, TCon):
        return (a.name,) + tuple(_shape(x) for x in a.args)
    if isinstance(a, TVar):
        return ("var",)
    return ("Int",)


def rebox(a: Type, sigma: KindContext, prefix: str = "γ", tvars: dict | None = None) -> tuple[Type, list[RVar]]:
    """Copy ``a`` with fresh resource variables at every box and fresh type variables."""
    tvars = {} if tvars is None else tvars
    minted: list[RVar] = []

    def go(t: Type) -> Type:
        if isinstance(t, TBox):
            g = sigma.fresh_res(prefix)
            minted.append(g)
            return TBox(g, go(t.body))
        if isinstance(t, TArrow):
            arg = go(t.arg)
            return TArrow(arg, go(t.res))
        if isinstance(t, TCon):
            return TCon(t.name, tuple(go(x) for x in t.args))
        if isinstance(t, TVar):
            if t.name not in tvars:
                tvars[t.name] = sigma.fresh_type()
            return tvars[t.name]
        return t

    return go(a), minted


def bundle(module: str, interfaces: list[VersionedInterface], sigma: KindContext | None = None) -> BundledInterface:
    if not interfaces:
        raise ValueError("bundle needs at least one interface")
    sigma = sigma if sigma is not None else KindContext()
    ordered = sorted(interfaces, key=lambda i: version_key(i.version))
    out = BundledInterface(module)
    out.global_constraint = conj(*(c for i in ordered for _, c in i.entries.values()))
    symbols: list[str] = []
    for iface in ordered:
        for s in iface.entries:
            if s not in symbols:
                symbols.append(s)
    for symbol in symbols:
        defining = [i for i in ordered if symbol in i.entries]
        versions = [i.version for i in defining]
        first_type = defining[0].entries[symbol][0]
        for other in defining[1:]:
            ty = other.entries[symbol][0]
            if not erased_equal(first_type, ty):
                raise ErasedTypeMismatch(symbol, versions, f"{erase(first_type)} vs {erase(ty)}")
            if _shape(first_type) != _shape(ty):
                raise ErasedTypeMismatch(symbol, versions, f"box structure {first_type} vs {ty}")
        bundled_type, gammas = rebox(first_type, sigma)
        disjuncts = []
        for iface in defining:
            alphas = box_resources(iface.entries[symbol][0])
            parts: list = []
            if gammas:
                parts.append(LabelDep(gammas[0], ((module, iface.version),)))
            parts.extend(VarDep(g, a) for g, a in zip(gammas, alphas))
            disjuncts.append(conj(*parts))
        out.entries[symbol] = (bundled_type, Or(tuple(disjuncts), origin=f"{module}.{symbol}"))
        out.versions[symbol] = versions
        out.gammas[symbol] = [g.name for g in gammas]
    return out


def clone_entry(
    bundled: BundledInterface, symbol: str, sigma: KindContext
) -> tuple[Type, Constraint, dict[str, str]]:
    """Copy an entry with fresh bundle variables and fresh type variables.

    Per-version variables stay shared: they belong to the global constraint.
    """
    ty, c = bundled.entries[symbol]
    own = bundled.gammas[symbol]
    new_type, minted = rebox(ty, sigma)
    mapping = {}
    for old, new in zip(box_resources(ty), minted):
        if isinstance(old, RVar) and old.name in own:
            mapping.setdefault(old.name, new.name)
    return new_type, _rename_constraint(c, mapping), mapping


def _rename_res(r, mapping):
    if isinstance(r, RVar) and r.name in mapping:
        return RVar(mapping[r.name])
    return r


def _rename_constraint(c, mapping):
    if isinstance(c, VarDep):
        return VarDep(_rename_res(c.left, mapping), _rename_res(c.right, mapping))
    if isinstance(c, LabelDep):
        return LabelDep(_rename_res(c.var, mapping), c.dep)
    if isinstance(c, Or):
        return Or(tuple(_rename_constraint(x, mapping) for x in c.items), c.origin)
    if hasattr(c, "items"):
        return type(c)(tuple(_rename_constraint(x, mapping) for x in c.items))
    return c


def outer_resource(ty: Type):
    return ty.res if isinstance(ty, TBox) else None


__all__ = [
    "BundledInterface",
    "ErasedTypeMismatch",
    "VersionedInterface",
    "box_resources",
    "bundle",
    "clone_entry",
    "erased_equal",
    "rebox",
    "resource_vars",
]

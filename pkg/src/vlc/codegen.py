"""Version specialization.

Before inference every occurrence of an imported symbol is renamed apart
(``concat#1``, ``concat#2``) so each can take its own version.  After solving,
``specialize`` rewires those occurrences to per-version definitions named
``symbol__Module__1_0_0`` and pulls in everything they need.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from . import builtins
from . import surface as S
from .girard import ResidualVariable, reverse_translate
from .parser import pretty_term
from .solver import Assignment
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
    pattern_binders,
)


class CodegenError(Exception):
    pass


class MissingDefinition(CodegenError):
    def __init__(self, symbol: str, module: str, version: str):
        super().__init__(f"{module} {version} does not define {symbol}")
        self.symbol = symbol
        self.module = module
        self.version = version


class AmbiguousName(CodegenError):
    def __init__(self, name: str, modules: list[str]):
        super().__init__(f"{name} is exported by several imports: {', '.join(modules)}")
        self.name = name
        self.modules = modules


def mangle(symbol: str, module: str, version: str) -> str:
    return f"{symbol}__{module}__{version.replace('.', '_')}"


def unmangle(name: str) -> tuple[str, str, str]:
    symbol, module, version = name.rsplit("__", 2)
    return symbol, module, version.replace("_", ".")


# -- duplication -------------------------------------------------------------


@dataclass(frozen=True)
class Occurrence:
    module: str
    symbol: str


@dataclass
class Resolution:
    term: object
    # fresh name -> original symbol
    renamed: dict[str, str] = field(default_factory=dict)
    # fresh name -> where it comes from
    occurrences: dict[str, Occurrence] = field(default_factory=dict)
    # same-module definitions referenced (mangled names)
    local_refs: set[str] = field(default_factory=set)


class _Resolver:
    def __init__(self, imports: Mapping[str, list[str]], local: Mapping[str, str], counter):
        self.imports = imports
        self.local = local
        self.counter = counter
        self.out = Resolution(None)

    def var(self, t: MVar, bound: frozenset):
        name = t.name
        if name in bound:
            return t
        if name in self.local:
            target = self.local[name]
            self.out.local_refs.add(target)
            return MVar(target, span=t.span)
        owners = self.imports.get(name, [])
        if len(owners) > 1:
            raise AmbiguousName(name, owners)
        if owners:
            fresh = f"{name}#{next(self.counter)}"
            self.out.renamed[fresh] = name
            self.out.occurrences[fresh] = Occurrence(owners[0], name)
            return MVar(fresh, span=t.span)
        if builtins.is_builtin(name):
            return MConst(name, span=t.span)
        return t

    def go(self, t, bound: frozenset):
        if isinstance(t, MVar):
            return self.var(t, bound)
        if isinstance(t, (MInt, MConst)):
            return t
        if isinstance(t, MApp):
            return MApp(self.go(t.fn, bound), self.go(t.arg, bound))
        if isinstance(t, MLam):
            return MLam(t.pattern, self.go(t.body, bound | set(pattern_binders(t.pattern))))
        if isinstance(t, MPromote):
            return MPromote(self.go(t.body, bound))
        if isinstance(t, MCon):
            return MCon(t.con, tuple(self.go(a, bound) for a in t.args))
        if isinstance(t, MCase):
            return MCase(
                self.go(t.scrutinee, bound),
                tuple(
                    MBranch(b.pattern, self.go(b.body, bound | set(pattern_binders(b.pattern))))
                    for b in t.branches
                ),
            )
        if isinstance(t, MVerOf):
            return MVerOf(t.label, self.go(t.body, bound), span=t.span)
        if isinstance(t, MUnversion):
            return MUnversion(self.go(t.body, bound), span=t.span)
        raise TypeError(f"not a VLMini term: {t!r}")


def duplicate_externals(
    t,
    imports: Mapping[str, list[str]] | Mapping[str, str],
    *,
    local: Mapping[str, str] | None = None,
    counter: Iterator[int] | None = None,
) -> Resolution:
    """Resolve free names of ``t`` and rename every imported occurrence apart.

    Resolution order is local binders, then same-module definitions (``local``
    maps them to their mangled names), then imports (symbol -> exporting
    modules), then primitives, which become constants.
    """
    norm = {k: ([v] if isinstance(v, str) else list(v)) for k, v in imports.items()}
    r = _Resolver(norm, dict(local or {}), counter or itertools.count(1))
    r.out.term = r.go(t, frozenset())
    return r.out


def rename_vars(t, mapping: Mapping[str, str]):
    """Rename free occurrences according to ``mapping`` (fresh names never clash)."""
    if isinstance(t, MVar):
        return MVar(mapping[t.name], span=t.span) if t.name in mapping else t
    if isinstance(t, (MInt, MConst)):
        return t
    if isinstance(t, MApp):
        return MApp(rename_vars(t.fn, mapping), rename_vars(t.arg, mapping))
    if isinstance(t, MLam):
        return MLam(t.pattern, rename_vars(t.body, mapping))
    if isinstance(t, MPromote):
        return MPromote(rename_vars(t.body, mapping))
    if isinstance(t, MCon):
        return MCon(t.con, tuple(rename_vars(a, mapping) for a in t.args))
    if isinstance(t, MCase):
        return MCase(
            rename_vars(t.scrutinee, mapping),
            tuple(MBranch(b.pattern, rename_vars(b.body, mapping)) for b in t.branches),
        )
    if isinstance(t, MVerOf):
        return MVerOf(t.label, rename_vars(t.body, mapping), span=t.span)
    if isinstance(t, MUnversion):
        return MUnversion(rename_vars(t.body, mapping), span=t.span)
    raise TypeError(f"not a VLMini term: {t!r}")


# -- specialization ----------------------------------------------------------


@dataclass
class CompiledDef:
    """One top-level definition of one module version after resolution."""

    module: str
    version: str
    name: str
    term: object
    # fresh occurrence name -> (origin, resource variable carrying its label)
    occurrences: dict[str, tuple[Occurrence, str]] = field(default_factory=dict)
    local_refs: set[str] = field(default_factory=set)

    @property
    def mangled(self) -> str:
        return mangle(self.name, self.module, self.version)


@dataclass
class SpecializedProgram:
    defs: dict[str, S.Term]
    entry: str

    def render(self, module_name: str = "Main") -> str:
        lines = [f"module {module_name} where"]
        lines += [f"{name} = {pretty_term(body)}" for name, body in self.defs.items()]
        return "\n".join(lines) + "\n"

    def to_module(self, module_name: str = "Main") -> S.SurfaceModule:
        return S.SurfaceModule(module_name, (), tuple(self.defs.items()))


def has_version_nodes(t: S.Term) -> bool:
    return any(isinstance(x, (S.VerOf, S.Unversion)) for x in S.walk(t))


def specialize(
    defs: Mapping[str, CompiledDef],
    sol: Assignment,
    entry: str,
) -> SpecializedProgram:
    """Rewire occurrences under ``sol`` starting from the mangled ``entry``.

    Definitions reached from the entry are specialized under the same
    assignment, since every per-version constraint was solved together.
    """
    if entry not in defs:
        symbol, module, version = unmangle(entry)
        raise MissingDefinition(symbol, module, version)
    out: dict[str, S.Term] = {}
    queue = [entry]
    while queue:
        name = queue.pop(0)
        if name in out:
            continue
        d = defs[name]
        mapping = {}
        for fresh, (occ, gamma) in d.occurrences.items():
            label = sol.get(gamma)
            if label is None:
                raise ResidualVariable(f"no version chosen for {occ.symbol} ({gamma}) in {d.module}.{d.name}")
            version = label.get(occ.module)
            if version is None:
                raise ResidualVariable(f"label for {gamma} does not mention {occ.module}")
            target = mangle(occ.symbol, occ.module, version)
            if target not in defs:
                raise MissingDefinition(occ.symbol, occ.module, version)
            mapping[fresh] = target
            queue.append(target)
        queue.extend(sorted(d.local_refs))
        term = rename_vars(d.term, mapping)
        out[name] = reverse_translate(term, erase_version_terms=True)
    return SpecializedProgram(out, entry)

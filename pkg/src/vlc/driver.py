"""Compilation session: load, resolve, translate, infer, bundle, solve, specialize."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from . import surface as S
from .bundling import BundledInterface, ErasedTypeMismatch, VersionedInterface, bundle, clone_entry
from .codegen import CodegenError, CompiledDef, SpecializedProgram, duplicate_externals, mangle, specialize
from .girard import ResidualVariable, forward_translate
from .inference import InferenceError, Inferencer, unify
from .loader import Repository
from .solver import Assignment, Solver, Unsat, render_core
from .version_algebra import ModuleRegistry, RVar
from .vlmini import (
    TOP,
    Constraint,
    Graded,
    KindContext,
    MPromote,
    TBox,
    Type,
    TypeEnv,
    VLMiniError,
    apply_subst,
    conj,
    constraint_lines,
    constraint_vars,
    resource_vars,
)


@dataclass
class Diagnostic:
    severity: str
    message: str
    span: object = None
    core: list[str] = field(default_factory=list)

    def render(self) -> str:
        where = f"{self.span}: " if self.span is not None else ""
        lines = [f"{where}{self.severity}: {self.message}"]
        lines += [f"  {c}" for c in self.core]
        return "\n".join(lines)


class CompileFailure(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("\n".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class DefResult:
    compiled: CompiledDef
    type: Type
    constraint: Constraint
    theta: tuple = ()


@dataclass
class CompileResult:
    entry_module: str
    entry_version: str
    defs: dict[str, DefResult]
    bundles: dict[str, BundledInterface]
    constraint: Constraint
    registry: ModuleRegistry
    assignment: Assignment | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    solve_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.assignment is not None and not any(d.severity == "error" for d in self.diagnostics)

    def entry_defs(self) -> dict[str, DefResult]:
        return {
            k: d for k, d in self.defs.items()
            if d.compiled.module == self.entry_module and d.compiled.version == self.entry_version
        }

    def label_of(self, symbol: str):
        """The label chosen for an entry definition's outer resource."""
        d = self.defs[mangle(symbol, self.entry_module, self.entry_version)]
        if not isinstance(d.type, TBox) or not isinstance(d.type.res, RVar) or self.assignment is None:
            return None
        return self.assignment.get(d.type.res.name)

    def specialize(self, symbol: str = "main") -> SpecializedProgram:
        if self.assignment is None:
            raise CompileFailure(self.diagnostics)
        return specialize(
            {k: d.compiled for k, d in self.defs.items()},
            self.assignment,
            mangle(symbol, self.entry_module, self.entry_version),
        )


def _def_order(module: S.SurfaceModule) -> list[str]:
    names = module.symbols()
    deps = {n: S.free_vars(module.definition(n)) & set(names) for n in names}
    out: list[str] = []

    def visit(n: str) -> None:
        if n in out:
            return
        for d in sorted(deps[n]):
            visit(d)
        out.append(n)

    for n in names:
        visit(n)
    return out


class Session:
    def __init__(self, repo: Repository, *, trace: list | None = None):
        self.repo = repo
        self.sigma = KindContext()
        self.counter = itertools.count(1)
        self.bundles: dict[str, BundledInterface] = {}
        self.defs: dict[str, DefResult] = {}
        self.trace = trace

    # per module version

    def compile_version(self, name: str, version: str) -> VersionedInterface:
        module = self.repo.module(name, version)
        imports: dict[str, list[str]] = {}
        for imp in module.imports:
            for sym in self.bundles[imp].entries:
                imports.setdefault(sym, []).append(imp)
        local = {n: mangle(n, name, version) for n in module.symbols()}
        env = TypeEnv()
        pending: list = []
        theta: tuple = ()
        inf = Inferencer(self.sigma, self.repo.registry, self.trace)
        for sym in _def_order(module):
            body = module.definition(sym)
            res = duplicate_externals(forward_translate(body), imports, local=local, counter=self.counter)
            compiled = CompiledDef(name, version, sym, res.term, local_refs=set(res.local_refs))
            occ_env = []
            clone_cs = []
            for fresh, occ in res.occurrences.items():
                ty, c, _ = clone_entry(self.bundles[occ.module], occ.symbol, self.sigma)
                if not isinstance(ty, TBox):
                    raise InferenceError(f"imported {occ.symbol} has no versioned type")
                occ_env.append(Graded(fresh, ty.body, ty.res))
                clone_cs.append(c)
                compiled.occurrences[fresh] = (occ, ty.res.name)
            scope = env.extend(occ_env)
            out = inf.synth(scope, MPromote(res.term))
            theta += out.theta
            env = env.extend([Graded(local[sym], out.type.body, out.type.res)])
            pending.append((sym, compiled, out.type, conj(*clone_cs, out.deps), out.theta))
        s = unify(self.sigma, theta)
        iface = VersionedInterface(name, version)
        for sym, compiled, ty, c, own in pending:
            ty, c = apply_subst(s, ty), apply_subst(s, c)
            for fresh, (occ, gamma) in list(compiled.occurrences.items()):
                g = apply_subst(s, RVar(gamma))
                compiled.occurrences[fresh] = (occ, g.name if isinstance(g, RVar) else gamma)
            self.defs[compiled.mangled] = DefResult(compiled, ty, c, own)
            iface.entries[sym] = (ty, c)
        return iface

    def compile_module(self, name: str) -> BundledInterface:
        ifaces = [self.compile_version(name, v) for v in self.repo.registry.versions(name)]
        b = bundle(name, ifaces, self.sigma)
        self.bundles[name] = b
        return b


def _variable_order(session: Session, entry: str, modules: list[str]) -> dict[str, tuple]:
    """Entry variables first, then importers before what they import."""
    rank = {entry: 0}
    for i, m in enumerate(reversed(modules)):
        rank.setdefault(m, i + 1)
    order: dict[str, tuple] = {}
    for d in session.defs.values():
        r = rank.get(d.compiled.module, len(rank))
        names = resource_vars(d.type) | constraint_vars(d.constraint)
        names |= {g for _, g in d.compiled.occurrences.values()}
        for v in names:
            key = (r, session.sigma.order_key(v), v)
            if v not in order or key < order[v]:
                order[v] = key
    return order


def compile_program(
    repo: Repository,
    entry: str,
    *,
    version: str | None = None,
    trace: list | None = None,
) -> CompileResult:
    """Compile ``entry`` (newest version by default) and solve its constraints.

    Type errors and version inconsistencies come back as diagnostics; the
    result's ``assignment`` is None in that case.
    """
    if entry not in repo.registry:
        raise CompileFailure([Diagnostic("error", f"unknown module {entry}")])
    version = version or repo.registry.newest(entry)
    session = Session(repo, trace=trace)
    modules = repo.transitive_imports(entry)
    universe = [m for m in modules if m != entry]
    reg = repo.registry.restrict(universe)
    result = CompileResult(entry, version, session.defs, session.bundles, TOP, reg)
    try:
        for m in universe:
            session.compile_module(m)
        session.compile_version(entry, version)
    except ErasedTypeMismatch as exc:
        result.diagnostics.append(Diagnostic("error", str(exc)))
        return result
    except (InferenceError, VLMiniError, CodegenError) as exc:
        result.diagnostics.append(Diagnostic("error", str(exc), getattr(exc, "span", None)))
        return result
    parts = [b.global_constraint for b in session.bundles.values()]
    parts += [d.constraint for d in result.entry_defs().values()]
    result.constraint = conj(*parts)
    order = _variable_order(session, entry, modules)
    solver = Solver(reg, universe, order=lambda v: order.get(v, (10**9, 10**9, v)))
    started = time.perf_counter()
    sol = solver.solve(result.constraint, variables=order.keys())
    result.solve_seconds = time.perf_counter() - started
    if isinstance(sol, Unsat):
        result.diagnostics.append(
            Diagnostic(
                "error",
                f"inconsistent versions in {entry}: no version label satisfies every dependency",
                core=render_core(sol.core),
            )
        )
        return result
    result.assignment = sol
    return result


def module_interfaces(repo: Repository, entry: str) -> dict[str, BundledInterface]:
    """Bundled interfaces of ``entry`` and everything it imports."""
    session = Session(repo)
    for m in repo.transitive_imports(entry):
        session.compile_module(m)
    return session.bundles


def constraint_text(result: CompileResult) -> str:
    lines = []
    for name, d in result.defs.items():
        lines.append(f"-- {d.compiled.module} {d.compiled.version} {d.compiled.name} : {d.type}")
        lines += [f"{a} ∼ {b}" for a, b in d.theta]
        lines += constraint_lines(d.constraint) or ["⊤"]
    return "\n".join(lines) + "\n"


__all__ = [
    "CompileFailure",
    "CompileResult",
    "Diagnostic",
    "ResidualVariable",
    "Session",
    "compile_program",
    "module_interfaces",
]

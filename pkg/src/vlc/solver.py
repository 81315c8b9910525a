"""Dependency-constraint solving over the finite label universe.

Every resource variable denotes one full label, i.e. a vector holding one
version index per module.  ``α ⪯ β`` makes two vectors equal, ``α ⪯ D``
fixes the components that ``D`` mentions.  The search keeps equality classes
in a union-find structure with an undo trail, propagates disjunctions that
have a single viable branch, and otherwise branches newest-version first.
The witness is then improved to the lexicographic maximum under the
newest-preference order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .version_algebra import Bottom, Labels, ModuleRegistry, RVar, VersionLabel
from .vlmini import And, LabelDep, Or, Top, VarDep, constraint_vars, partial_label_str


class SolverError(Exception):
    pass


class UnknownModule(SolverError):
    pass


@dataclass(frozen=True)
class Assignment:
    labels: dict[str, VersionLabel] = field(default_factory=dict, hash=False)

    def __getitem__(self, var: str) -> VersionLabel:
        return self.labels[var]

    def get(self, var: str) -> VersionLabel | None:
        return self.labels.get(var)

    def __contains__(self, var: str) -> bool:
        return var in self.labels

    def __len__(self) -> int:
        return len(self.labels)

    def items(self):
        return self.labels.items()


@dataclass
class Unsat:
    core: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return False


def default_order(name: str):
    m = re.search(r"(\d+)$", name)
    return (int(m.group(1)) if m else 10**12, name)


# -- literal normal form -----------------------------------------------------
# ("eq", a, b) | ("fix", a, module_index, version_index) | ("false",)
# A formula is (literals, ors) with ors a list of disjunct lists.


@dataclass
class _Formula:
    lits: list = field(default_factory=list)
    ors: list = field(default_factory=list)


class _Compiler:
    def __init__(self, reg: ModuleRegistry, modules: list[str]):
        self.reg = reg
        self.modules = modules
        self.mindex = {m: i for i, m in enumerate(modules)}

    def label_vector(self, l: VersionLabel) -> list[tuple[int, int]]:
        out = []
        for m, v in l.assignment:
            if m not in self.mindex:
                raise UnknownModule(f"label mentions module {m} outside the universe")
            out.append((self.mindex[m], self.reg.index(m, v)))
        return out

    def fix_all(self, var: str, l: VersionLabel) -> list:
        return [("fix", var, mi, vi) for mi, vi in self.label_vector(l)]

    def compile(self, c, into: _Formula) -> None:
        if isinstance(c, Top):
            return
        if isinstance(c, And):
            for x in c.items:
                self.compile(x, into)
            return
        if isinstance(c, Or):
            branches = []
            for x in c.items:
                f = _Formula()
                self.compile(x, f)
                branches.append(f)
            into.ors.append(branches)
            return
        if isinstance(c, LabelDep):
            for m, v in c.dep:
                if m not in self.reg or v not in self.reg.versions(m):
                    raise UnknownModule(f"unknown module version {m}={v}")
                if m not in self.mindex:
                    raise UnknownModule(f"module {m} is not in the universe")
            if not isinstance(c.var, RVar):
                into.lits.append(("ground", c))
                return
            for m, v in c.dep:
                into.lits.append(("fix", c.var.name, self.mindex[m], self.reg.index(m, v)))
            return
        if isinstance(c, VarDep):
            left, right = c.left, c.right
            if isinstance(left, RVar) and isinstance(right, RVar):
                into.lits.append(("eq", left.name, right.name))
                return
            if isinstance(left, RVar) or isinstance(right, RVar):
                var, other = (left, right) if isinstance(left, RVar) else (right, left)
                if isinstance(other, Bottom):
                    if var is left:
                        into.lits.append(("false",))
                    return
                if not other.labels:
                    return
                if len(other.labels) == 1:
                    into.lits.extend(self.fix_all(var.name, next(iter(other.labels))))
                    return
                branches = []
                for l in sorted(other.labels, key=self._label_key):
                    branches.append(_Formula(self.fix_all(var.name, l)))
                into.ors.append(branches)
                return
            into.lits.append(("ground", c))
            return
        raise SolverError(f"not a dependency constraint: {c!r}")

    def _label_key(self, l: VersionLabel):
        return tuple(vi for _, vi in self.label_vector(l))


def _ground_holds(c) -> bool:
    from .version_algebra import res_leq

    if isinstance(c, VarDep):
        return res_leq(c.left, c.right)
    if isinstance(c, LabelDep):
        r = c.var
        if isinstance(r, Bottom):
            return True
        return all(all(l.get(m) == v for m, v in c.dep) for l in r.labels)
    return True


# -- search state ------------------------------------------------------------


class _State:
    def __init__(self, nmod: int):
        self.nmod = nmod
        self.parent: dict[str, str] = {}
        self.size: dict[str, int] = {}
        self.comp: dict[str, dict[int, int]] = {}
        self.trail: list = []

    def find(self, x: str) -> str:
        p = self.parent.get(x)
        while p is not None and p != x:
            x = p
            p = self.parent.get(x)
        return x

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            entry = self.trail.pop()
            kind = entry[0]
            if kind == "parent":
                _, child, root, old_size, moved = entry
                del self.parent[child]
                self.size[root] = old_size
                for m in moved:
                    del self.comp[root][m]
            else:
                _, root, m = entry
                del self.comp[root][m]

    def fix(self, x: str, m: int, v: int) -> bool:
        r = self.find(x)
        comps = self.comp.setdefault(r, {})
        cur = comps.get(m)
        if cur is not None:
            return cur == v
        comps[m] = v
        self.trail.append(("fix", r, m))
        return True

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return True
        ca = self.comp.get(ra, {})
        cb = self.comp.get(rb, {})
        for m, v in ca.items():
            w = cb.get(m)
            if w is not None and w != v:
                return False
        if self.size.get(ra, 1) < self.size.get(rb, 1):
            ra, rb, ca, cb = rb, ra, cb, ca
        moved = [m for m in cb if m not in ca]
        target = self.comp.setdefault(ra, {})
        for m in moved:
            target[m] = cb[m]
        old = self.size.get(ra, 1)
        self.parent[rb] = ra
        self.size[ra] = old + self.size.get(rb, 1)
        self.trail.append(("parent", rb, ra, old, moved))
        return True

    def assert_lit(self, lit) -> bool:
        kind = lit[0]
        if kind == "eq":
            return self.union(lit[1], lit[2])
        if kind == "fix":
            return self.fix(lit[1], lit[2], lit[3])
        if kind == "false":
            return False
        return _ground_holds(lit[1])

    def assert_all(self, lits) -> bool:
        for lit in lits:
            if not self.assert_lit(lit):
                return False
        return True

    def entailed(self, lit) -> bool:
        kind = lit[0]
        if kind == "eq":
            return self.find(lit[1]) == self.find(lit[2])
        if kind == "fix":
            return self.comp.get(self.find(lit[1]), {}).get(lit[2]) == lit[3]
        if kind == "false":
            return False
        return _ground_holds(lit[1])

    def value(self, x: str, m: int) -> int | None:
        return self.comp.get(self.find(x), {}).get(m)


def _search(state: _State, ors: list) -> bool:
    """Satisfy every disjunction in ``ors`` on top of ``state``; state is kept on success."""
    pending = list(ors)
    while True:
        progress = False
        remaining = []
        best = None
        for branches in pending:
            viable = []
            satisfied = False
            for f in branches:
                if not f.ors and all(state.entailed(l) for l in f.lits):
                    satisfied = True
                    break
                mark = state.mark()
                ok = state.assert_all(f.lits)
                state.undo(mark)
                if ok:
                    viable.append(f)
            if satisfied:
                progress = True
                continue
            if not viable:
                return False
            if len(viable) == 1:
                if not state.assert_all(viable[0].lits):
                    return False
                remaining.extend(viable[0].ors)
                progress = True
                continue
            remaining.append(viable)
            if best is None or len(viable) < len(best):
                best = viable
        pending = remaining
        if not pending:
            return True
        if not progress:
            break
    rest = [b for b in pending if b is not best]
    for f in reversed(best):
        mark = state.mark()
        if state.assert_all(f.lits) and _search(state, rest + f.ors):
            return True
        state.undo(mark)
    return False


# -- public API --------------------------------------------------------------


class Solver:
    """Solves one constraint over one registry; reusable for cores and maximization."""

    def __init__(self, reg: ModuleRegistry, modules: list[str] | None = None, order: Callable | None = None):
        self.reg = reg
        self.modules = sorted(modules if modules is not None else reg.module_names())
        self.order = order or default_order
        self.compiler = _Compiler(reg, self.modules)
        self.sizes = [len(reg.versions(m)) for m in self.modules]

    def _run(self, formula: _Formula, extra: Iterable = ()) -> _State | None:
        state = _State(len(self.modules))
        if not state.assert_all(formula.lits) or not state.assert_all(extra):
            return None
        if not _search(state, formula.ors):
            return None
        return state

    def satisfiable(self, c) -> bool:
        f = _Formula()
        self.compiler.compile(c, f)
        return self._run(f) is not None

    def solve(self, c, variables: Iterable[str] = ()) -> Assignment | Unsat:
        formula = _Formula()
        self.compiler.compile(c, formula)
        state = self._run(formula)
        if state is None:
            return Unsat(self.unsat_core(c))
        names = sorted(set(constraint_vars(c)) | set(variables), key=self.order)
        fixes: list = []
        for x in names:
            for m in range(len(self.modules)):
                newest = self.sizes[m] - 1
                cur = state.value(x, m)
                if cur is None:
                    cur = newest
                chosen = cur
                for v in range(newest, cur, -1):
                    trial = self._run(formula, fixes + [("fix", x, m, v)])
                    if trial is not None:
                        chosen, state = v, trial
                        break
                fixes.append(("fix", x, m, chosen))
                if state.value(x, m) is None:
                    state.fix(x, m, chosen)
        labels = {}
        for x in names:
            labels[x] = VersionLabel(
                tuple(
                    (mod, self.reg.versions(mod)[state.value(x, i)])
                    for i, mod in enumerate(self.modules)
                )
            )
        return Assignment(labels)

    def unsat_core(self, c) -> list:
        items = list(c.items) if isinstance(c, And) else [c]
        core = list(items)
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + 1 :]
            if not self.satisfiable(And(tuple(trial)) if trial else Top()):
                core = trial
            else:
                i += 1
        return core


def solve(c, reg: ModuleRegistry, *, modules: list[str] | None = None, order: Callable | None = None,
          variables: Iterable[str] = ()) -> Assignment | Unsat:
    return Solver(reg, modules, order).solve(c, variables)


def assignment_key(a: Assignment, reg: ModuleRegistry, order: Callable | None = None):
    order = order or default_order
    key = []
    for x in sorted(a.labels, key=order):
        l = a.labels[x]
        key.append(tuple(reg.index(m, v) for m, v in l.assignment))
    return tuple(key)


def prefer_newest(candidates: Iterable[Assignment], reg: ModuleRegistry, order: Callable | None = None) -> Assignment:
    cands = list(candidates)
    if not cands:
        raise ValueError("prefer_newest needs at least one candidate")
    return max(cands, key=lambda a: assignment_key(a, reg, order))


# -- direct semantics (used by tests and diagnostics) ---------------------------


def holds(c, a: Assignment | dict) -> bool:
    labels = a.labels if isinstance(a, Assignment) else a

    def res_of(r):
        if isinstance(r, RVar):
            return Labels(frozenset([labels[r.name]]))
        return r

    if isinstance(c, Top):
        return True
    if isinstance(c, And):
        return all(holds(x, labels) for x in c.items)
    if isinstance(c, Or):
        return any(holds(x, labels) for x in c.items)
    if isinstance(c, LabelDep):
        r = res_of(c.var)
        if isinstance(r, Bottom):
            return True
        return all(all(l.get(m) == v for m, v in c.dep) for l in r.labels)
    if isinstance(c, VarDep):
        left, right = res_of(c.left), res_of(c.right)
        if isinstance(c.left, RVar) and isinstance(c.right, RVar):
            return left == right
        if isinstance(left, Bottom):
            return True
        if isinstance(right, Bottom):
            return False
        if isinstance(c.left, RVar) and not right.labels:
            return True
        if isinstance(c.right, RVar) and not left.labels:
            return True
        if isinstance(c.left, RVar):
            return next(iter(left.labels)) in right.labels
        if isinstance(c.right, RVar):
            return next(iter(right.labels)) in left.labels if len(left.labels) > 1 else left == right
        return left.labels <= right.labels
    raise SolverError(f"not a constraint: {c!r}")


# -- rendering ---------------------------------------------------------------


def render_core(core: list) -> list[str]:
    lines = []
    for c in core:
        if isinstance(c, Or) and c.origin:
            options = []
            for d in c.items:
                for lit in (d.items if isinstance(d, And) else (d,)):
                    if isinstance(lit, LabelDep):
                        options.append(partial_label_str(lit.dep))
                        break
            lines.append(f"{c.origin} requires {' or '.join(options)}")
        else:
            lines.append(str(c))
    return lines


# -- SMT-LIB2 export ---------------------------------------------------------

_GREEK = {"α": "alpha", "β": "beta", "γ": "gamma", "δ": "delta"}


def smt_name(var: str, module: str) -> str:
    base = "".join(_GREEK.get(ch, ch) for ch in var)
    base = re.sub(r"[^A-Za-z0-9_]", "_", base)
    return f"{base}_{re.sub(r'[^A-Za-z0-9_]', '_', module)}"


def export_smt2(c, reg: ModuleRegistry, modules: list[str] | None = None) -> str:
    modules = sorted(modules if modules is not None else reg.module_names())
    variables = sorted(constraint_vars(c), key=default_order)
    out = ["(set-logic QF_LIA)"]
    for m in modules:
        out.append(f"; {m}: " + ", ".join(f"{i}={v}" for i, v in enumerate(reg.versions(m))))
    for x in variables:
        for m in modules:
            name = smt_name(x, m)
            out.append(f"(declare-const {name} Int)")
            out.append(f"(assert (and (>= {name} 0) (< {name} {len(reg.versions(m))})))")

    def vec_eq(x: str, l: VersionLabel) -> str:
        parts = [f"(= {smt_name(x, m)} {reg.index(m, v)})" for m, v in l.assignment]
        return _and(parts)

    def enc(c) -> str:
        if isinstance(c, Top):
            return "true"
        if isinstance(c, And):
            return _and([enc(x) for x in c.items])
        if isinstance(c, Or):
            return "(or " + " ".join(enc(x) for x in c.items) + ")" if len(c.items) > 1 else enc(c.items[0])
        if isinstance(c, LabelDep):
            if not isinstance(c.var, RVar):
                return "true" if _ground_holds(c) else "false"
            for m, v in c.dep:
                if m not in reg or v not in reg.versions(m):
                    raise UnknownModule(f"unknown module version {m}={v}")
            return _and([f"(= {smt_name(c.var.name, m)} {reg.index(m, v)})" for m, v in c.dep])
        if isinstance(c, VarDep):
            if isinstance(c.left, RVar) and isinstance(c.right, RVar):
                return _and([f"(= {smt_name(c.left.name, m)} {smt_name(c.right.name, m)})" for m in modules])
            if isinstance(c.left, RVar) or isinstance(c.right, RVar):
                var, other = (c.left, c.right) if isinstance(c.left, RVar) else (c.right, c.left)
                if isinstance(other, Bottom):
                    return "false" if var is c.left else "true"
                if not other.labels:
                    return "true"
                opts = [vec_eq(var.name, l) for l in sorted(other.labels)]
                return opts[0] if len(opts) == 1 else "(or " + " ".join(opts) + ")"
            return "true" if _ground_holds(c) else "false"
        raise SolverError(f"not a constraint: {c!r}")

    out.append(f"(assert {enc(c)})")
    out.append("(check-sat)")
    out.append("(get-model)")
    return "\n".join(out) + "\n"


def _and(parts: list[str]) -> str:
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"

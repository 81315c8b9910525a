"""Shared generators and reference oracles for the test-suite."""
from __future__ import annotations

import itertools
import random
from pathlib import Path

from vlc import lambdavl as L
from vlc import surface as S
from vlc.solver import Assignment, default_order
from vlc.version_algebra import Labels, ModuleRegistry, RVar, VersionLabel, label_universe
from vlc.vlmini import (
    INT,
    And,
    LabelDep,
    MApp,
    MInt,
    MLam,
    MPromote,
    MVar,
    MVerOf,
    Or,
    PatBox,
    PatVar,
    TArrow,
    TBox,
    TCon,
    Top,
    TVar,
    VarDep,
    apply_subst,
)

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_roots(*names: str) -> list[Path]:
    return [FIXTURES / n for n in names]


# -- brute-force constraint semantics ------------------------------------------


def bf_holds(c, env: dict[str, VersionLabel]) -> bool:
    """Direct reading: every variable denotes one full label."""
    if isinstance(c, Top):
        return True
    if isinstance(c, And):
        return all(bf_holds(x, env) for x in c.items)
    if isinstance(c, Or):
        return any(bf_holds(x, env) for x in c.items)
    if isinstance(c, VarDep):
        return env[c.left.name] == env[c.right.name]
    if isinstance(c, LabelDep):
        lab = env[c.var.name]
        return all(lab.get(m) == v for m, v in c.dep)
    raise TypeError(c)


def bf_vars(c) -> set[str]:
    if isinstance(c, (And, Or)):
        out: set[str] = set()
        for x in c.items:
            out |= bf_vars(x)
        return out
    if isinstance(c, VarDep):
        return {c.left.name, c.right.name}
    if isinstance(c, LabelDep):
        return {c.var.name}
    return set()


def bf_key(reg: ModuleRegistry, names: list[str], env: dict[str, VersionLabel]):
    mods = sorted(reg.module_names())
    return tuple(tuple(reg.index(m, env[x][m]) for m in mods) for x in names)


def brute_force(c, reg: ModuleRegistry):
    """(satisfiable, best assignment under newest preference or None)."""
    names = sorted(bf_vars(c), key=default_order)
    universe = label_universe(reg) if reg.module_names() else [VersionLabel(())]
    best, best_key = None, None
    for combo in itertools.product(universe, repeat=len(names)):
        env = dict(zip(names, combo))
        if bf_holds(c, env):
            k = bf_key(reg, names, env)
            if best_key is None or k > best_key:
                best, best_key = env, k
    return best is not None, best


def random_registry(rng: random.Random, max_mods: int = 3, max_vers: int = 3) -> ModuleRegistry:
    mods = rng.randint(1, max_mods)
    names = ["A", "B", "C"][:mods]
    return ModuleRegistry({n: [f"{i}.0.0" for i in range(1, rng.randint(1, max_vers) + 1)] for n in names})


def random_constraint(rng: random.Random, reg: ModuleRegistry, nvars: int = 3, max_nodes: int = 20):
    names = [f"α{i}" for i in range(1, nvars + 1)]
    budget = [max_nodes]

    def atom():
        budget[0] -= 1
        kind = rng.random()
        if kind < 0.45:
            return VarDep(RVar(rng.choice(names)), RVar(rng.choice(names)))
        if kind < 0.97:
            mods = rng.sample(reg.module_names(), rng.randint(1, len(reg.module_names())))
            dep = tuple(sorted((m, rng.choice(reg.versions(m))) for m in mods))
            return LabelDep(RVar(rng.choice(names)), dep)
        return Top()

    def node(depth: int):
        if depth == 0 or budget[0] <= 3 or rng.random() < 0.35:
            return atom()
        budget[0] -= 1
        k = rng.randint(2, 3)
        items = tuple(node(depth - 1) for _ in range(k))
        return And(items) if rng.random() < 0.55 else Or(items)

    while True:
        budget[0] = max_nodes
        c = node(4)
        if node_count(c) <= max_nodes:
            return c


def node_count(c) -> int:
    if isinstance(c, (And, Or)):
        return 1 + sum(node_count(x) for x in c.items)
    return 1


# -- surface terms for round-trip properties -------------------------------------


def random_surface(rng: random.Random, depth: int, scope: tuple[str, ...] = ()) -> S.Term:
    leaves = [lambda: S.IntLit(rng.randint(0, 9))]
    if scope:
        leaves.append(lambda: S.Var(rng.choice(scope)))
    if depth <= 0:
        return rng.choice(leaves)()
    name = f"v{len(scope)}"
    choice = rng.randrange(8)
    if choice == 0:
        return S.Lam(name, random_surface(rng, depth - 1, scope + (name,)))
    if choice == 1:
        return S.App(random_surface(rng, depth - 1, scope), random_surface(rng, depth - 1, scope))
    if choice == 2:
        return S.Let(name, random_surface(rng, depth - 1, scope), random_surface(rng, depth - 1, scope + (name,)))
    if choice == 3:
        return S.Pair(random_surface(rng, depth - 1, scope), random_surface(rng, depth - 1, scope))
    if choice == 4:
        return S.ListLit(tuple(random_surface(rng, depth - 1, scope) for _ in range(rng.randint(0, 2))))
    if choice == 5:
        pat = S.PPair(S.PVar(name), S.PVar(name + "b"))
        return S.Case(
            random_surface(rng, depth - 1, scope),
            (S.Branch(pat, random_surface(rng, depth - 1, scope + (name, name + "b"))),
             S.Branch(S.PInt(0), random_surface(rng, depth - 1, scope))),
        )
    if choice == 6:
        return S.VerOf((("A", "1.0.0"),), random_surface(rng, depth - 1, scope))
    return rng.choice(leaves)()


# -- VLMini corpus for the soundness oracle ---------------------------------------

SOUND_REG = ModuleRegistry({"A": ["1.0.0", "2.0.0"], "B": ["1.0.0", "2.0.0"]})
_PARTIALS = [(("A", "1.0.0"),), (("A", "2.0.0"),), (("B", "1.0.0"),), (("A", "1.0.0"), ("B", "2.0.0"))]


def random_vlmini(rng: random.Random, depth: int, scope: tuple[str, ...] = ()):
    if depth <= 0 or rng.random() < 0.15:
        if scope and rng.random() < 0.7:
            return MVar(rng.choice(scope))
        return MInt(rng.randint(0, 3))
    choice = rng.randrange(5)
    if choice == 0:
        x = f"x{len(scope)}"
        return MLam(PatBox(PatVar(x)), random_vlmini(rng, depth - 1, scope + (x,)))
    if choice == 1:
        arg = random_vlmini(rng, depth - 1, scope)
        if rng.random() < 0.7:
            arg = MPromote(arg)
        return MApp(random_vlmini(rng, depth - 1, scope), arg)
    if choice == 2:
        return MPromote(random_vlmini(rng, depth - 1, scope))
    if choice == 3:
        return MVerOf(rng.choice(_PARTIALS), random_vlmini(rng, depth - 1, scope))
    return random_vlmini(rng, depth - 1, scope)


def vlmini_depth(t) -> int:
    from vlc.vlmini import term_children

    kids = term_children(t)
    return 1 + max((vlmini_depth(k) for k in kids), default=-1)


def vlmini_corpus(n: int, seed: int = 7, max_depth: int = 4) -> list:
    rng = random.Random(seed)
    seen, out = set(), []
    while len(out) < n:
        t = random_vlmini(rng, max_depth)
        if vlmini_depth(t) <= max_depth and t not in seen:
            seen.add(t)
            out.append(t)
    return out


def to_lambdavl(t) -> L.LTerm:
    """VLMini without records into λVL; ver-of annotations carry no runtime content."""
    if isinstance(t, MInt):
        return L.LInt(t.value)
    if isinstance(t, MVar):
        return L.LVar(t.name)
    if isinstance(t, MApp):
        return L.LApp(to_lambdavl(t.fn), to_lambdavl(t.arg))
    if isinstance(t, MLam):
        p = t.pattern
        if isinstance(p, PatBox):
            return L.LLam(L.LPBox(p.inner.name), to_lambdavl(t.body))
        return L.LLam(L.LPVar(p.name), to_lambdavl(t.body))
    if isinstance(t, MPromote):
        return L.LPromote(to_lambdavl(t.body))
    if isinstance(t, MVerOf):
        return to_lambdavl(t.body)
    raise TypeError(t)


def ground_type(a, eta: Assignment):
    """ηA with leftover type variables read as Int."""
    if isinstance(a, TVar):
        return INT
    if isinstance(a, TArrow):
        return TArrow(ground_type(a.arg, eta), ground_type(a.res, eta))
    if isinstance(a, TBox):
        r = a.res
        if isinstance(r, RVar):
            r = Labels(frozenset([eta[r.name]]))
        return TBox(r, ground_type(a.body, eta))
    if isinstance(a, TCon):
        return TCon(a.name, tuple(ground_type(x, eta) for x in a.args))
    return a


# -- λVL corpus for preservation/progress -------------------------------------------

L1 = VersionLabel.of([("A", "1.0.0")])
L2 = VersionLabel.of([("A", "2.0.0")])
LABELS = [L1, L2]


def random_lterm(rng: random.Random, depth: int, scope: tuple[str, ...] = ()) -> L.LTerm:
    if depth <= 0 or rng.random() < 0.12:
        if scope and rng.random() < 0.7:
            return L.LVar(rng.choice(scope))
        return L.LInt(rng.randint(0, 3))
    x = f"x{len(scope)}"
    choice = rng.randrange(9)
    if choice == 0:
        pat = L.LPBox(x) if rng.random() < 0.6 else L.LPVar(x)
        return L.LLam(pat, random_lterm(rng, depth - 1, scope + (x,)))
    if choice == 1:
        return L.LApp(random_lterm(rng, depth - 1, scope), random_lterm(rng, depth - 1, scope))
    if choice == 2:
        return L.LCLet(x, random_lterm(rng, depth - 1, scope), random_lterm(rng, depth - 1, scope + (x,)))
    if choice == 3:
        return L.LPromote(random_lterm(rng, depth - 1, scope))
    if choice in (4, 5):
        keys = rng.sample(LABELS, rng.randint(1, 2))
        entries = tuple((k, random_lterm(rng, depth - 1, scope)) for k in keys)
        if choice == 5:
            return L.LRecordAt(entries, rng.choice(keys))
        return L.LRecord(entries)
    if choice in (6, 7):
        inner = L.LPromote(random_lterm(rng, depth - 2, scope)) if rng.random() < 0.5 else L.LRecord(
            tuple((k, random_lterm(rng, depth - 2, scope)) for k in rng.sample(LABELS, rng.randint(1, 2)))
        )
        return L.LExtract(inner, rng.choice(LABELS))
    return random_lterm(rng, depth - 1, scope)


def lterm_depth(t) -> int:
    return 1 + max((lterm_depth(k) for k in L.children(t)), default=-1)


def lambdavl_corpus(n_typed: int, seed: int = 11, max_depth: int = 4, max_tries: int = 200_000):
    """Distinct closed well-typed terms paired with their synthesized types."""
    rng = random.Random(seed)
    seen, out = set(), []
    tries = 0
    while len(out) < n_typed and tries < max_tries:
        tries += 1
        t = random_lterm(rng, max_depth)
        if t in seen or lterm_depth(t) > max_depth:
            continue
        seen.add(t)
        ty = L.synth_declarative(t)
        if ty is not None:
            out.append((t, ty))
    return out


def theta_apply(s, x):
    return apply_subst(s, x)


def write_repo(root: Path, modules: dict[tuple[str, str], str]) -> Path:
    """Lay out ``{(name, version): source}`` as ``root/name/version/name.vl``."""
    for (name, version), src in modules.items():
        d = root / name / version
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{name}.vl").write_text(src, encoding="utf-8")
    return root

import itertools
import random
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from support import bf_holds, bf_vars, brute_force, random_constraint, random_registry
from vlc.solver import (
    Assignment,
    Solver,
    UnknownModule,
    Unsat,
    assignment_key,
    export_smt2,
    holds,
    prefer_newest,
    render_core,
    smt_name,
    solve,
)
from vlc.version_algebra import ModuleRegistry, RVar, VersionLabel, label_universe
from vlc.vlmini import TOP, And, LabelDep, Or, VarDep

REG = ModuleRegistry({"A": ["1.0.0", "2.0.0"], "B": ["1.0.0", "2.0.0"]})
a, b = RVar("α1"), RVar("α2")


def lab(**kw):
    return VersionLabel.of({k: v for k, v in kw.items()})


def test_label_dependency_picks_newest_elsewhere():
    sol = solve(LabelDep(a, (("A", "1.0.0"),)), REG)
    assert sol["α1"] == lab(A="1.0.0", B="2.0.0")


def test_top_gives_newest_label():
    sol = solve(TOP, REG, variables=["α1"])
    assert sol["α1"] == lab(A="2.0.0", B="2.0.0")


def test_contradiction_is_unsat_with_core():
    c = And((LabelDep(a, (("A", "1.0.0"),)), VarDep(a, b), LabelDep(a, (("A", "2.0.0"),))))
    out = solve(c, REG)
    assert isinstance(out, Unsat) and not out
    assert set(out.core) == {LabelDep(a, (("A", "1.0.0"),)), LabelDep(a, (("A", "2.0.0"),))}


def test_core_is_minimal():
    rng = random.Random(5)
    checked = 0
    while checked < 40:
        reg = random_registry(rng)
        c = random_constraint(rng, reg)
        out = Solver(reg).solve(c)
        if not isinstance(out, Unsat):
            continue
        checked += 1
        solver = Solver(reg)
        assert not solver.satisfiable(And(tuple(out.core))) if len(out.core) > 1 else not solver.satisfiable(out.core[0])
        for i in range(len(out.core)):
            rest = out.core[:i] + out.core[i + 1:]
            if rest:
                assert solver.satisfiable(And(tuple(rest)))


def test_variable_dependency_is_full_equality():
    c = And((VarDep(a, b), LabelDep(b, (("B", "1.0.0"),))))
    sol = solve(c, REG)
    assert sol["α1"] == sol["α2"] == lab(A="2.0.0", B="1.0.0")


def test_unknown_module():
    with pytest.raises(UnknownModule):
        solve(LabelDep(a, (("Nope", "1.0.0"),)), REG)
    with pytest.raises(UnknownModule):
        solve(LabelDep(a, (("A", "9.0.0"),)), REG)


def test_variable_order_decides_ties():
    # α1 and α2 cannot both be newest; the earlier variable wins
    c = Or((And((LabelDep(a, (("A", "2.0.0"),)), LabelDep(b, (("A", "1.0.0"),)))),
            And((LabelDep(a, (("A", "1.0.0"),)), LabelDep(b, (("A", "2.0.0"),))))))
    assert solve(c, REG)["α1"]["A"] == "2.0.0"
    flipped = solve(c, REG, order=lambda v: -int(v[-1]))
    assert flipped["α2"]["A"] == "2.0.0"


# -- prefer_newest ------------------------------------------------------------------------


def test_prefer_newest_examples():
    reg = ModuleRegistry({"A": ["1.0.0", "2.0.0"]})
    old, new = Assignment({"α": lab(A="1.0.0")}), Assignment({"α": lab(A="2.0.0")})
    assert prefer_newest([old, new], reg) == new
    assert prefer_newest([old], reg) == old
    tie = [Assignment({"α1": lab(A="2.0.0"), "α2": lab(A="1.0.0")}),
           Assignment({"α1": lab(A="2.0.0"), "α2": lab(A="2.0.0")})]
    assert prefer_newest(tie, reg) == tie[1]
    with pytest.raises(ValueError):
        prefer_newest([], reg)


@given(st.permutations(list(itertools.product(label_universe(REG), repeat=2))))
def test_prefer_newest_is_order_independent(pairs):
    cands = [Assignment({"α1": x, "α2": y}) for x, y in pairs[:6]]
    expect = max(cands, key=lambda s: assignment_key(s, REG))
    assert prefer_newest(cands, REG) == expect
    assert prefer_newest(list(reversed(cands)), REG) == expect


# -- oracle equivalence -------------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1))
def test_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    reg = random_registry(rng)
    c = random_constraint(rng, reg)
    expect_sat, best = brute_force(c, reg)
    out = Solver(reg).solve(c)
    assert expect_sat == (not isinstance(out, Unsat))
    if expect_sat:
        assert holds(c, out)
        assert bf_holds(c, {x: out[x] for x in bf_vars(c)})
        assert {x: out[x] for x in best} == best


def test_deterministic():
    rng = random.Random(9)
    reg = random_registry(rng)
    c = random_constraint(rng, reg)
    first = Solver(reg).solve(c)
    for _ in range(3):
        again = Solver(reg).solve(c)
        assert type(again) is type(first)
        if not isinstance(first, Unsat):
            assert again.labels == first.labels


def test_render_core_names_versions():
    c = Or((And((LabelDep(a, (("Matrix", "0.15.0"),)), VarDep(a, b))),), origin="Matrix.join")
    assert render_core([c]) == ["Matrix.join requires ⟨Matrix = 0.15.0⟩"]


# -- SMT-LIB2 export ----------------------------------------------------------------------------


def test_smt_top():
    text = export_smt2(TOP, REG)
    assert "(assert true)" in text
    assert text.rstrip().endswith("(check-sat)\n(get-model)")


def test_smt_label_dependency():
    text = export_smt2(LabelDep(RVar("alpha"), (("A", "1.0.0"),)), REG)
    assert "(assert (= alpha_A 0))" in text
    assert "(declare-const alpha_A Int)" in text and "(declare-const alpha_B Int)" in text
    assert "(assert (and (>= alpha_A 0) (< alpha_A 2)))" in text


def test_smt_variable_dependency():
    text = export_smt2(VarDep(RVar("α"), RVar("β")), REG)
    assert "(assert (and (= alpha_A beta_A) (= alpha_B beta_B)))" in text


def _sexprs(text: str):
    tokens = re.findall(r"\(|\)|[^\s()]+", re.sub(r";[^\n]*", "", text))
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok != "(":
            return tok
        out = []
        while tokens[pos] != ")":
            out.append(read())
        pos += 1
        return out

    forms = []
    while pos < len(tokens):
        forms.append(read())
    return forms


def _smt_eval(e, env):
    if isinstance(e, str):
        if e == "true":
            return True
        if e == "false":
            return False
        return env[e] if e in env else int(e)
    op, *args = e
    vals = [_smt_eval(x, env) for x in args]
    return {
        "and": lambda: all(vals), "or": lambda: any(vals), "=": lambda: vals[0] == vals[1],
        ">=": lambda: vals[0] >= vals[1], "<": lambda: vals[0] < vals[1],
    }[op]()


@given(st.integers(0, 2**32 - 1))
def test_smt_script_means_the_same_thing(seed):
    """Evaluate the exported assertions under every assignment and compare with the direct semantics."""
    rng = random.Random(seed)
    reg = random_registry(rng, max_mods=2, max_vers=2)
    c = random_constraint(rng, reg, nvars=2, max_nodes=8)
    forms = _sexprs(export_smt2(c, reg))
    assert forms[-2:] == [["check-sat"], ["get-model"]]
    asserts = [f[1] for f in forms if f[0] == "assert"]
    names = sorted(bf_vars(c))
    mods = reg.module_names()
    for combo in itertools.product(label_universe(reg), repeat=len(names)):
        env = dict(zip(names, combo))
        ints = {smt_name(x, m): reg.index(m, env[x][m]) for x in names for m in mods}
        assert all(_smt_eval(f, ints) for f in asserts) == bf_holds(c, env)

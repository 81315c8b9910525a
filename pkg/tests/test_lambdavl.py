import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from support import L1, L2, LABELS, lterm_depth, random_lterm
from vlc import lambdavl as L
from vlc.lambdavl import (
    FuelExhausted,
    LApp,
    LCLet,
    LExtract,
    LInt,
    LLam,
    LPBox,
    LPromote,
    LPVar,
    LRecord,
    LRecordAt,
    LVar,
    Stuck,
    check_declarative,
    eval_step,
    evaluate,
    overwrite_default,
    parse_lterm,
    show,
    synth_declarative,
)
from vlc.version_algebra import Labels, VersionLabel
from vlc.vlmini import INT, Graded, Linear, TArrow, TBox, TypeEnv

L3 = VersionLabel.of([("A", "3.0.0")])
EMPTY = TypeEnv()


def box(*labels, body=INT):
    return TBox(Labels(frozenset(labels)), body)


def test_check_examples():
    assert check_declarative(EMPTY, LInt(42), INT)
    assert check_declarative(EMPTY, LPromote(LInt(42)), box(L1))
    rec = LRecord(((L1, LInt(1)), (L2, LInt(2))))
    assert not check_declarative(EMPTY, LExtract(rec, L3), INT)
    assert check_declarative(EMPTY, LExtract(rec, L1), INT)


def test_check_rejects_wrong_shapes():
    assert not check_declarative(EMPTY, LInt(1), box(L1))
    assert not check_declarative(EMPTY, LVar("x"), INT)
    # a record can only claim the labels it defines
    rec = LRecord(((L1, LInt(1)),))
    assert check_declarative(EMPTY, rec, box(L1))
    assert not check_declarative(EMPTY, rec, box(L1, L2))


def test_linear_variable_used_once():
    dup = LLam(LPVar("x"), LApp(LVar("x"), LVar("x")))
    assert synth_declarative(dup) is None
    ident = LLam(LPVar("x"), LVar("x"))
    assert check_declarative(EMPTY, ident, TArrow(INT, INT))


def test_box_pattern_allows_reuse_at_unit_grade():
    t = LLam(LPBox("x"), LApp(LLam(LPBox("y"), LVar("x")), LPromote(LVar("x"))))
    ty = synth_declarative(t)
    assert ty is not None and isinstance(ty, TArrow) and isinstance(ty.arg, TBox)


def test_graded_environment():
    env = TypeEnv((Graded("x", INT, Labels(frozenset([L1]))),))
    assert check_declarative(env, LPromote(LVar("x")), box(L1))
    lin = TypeEnv((Linear("x", INT),))
    assert check_declarative(lin, LVar("x"), INT)


def test_diagnosis_points_at_failure():
    d = L.diagnose_declarative(EMPTY, LExtract(LRecord(((L1, LInt(1)),)), L3), INT)
    assert not d.ok and d.reason


def test_check_pattern():
    r = Labels(frozenset([L1]))
    assert L.check_pattern(None, LPVar("x"), INT) == TypeEnv((Linear("x", INT),))
    assert L.check_pattern(r, LPVar("x"), INT) == TypeEnv((Graded("x", INT, r),))
    assert L.check_pattern(None, LPBox("x"), box(L1)) == TypeEnv((Graded("x", INT, r),))
    assert L.check_pattern(None, LPBox("x"), INT) is None
    assert L.check_pattern(r, LPBox("x"), box(L1)) is None


# -- default overwriting --------------------------------------------------------------


def test_overwrite_examples():
    a, b = LInt(1), LInt(2)
    assert overwrite_default(LPromote(LVar("t")), L1) == LPromote(LVar("t"))
    at = LRecordAt(((L1, a), (L2, b)), L1)
    assert overwrite_default(at, L2) == LRecordAt(((L1, a), (L2, b)), L2)
    assert overwrite_default(at, L3) == at
    lam = LLam(LPVar("x"), at)
    assert overwrite_default(lam, L2) == LLam(LPVar("x"), LRecordAt(at.entries, L2))
    rec = LRecord(((L1, at),))
    assert overwrite_default(rec, L2) == rec


# -- reduction ------------------------------------------------------------------------


def test_step_examples():
    assert eval_step(LExtract(LPromote(LInt(42)), L1)) == LInt(42)
    assert eval_step(LExtract(LRecord(((L1, LInt(1)), (L2, LInt(2)))), L1)) == LInt(1)
    assert evaluate(LCLet("x", LPromote(LInt(5)), LVar("x"))).term == LInt(5)
    assert eval_step(LRecordAt(((L1, LInt(1)), (L2, LInt(2))), L1)) == LInt(1)


def test_abstraction_rules():
    assert eval_step(LApp(LLam(LPVar("x"), LVar("x")), LInt(3))) == LInt(3)
    t = LApp(LLam(LPBox("x"), LVar("x")), LPromote(LInt(3)))
    assert eval_step(t) == LCLet("x", LPromote(LInt(3)), LVar("x"))


def test_clet_on_record_chooses_newest_by_default():
    rec = LRecord(((L1, LInt(1)), (L2, LInt(2))))
    t = LCLet("x", rec, LVar("x"))
    assert eval_step(t) == LRecordAt(rec.entries, L2)
    assert evaluate(t).term == LInt(2)
    assert evaluate(t, choose=lambda ls: L1).term == LInt(1)


def test_extraction_retargets_inner_defaults():
    inner = LRecordAt(((L1, LInt(1)), (L2, LInt(2))), L2)
    t = LExtract(LPromote(inner), L1)
    assert evaluate(t).term == LInt(1)


def test_values_take_no_steps():
    for v in (LInt(0), LLam(LPVar("x"), LVar("x")), LPromote(LVar("y")), LRecord(((L1, LInt(1)),))):
        res = evaluate(v)
        assert res.term == v and res.steps == 0 and res.status == "value"
        assert eval_step(v) is Stuck


def test_stuck_terms():
    assert eval_step(LApp(LInt(1), LInt(2))) is Stuck
    assert eval_step(LExtract(LRecord(((L1, LInt(1)),)), L3)) is Stuck
    assert eval_step(LVar("x")) is Stuck
    assert evaluate(LApp(LInt(1), LInt(2))).status == "stuck"


def test_fuel():
    omega = parse_lterm(r"(\[x]. let [y] = [x] in y) [(\x. x) 1]")
    assert evaluate(omega, fuel=100).status == "value"
    with pytest.raises(FuelExhausted):
        evaluate(omega, fuel=1)
    with pytest.raises(ValueError):
        evaluate(LInt(1), fuel=0)


def test_trace_records_every_term():
    res = evaluate(parse_lterm("let [x] = [5] in x"), trace=True)
    assert [show(t) for t in res.trace] == ["let [x] = [5] in x", "5"]


def test_substitution_avoids_capture():
    t = LLam(LPVar("y"), LVar("x"))
    out = L.substitute(t, "x", LVar("y"))
    assert isinstance(out, LLam) and out.pattern.name != "y"
    assert out.body == LVar("y")


# -- ASCII syntax --------------------------------------------------------------------


def test_parse_examples():
    assert parse_lterm("[42].{A=1.0.0}") == LExtract(LPromote(LInt(42)), L1)
    assert parse_lterm("<{A=1.0.0}=1, {A=2.0.0}=2 | {A=1.0.0}>") == LRecordAt(((L1, LInt(1)), (L2, LInt(2))), L1)
    assert parse_lterm(r"\[x]. x") == LLam(LPBox("x"), LVar("x"))
    assert parse_lterm("f a b") == LApp(LApp(LVar("f"), LVar("a")), LVar("b"))


@pytest.mark.parametrize("src", ["", "(1", "[1", "<{A=1.0.0}=1", "1 $", "let x = 1 in x", "<{A=x}=1>"])
def test_parse_errors(src):
    with pytest.raises(L.LParseError):
        parse_lterm(src)


@given(st.integers(0, 2**32 - 1))
def test_show_parse_roundtrip(seed):
    t = random_lterm(random.Random(seed), 4)
    assert parse_lterm(show(t)) == t


# -- metatheory on generated terms ---------------------------------------------------------


def _typed(seed: int):
    t = random_lterm(random.Random(seed), 4)
    if lterm_depth(t) > 4:
        return None, None
    return t, synth_declarative(t)


@given(st.integers(0, 2**32 - 1))
def test_preservation_and_progress(seed):
    t, ty = _typed(seed)
    if ty is None:
        return
    assert check_declarative(EMPTY, t, ty)
    for _ in range(30):
        if L.is_value(t):
            return
        nxt = eval_step(t)
        assert nxt is not Stuck, show(t)
        assert check_declarative(EMPTY, nxt, ty), (show(t), show(nxt), ty)
        t = nxt


@given(st.integers(0, 2**32 - 1))
def test_type_safe_extraction(seed):
    rng = random.Random(seed)
    keys = rng.sample(LABELS, rng.randint(1, 2))
    if rng.random() < 0.5:
        u = LPromote(random_lterm(rng, 3))
    else:
        u = LRecord(tuple((k, random_lterm(rng, 3)) for k in keys))
    ty = synth_declarative(u)
    if ty is None:
        return
    assert isinstance(ty, TBox)
    for lk in LABELS:
        if not check_declarative(EMPTY, u, box(lk, body=ty.body)):
            continue
        nxt = eval_step(LExtract(u, lk))
        assert nxt is not Stuck
        assert check_declarative(EMPTY, nxt, ty.body)

import random

from hypothesis import given
from hypothesis import strategies as st

from support import random_surface
from vlc import surface as S
from vlc.girard import forward_translate, normalize_lets, reverse_translate
from vlc.parser import parse_expr
from vlc.vlmini import MApp, MCase, MInt, MLam, MPromote, MUnversion, MVar, MVerOf, PatBox, PatVar, walk_term


def test_lambda():
    assert forward_translate(S.Lam("x", S.Var("x"))) == MLam(PatBox(PatVar("x")), MVar("x"))


def test_application():
    assert forward_translate(S.App(S.Var("f"), S.Var("s"))) == MApp(MVar("f"), MPromote(MVar("s")))


def test_literal():
    assert forward_translate(S.IntLit(42)) == MInt(42)


def test_let_is_promoted_application():
    t = forward_translate(S.Let("x", S.IntLit(1), S.Var("x")))
    assert t == MApp(MLam(PatBox(PatVar("x")), MVar("x")), MPromote(MInt(1)))


def test_ver_of_passes_through():
    t = forward_translate(parse_expr("ver [Hash=1.0.0] of (f x)"))
    assert t == MVerOf((("Hash", "1.0.0"),), MApp(MVar("f"), MPromote(MVar("x"))))


def test_unversion_operand_is_versioned():
    t = forward_translate(parse_expr("unversion (g 1)"))
    unv = [n for n in walk_term(t) if isinstance(n, MUnversion)]
    assert len(unv) == 1 and isinstance(unv[0].body, MPromote)


def test_reverse_examples():
    assert reverse_translate(MLam(PatBox(PatVar("x")), MVar("x"))) == S.Lam("x", S.Var("x"))
    assert reverse_translate(MApp(MVar("f"), MPromote(MVar("s")))) == S.App(S.Var("f"), S.Var("s"))
    t2, t1 = MVar("y"), MInt(1)
    back = normalize_lets(reverse_translate(MApp(MLam(PatBox(PatVar("x")), t2), MPromote(t1))))
    assert back == S.Let("x", S.IntLit(1), S.Var("y"))


def test_erasing_version_terms():
    t = forward_translate(parse_expr("ver [A=1.0.0] of (unversion x)"))
    kept = reverse_translate(t)
    assert any(isinstance(n, S.VerOf) for n in S.walk(kept))
    erased = reverse_translate(t, erase_version_terms=True)
    assert not any(isinstance(n, (S.VerOf, S.Unversion)) for n in S.walk(erased))
    assert erased == S.Var("x")


def test_compound_pattern_binder_becomes_case():
    from vlc.vlmini import PatCon

    t = MLam(PatBox(PatCon("pair", (PatVar("a"), PatVar("b")))), MVar("a"))
    back = reverse_translate(t)
    assert isinstance(back, S.Lam) and isinstance(back.body, S.Case)
    assert back.body.scrutinee == S.Var(back.param)
    assert back.body.branches == (S.Branch(S.PPair(S.PVar("a"), S.PVar("b")), S.Var("a")),)


def _structurally_girard(t) -> bool:
    for n in walk_term(t):
        if isinstance(n, MApp):
            arg = n.arg.body if isinstance(n.arg, MUnversion) else n.arg
            if not isinstance(arg, MPromote):
                return False
        if isinstance(n, MLam) and not isinstance(n.pattern, PatBox):
            return False
        if isinstance(n, MCase) and not all(isinstance(b.pattern, PatBox) for b in n.branches):
            return False
    return True


@given(st.integers(0, 2**32 - 1))
def test_forward_output_shape(seed):
    t = random_surface(random.Random(seed), 4)
    assert _structurally_girard(forward_translate(t))


@given(st.integers(0, 2**32 - 1))
def test_reverse_after_forward(seed):
    t = random_surface(random.Random(seed), 4)
    assert normalize_lets(reverse_translate(forward_translate(t))) == normalize_lets(t)

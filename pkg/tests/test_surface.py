import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from support import FIXTURES, random_surface
from vlc import surface as S
from vlc.loader import ImportCycle, LoadError, MissingModuleVersion, load_repository, repository_from_sources
from vlc.parser import (
    DuplicateDefinition,
    ParseError,
    RecursiveDefinition,
    parse_expr,
    parse_module,
    pretty_module,
    pretty_term,
)
from vlc.version_algebra import ModuleRegistry


def test_identity_module():
    m = parse_module("module M where\nid x = x")
    assert m.name == "M" and m.imports == ()
    assert m.defs == (("id", S.Lam("x", S.Var("x"))),)


def test_app_module_has_ver_of():
    m = parse_module((FIXTURES / "hash/pinned/App/1.0.0/App.vl").read_text())
    assert m.imports == ("Dir", "Hash")
    vers = [t for t in S.walk(m.definition("main")) if isinstance(t, S.VerOf)]
    assert len(vers) == 1
    assert vers[0].label == (("Hash", "1.0.0"),)
    assert vers[0].body == S.App(S.Var("exists"), S.Var("digest"))


def test_unversion():
    m = parse_module("module M where\nf = unversion (g 1)")
    assert m.definition("f") == S.Unversion(S.App(S.Var("g"), S.IntLit(1)))


def test_if_desugars_to_case():
    # zero is false, anything else is true
    assert parse_expr("if c then 1 else 2") == S.Case(
        S.Var("c"),
        (S.Branch(S.PInt(0), S.IntLit(2)), S.Branch(S.PVar(S.WILDCARD), S.IntLit(1))),
    )


def test_operators_are_applications():
    assert parse_expr("1 + 2") == S.App(S.App(S.Var("+"), S.IntLit(1)), S.IntLit(2))


def test_multi_arg_definition_curries():
    m = parse_module("module M where\nk x y = x")
    assert m.definition("k") == S.Lam("x", S.Lam("y", S.Var("x")))


def test_syntax_error_has_span_and_expected():
    with pytest.raises(ParseError) as info:
        parse_module("module M where\nf = (1 +")
    assert info.value.span is not None


def test_duplicate_definition():
    with pytest.raises(DuplicateDefinition):
        parse_module("module M where\nf = 1\nf = 2")


@pytest.mark.parametrize("src", ["module M where\nf x = f x", "module M where\nf = g\ng = f"])
def test_recursion_rejected(src):
    with pytest.raises(RecursiveDefinition):
        parse_module(src)


def test_spans_lie_inside_source():
    src = (FIXTURES / "hash/app/App/1.0.0/App.vl").read_text()
    m = parse_module(src)
    for _, body in m.defs:
        for node in S.walk(body):
            assert node.span is not None
            assert 0 <= node.span.start <= node.span.end <= len(src)


@pytest.mark.parametrize("path", sorted(FIXTURES.rglob("*.vl")), ids=lambda p: str(p.relative_to(FIXTURES)))
def test_fixture_round_trip(path):
    m1 = parse_module(path.read_text())
    m2 = parse_module(pretty_module(m1))
    assert m2 == m1
    assert parse_module(pretty_module(m2)) == m2


@given(st.integers(0, 2**32 - 1))
def test_pretty_parse_fixpoint(seed):
    t = random_surface(random.Random(seed), 4)
    once = parse_expr(pretty_term(t))
    assert once == t
    assert parse_expr(pretty_term(once)) == once


# -- loading -------------------------------------------------------------------


def test_single_module_repository(tmp_path):
    d = tmp_path / "List" / "1.0.0"
    d.mkdir(parents=True)
    (d / "List.vl").write_text("module List where\nid x = x\n")
    repo = load_repository(tmp_path, ModuleRegistry({"List": ["1.0.0"]}))
    assert list(repo.modules) == [("List", "1.0.0")]


def test_matrix_layout_order():
    repo = load_repository([FIXTURES / "matrix/lib", FIXTURES / "matrix/good"])
    assert len(repo.modules) == 4
    assert repo.order == ["List", "Matrix", "Main"]
    assert repo.registry.versions("Matrix") == ["0.15.0", "0.16.0"]


def test_import_cycle():
    with pytest.raises(ImportCycle):
        repository_from_sources({
            ("A", "1.0.0"): "module A where\nimport B\na = 1\n",
            ("B", "1.0.0"): "module B where\nimport A\nb = 1\n",
        })


def test_missing_version(tmp_path):
    with pytest.raises(MissingModuleVersion):
        load_repository(FIXTURES / "trivial", ModuleRegistry({"Main": ["1.0.0", "2.0.0"]}))


def test_unknown_import():
    with pytest.raises(MissingModuleVersion):
        repository_from_sources({("A", "1.0.0"): "module A where\nimport Nope\na = 1\n"})


def test_module_name_must_match_directory(tmp_path):
    d = tmp_path / "A" / "1.0.0"
    d.mkdir(parents=True)
    (d / "A.vl").write_text("module B where\nb = 1\n")
    with pytest.raises(LoadError):
        load_repository(tmp_path)


def test_syntax_error_reports_path(tmp_path):
    d = tmp_path / "A" / "1.0.0"
    d.mkdir(parents=True)
    (d / "A.vl").write_text("module A where\na = (\n")
    with pytest.raises(ParseError) as info:
        load_repository(tmp_path)
    assert "A.vl" in str(info.value)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vlc.version_algebra import (
    BOTTOM,
    UNIT,
    EmptyRegistry,
    Labels,
    ModuleRegistry,
    RVar,
    VariableResource,
    VersionError,
    VersionLabel,
    iter_resources,
    label_universe,
    labels,
    res_add,
    res_leq,
    res_mul,
    version_key,
)

REG = ModuleRegistry({"A": ["1.0.0", "2.0.0"], "B": ["1.0.0", "2.0.0"]})
U = label_universe(REG)
l1, l2, l3 = U[0], U[1], U[2]

resources = st.one_of(
    st.just(BOTTOM),
    st.frozensets(st.sampled_from(U)).map(Labels),
)


def test_add_examples():
    assert res_add(BOTTOM, labels(l1)) == labels(l1)
    assert res_add(labels(l1), labels(l2)) == labels(l1, l2)
    assert res_add(labels(l1, l2), labels(l2)) == labels(l1, l2)


def test_mul_examples():
    assert res_mul(BOTTOM, labels(l1)) == BOTTOM
    assert res_mul(UNIT, labels(l1)) == labels(l1)
    assert res_mul(labels(l1), labels(l2)) == labels(l1, l2)


def test_leq_examples():
    assert res_leq(BOTTOM, labels(l1))
    assert res_leq(labels(l1), labels(l1, l2))
    assert not res_leq(labels(l1, l2), labels(l1))


def test_unit_differs_from_bottom():
    assert UNIT != BOTTOM
    assert res_leq(BOTTOM, UNIT) and not res_leq(UNIT, BOTTOM)


@pytest.mark.parametrize("op", [res_add, res_mul, res_leq])
def test_variables_rejected(op):
    with pytest.raises(VariableResource):
        op(RVar("α1"), labels(l1))


def test_universe_examples():
    reg = ModuleRegistry({"Hash": ["1.0.0", "2.0.0"], "Dir": ["1.0.0"]})
    assert set(label_universe(reg)) == {
        VersionLabel.of({"Hash": "1.0.0", "Dir": "1.0.0"}),
        VersionLabel.of({"Hash": "2.0.0", "Dir": "1.0.0"}),
    }
    assert label_universe(ModuleRegistry({"A": ["1.0.0"]})) == [VersionLabel.of({"A": "1.0.0"})]
    assert len(U) == 4


def test_empty_registry():
    with pytest.raises(EmptyRegistry):
        label_universe(ModuleRegistry({}))


@given(st.dictionaries(st.sampled_from("ABCD"), st.integers(1, 3), min_size=1))
def test_universe_size_is_product(shape):
    reg = ModuleRegistry({m: [f"{i}.0.0" for i in range(1, n + 1)] for m, n in shape.items()})
    expected = 1
    for n in shape.values():
        expected *= n
    universe = label_universe(reg)
    assert len(universe) == expected == len(set(universe))
    assert all(l.modules == tuple(sorted(shape)) for l in universe)


def test_versions_sorted_numerically():
    reg = ModuleRegistry({"M": ["0.16.0", "0.9.1", "0.15.0"]})
    assert reg.versions("M") == ["0.9.1", "0.15.0", "0.16.0"]
    assert reg.newest("M") == "0.16.0"
    assert version_key("10.0.1") > version_key("9.9.9")


@pytest.mark.parametrize("bad", ["", "1.x", "v1", "1..2"])
def test_malformed_versions(bad):
    with pytest.raises(VersionError):
        version_key(bad)


def test_duplicate_version_rejected():
    with pytest.raises(VersionError):
        ModuleRegistry({"M": ["1.0.0", "1.0.0"]})


def test_label_is_canonical():
    assert VersionLabel.of({"B": "1.0.0", "A": "2.0.0"}) == VersionLabel.of([("A", "2.0.0"), ("B", "1.0.0")])
    assert str(VersionLabel.of({"B": "1.0.0", "A": "2.0.0"})) == "{A=2.0.0, B=1.0.0}"


def test_iter_resources_counts():
    rs = list(iter_resources(U[:2]))
    assert rs[0] == BOTTOM and len(rs) == 1 + 4


@given(resources, resources, resources)
def test_semiring_laws(r, s, t):
    assert res_add(res_add(r, s), t) == res_add(r, res_add(s, t))
    assert res_add(r, s) == res_add(s, r)
    assert res_add(BOTTOM, r) == r
    assert res_mul(res_mul(r, s), t) == res_mul(r, res_mul(s, t))
    assert res_mul(UNIT, r) == r == res_mul(r, UNIT)
    assert res_mul(r, res_add(s, t)) == res_add(res_mul(r, s), res_mul(r, t))
    assert res_mul(res_add(s, t), r) == res_add(res_mul(s, r), res_mul(t, r))
    assert res_mul(BOTTOM, r) == BOTTOM


@given(resources, resources, resources)
def test_order_laws(r, s, t):
    assert res_leq(r, r)
    if res_leq(r, s) and res_leq(s, r):
        assert r == s
    if res_leq(r, s) and res_leq(s, t):
        assert res_leq(r, t)
    if res_leq(r, s):
        assert res_leq(res_add(r, t), res_add(s, t))
        assert res_leq(res_mul(r, t), res_mul(s, t))


@given(resources, resources, resources)
def test_add_is_least_upper_bound(r, s, u):
    j = res_add(r, s)
    assert res_leq(r, j) and res_leq(s, j)
    if res_leq(r, u) and res_leq(s, u):
        assert res_leq(j, u)

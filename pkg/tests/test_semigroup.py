import numpy as np
import pytest

from lprecon import convolution as cv
from lprecon import groupoid as gpd
from lprecon import semigroup as isg
from lprecon import structure as st

import oracles


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_symmetric_inverse_monoid(n):
    S = isg.symmetric_inverse_monoid(n)
    assert len(S) == oracles.count_partial_bijections(n)
    assert not isg.verify_inverse_semigroup(S)
    assert len(S.idempotents) == 2 ** n
    assert S.zero is not None


def test_bisection_semigroup_is_inverse(P3):
    S = isg.from_bisections(P3)
    assert len(S) == 34 and not isg.verify_inverse_semigroup(S)


def test_verifier_rejections():
    assert isg.verify_inverse_semigroup(isg.left_zero_semigroup(2))
    bad = isg.InvSemigroup((0, 1), np.array([[0, 0], [1, 0]]))
    assert any("associativity" in v for v in isg.verify_inverse_semigroup(bad))
    S = isg.symmetric_inverse_monoid(2)
    wrong = isg.InvSemigroup(S.elements, S.mul, np.zeros(len(S), dtype=int), S.names)
    assert any("dagger" in v for v in isg.verify_inverse_semigroup(wrong))


def test_json_round_trip():
    S = isg.symmetric_inverse_monoid(2)
    T = isg.from_json(S.to_json())
    assert (T.mul == S.mul).all() and (T.dagger == S.dagger).all()
    with pytest.raises(ValueError):
        isg.from_json({"elements": ["a"], "mul": [[3]]})


def test_filters_on_boolean_lattice():
    # nonzero idempotents of I_3 are the 7 nonempty subsets; every filter is principal
    L = isg.symmetric_inverse_monoid(3).semilattice()
    assert len(isg.all_filters(L)) == 7
    U = isg.ultrafilters(L)
    assert len(U) == 3
    assert isg.tight_filters(L) == U
    assert isg.maximal_filters(L) == isg.minimal_principal_filters(L) == U


def test_cover():
    S = isg.symmetric_inverse_monoid(2)
    L = S.semilattice()
    by_name = {S.names[e]: e for e in S.idempotents}
    top, a, b = by_name["{0>0,1>1}"], by_name["{0>0}"], by_name["{1>1}"]
    assert isg.is_cover(L, top, [a, b])
    assert not isg.is_cover(L, top, [a])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tight_groupoid_of_sym_inverse_is_pair(n):
    T = isg.tight_groupoid(isg.symmetric_inverse_monoid(n))
    assert not gpd.validate(T.groupoid)
    assert gpd.groupoid_isomorphic(T.groupoid, gpd.pair(n)) is not None
    assert not T.zero_adjoined


def test_tight_groupoid_of_group_with_zero():
    S3 = gpd.group_symmetric(3)
    S = isg.group_with_zero(S3.compose)
    T = isg.tight_groupoid(S)
    assert gpd.groupoid_isomorphic(T.groupoid, S3) is not None


def test_tight_groupoid_adjoins_zero_for_group():
    Z3 = gpd.group_cyclic(3)
    S = isg.InvSemigroup(tuple(range(3)), Z3.compose)
    T = isg.tight_groupoid(S)
    assert T.zero_adjoined and T.notes
    assert gpd.groupoid_isomorphic(T.groupoid, Z3) is not None


def test_tight_groupoid_rejects_non_inverse():
    with pytest.raises(isg.NotAnInverseSemigroup):
        isg.tight_groupoid(isg.left_zero_semigroup(2))


def test_germ_relation_transitive(P3):
    S = isg.from_bisections(P3)
    for F in isg.ultrafilters(S.semilattice()):
        assert isg.germ_relation_transitive(S, F)


def test_normalizer_of_indicators(P2):
    ctx = st.AlgebraContext(P2, "fp", 1.5)
    E = st.hermitian_idempotents(P2)
    elems = [cv.indicator(P2, B) for B in gpd.enumerate_bisections(P2)]
    assert all(isg.normalizes(ctx, a, E) for a in elems)
    N = isg.normalizer_semigroup(ctx, elems, E)
    assert len(N) == 7 and not isg.verify_inverse_semigroup(N)


def test_normalizer_excludes_non_normalizing(P2):
    ctx = st.AlgebraContext(P2, "fp", 1.5)
    E = st.hermitian_idempotents(P2)
    a = cv.unit(P2) + cv.delta(P2, P2.arrow("(1,2)"))
    assert not isg.normalizes(ctx, a, E)


def test_normalizer_closure_bound(P2):
    ctx = st.AlgebraContext(P2, "fp", 1.5)
    E = st.hermitian_idempotents(P2)
    # an irrational rotation on a unit generates an infinite cyclic group
    a = cv.on_units(P2, [np.exp(1j), 1.0])
    with pytest.raises(isg.ClosureBoundExceeded):
        isg.normalizer_semigroup(ctx, [a], E, bound=50)

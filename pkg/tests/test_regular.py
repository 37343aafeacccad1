import math

import numpy as np
import pytest

from lprecon import convolution as cv
from lprecon import groupoid as gpd
from lprecon import regular as rg

import oracles

TOL = 1e-6


def rand_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def test_pnorm_dual_exponent():
    assert rg.PNorm(1.5).q == pytest.approx(3.0)
    assert rg.PNorm(3.0).q == pytest.approx(1.5)
    assert rg.PNorm(1).q == math.inf
    assert rg.PNorm(math.inf).q == 1.0
    assert rg.PNorm(2).is_two
    with pytest.raises(ValueError):
        rg.PNorm(0.5)


@pytest.mark.parametrize("p", [1.25, 1.5, 3.0, 4.0])
def test_rank_one_closed_form(rng, p):
    q = rg.PNorm(p).q
    for _ in range(50):
        u, v = rand_matrix(rng, 4, 1)[:, 0], rand_matrix(rng, 4, 1)[:, 0]
        want = np.linalg.norm(u, p) * np.linalg.norm(v, q)
        got = rg.p_op_norm(np.outer(u, v), p).value
        assert got == pytest.approx(want, rel=TOL)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_diagonal_and_permutation(rng, p):
    d = rng.normal(size=5)
    assert rg.p_op_norm(np.diag(d), p).value == pytest.approx(np.abs(d).max(), rel=1e-9)
    P = np.eye(5)[rng.permutation(5)]
    assert rg.p_op_norm(P, p).value == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_duality_and_riesz_thorin(rng, p):
    q = rg.PNorm(p).q
    for _ in range(100):
        M = rand_matrix(rng, 4)
        a = rg.p_op_norm(M, p).value
        assert a == pytest.approx(rg.p_op_norm(M.conj().T, q).value, rel=TOL)
        one, inf = rg.p_op_norm(M, 1).value, rg.p_op_norm(M, math.inf).value
        assert a <= one ** (1 / p) * inf ** (1 - 1 / p) * (1 + 1e-9)


def test_exact_regimes(rng):
    M = rand_matrix(rng, 3)
    assert rg.p_op_norm(M, 1).value == pytest.approx(np.abs(M).sum(axis=0).max())
    assert rg.p_op_norm(M, math.inf).value == pytest.approx(np.abs(M).sum(axis=1).max())
    assert rg.p_op_norm(M, 2).value == pytest.approx(np.linalg.svd(M, compute_uv=False)[0])
    assert rg.p_op_norm(M, 2).exact and not rg.p_op_norm(M, 1.5).exact


def test_iterative_matches_two_norm(rng):
    for _ in range(50):
        M = rand_matrix(rng, 4)
        r = rg.p_op_norm(M, 2, force_iterative=True)
        assert r.value == pytest.approx(np.linalg.norm(M, 2), rel=TOL)


def test_p_near_one_against_column_sums(rng):
    p = 1 + 1e-8
    for _ in range(200):
        M = rand_matrix(rng, 3)
        got = rg.p_op_norm(M, p, force_iterative=True).value
        assert got == pytest.approx(np.abs(M).sum(axis=0).max(), rel=1e-6)


def test_witness_attains_value(rng):
    M = rand_matrix(rng, 4)
    r = rg.p_op_norm(M, 1.5)
    x = r.witness
    assert np.linalg.norm(M @ x, 1.5) / np.linalg.norm(x, 1.5) == pytest.approx(r.value, rel=1e-9)


def test_lambda_on_pair_groupoid_is_matrix(P3, rng):
    # λ_u(f) on G_u ≅ {1,2,3} is the matrix of f
    f = cv.random_element(P3, rng)
    A = oracles.pair_matrix(P3, f, 3)
    for u in P3.units:
        L = rg.lambda_u_matrix(P3, f, u)
        fib = P3.source_fiber(u)
        rows = [int(P3.names[x].strip("()").split(",")[0]) - 1 for x in fib]
        assert np.allclose(L, A[np.ix_(rows, rows)])


def test_lambda_homomorphism(P3, rng):
    for _ in range(20):
        f, h = cv.random_element(P3, rng), cv.random_element(P3, rng)
        assert np.allclose(rg.lambda_matrix(P3, f * h), rg.lambda_matrix(P3, f) @ rg.lambda_matrix(P3, h))
        assert np.allclose(rg.lambda_matrix(P3, f.star()), rg.lambda_matrix(P3, f).conj().T)


def test_block_consistency(rng):
    g = gpd.disjoint_union(gpd.group_cyclic(2), gpd.pair(2))
    f = cv.random_element(g, rng)
    for p in (1, 1.5, 3):
        whole = rg.p_op_norm(rg.lambda_matrix(g, f), p).value
        assert whole == pytest.approx(rg.fp_norm(g, f, p), rel=TOL)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_rho_contractive(P3, p):
    for y in range(P3.n):
        assert rg.p_op_norm(rg.rho_point(P3, y), p).value <= 1 + TOL


def test_rho_commutes_with_lambda(P3, rng):
    f = cv.random_element(P3, rng)
    L = rg.lambda_matrix(P3, f)
    for y in range(P3.n):
        R = rg.rho_point(P3, y)
        assert np.allclose(L @ R, R @ L)


def test_j_inverts_lambda(rng):
    for g in (gpd.pair(3), gpd.group_symmetric(3), gpd.action_groupoid([(0, 1), (1, 0)])):
        f = cv.random_element(g, rng)
        assert rg.j_map(g, rg.lambda_matrix(g, f)).close_to(f, 1e-12)


def test_j_rejects_non_image(P2):
    M = np.zeros((P2.n, P2.n))
    M[0, 0] = 1.0
    with pytest.raises(rg.NotInImage):
        rg.j_map(P2, M)


def test_group_norm_examples(Z2):
    # on Z_2, λ(a δ_e + b δ_g) has eigenvalues a ± b
    f = cv.delta(Z2, 0, 1.0) + cv.delta(Z2, 1, 1.0)
    assert rg.fp_norm(Z2, f, 2) == pytest.approx(2.0)
    f = cv.delta(Z2, 0, 1.0) + cv.delta(Z2, 1, 1j)
    assert rg.fp_norm(Z2, f, 2) == pytest.approx(math.sqrt(2))
    assert rg.fp_norm(Z2, f, 1) == pytest.approx(2.0)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_sym_norm_descriptions_agree(P3, rng, p):
    for _ in range(30):
        f = cv.random_element(P3, rng)
        rg.sym_norm(P3, f, p)  # raises on mismatch


def test_sym_norm_p1_is_i_norm(P3, rng):
    f = cv.random_element(P3, rng)
    assert rg.sym_norm(P3, f, 1) == pytest.approx(cv.i_norm(P3, f), abs=1e-12)


def test_norm_result_regime(P3, rng):
    f = cv.random_element(P3, rng)
    assert rg.fp_norm_result(P3, f, 1).regime == "exact"
    r = rg.fp_norm_result(P3, f, 1.5)
    assert r.regime == "iterative-1e-6" and r.converged

"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""
import itertools
import math
import time

import numpy as np
import pytest

from lprecon import convolution as cv
from lprecon import groupoid as gpd
from lprecon import reconstruction as rc
from lprecon import regular as rg
from lprecon import semigroup as isg
from lprecon import structure as st

import oracles

NORM_TOL = 1e-6
ALG_TOL = 1e-9


def test_c01_reconstruction_round_trip(acceptance):
    t0 = time.perf_counter()
    failures = []
    runs = 0
    for name, g in rc.catalog().items():
        for p, kind in rc.SETTINGS:
            rep = rc.reconstruct(g, p, kind)
            runs += 1
            iso = rep.isomorphism or {}
            explicit = len(iso) == g.n and len(set(iso.values())) == g.n
            if not (rep.ok and explicit):
                failures.append((name, p, kind, rep.failed_stage, rep.error))
    elapsed = time.perf_counter() - t0
    ok = not failures and runs == 63 and elapsed < 60.0
    acceptance("C1 reconstruction round trip", ok, f"{runs} runs, {len(failures)} failures, {elapsed:.1f}s")
    assert not failures, failures
    assert elapsed < 60.0


def test_c02_rigidity_discrimination(acceptance):
    Z4, V = gpd.group_cyclic(4), gpd.group_klein()
    P2 = gpd.pair(2)
    P2r = gpd.relabel(P2, [2, 3, 0, 1], names=["a", "b", "c", "d"])
    verdicts = []
    for p in (1.0, 1.5, 3.0):
        v = rc.rigidity_compare(Z4, V, p)
        verdicts.append(not v.direct and not v.reconstructed and v.verdict == "not isomorphic")
        w = rc.rigidity_compare(P2, P2r, p)
        verdicts.append(w.direct and w.reconstructed and w.verdict == "isomorphic")
    ok = all(verdicts)
    acceptance("C2 rigidity discrimination", ok, f"{sum(verdicts)}/{len(verdicts)} verdicts correct")
    assert ok


def _contraction_samples(g, rng, count):
    """Mixed families of C_c(P2) elements; the caller rescales each to norm ≤ 1."""
    bis = [B for B in gpd.enumerate_bisections(g) if B]
    n = g.n
    families = []
    for k in range(count):
        kind = k % 7
        if kind == 0:
            x = cv.random_element(g, rng)
        elif kind == 1:
            x = cv.random_element(g, rng) * rng.uniform(0.5, 1.0)
        elif kind == 2:
            # unitary matrices: the p = 2 partial isometries
            z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            q, r = np.linalg.qr(z)
            q = q * (np.diag(r) / np.abs(np.diag(r)))
            c = np.zeros(n, dtype=complex)
            for x_, name in enumerate(g.names):
                i, j = map(int, name.strip("()").split(","))
                c[x_] = q[i - 1, j - 1]
            x = cv.AlgElem(g, c)
        elif kind == 3:
            eps = (0.3, 0.1, 0.03)[k % 3]
            B = bis[rng.integers(len(bis))]
            x = st.random_phase_element(g, B, rng) + eps * cv.random_element(g, rng)
        elif kind == 4:
            x = st.random_phase_element(g, bis[rng.integers(len(bis))], rng)
        elif kind == 5:
            B = bis[rng.integers(len(bis))]
            x = cv.random_element(g, rng, support=B)
        else:
            x = cv.on_units(g, rng.normal(size=2) + 1j * rng.normal(size=2))
        families.append((kind, x))
    return families


@pytest.mark.slow
def test_c03_structure_theorem_search(acceptance):
    g = gpd.pair(2)
    rng = np.random.default_rng(2024)
    per_p = 10_000
    bad, found, disagree, searched = [], 0, 0, 0
    for p in (1.5, 3.0):
        ctx = st.AlgebraContext(g, "fp", p)
        for kind, x in _contraction_samples(g, rng, per_p):
            nx = ctx.norm(x)
            if nx == 0:
                continue
            a = x / nx if kind != 4 else x
            searched += 1
            b = oracles.generic_mp_inverse(a)
            is_pi = b is not None and ctx.norm(b) <= 1 + NORM_TOL and ctx.norm(a) <= 1 + NORM_TOL
            if is_pi:
                found += 1
                supp = a.support(NORM_TOL)
                vals = np.abs(a.coeffs[sorted(supp)])
                if not gpd.is_bisection(g, supp) or np.abs(vals - 1).max(initial=0.0) > NORM_TOL:
                    bad.append((p, kind, a))
            if is_pi != (st.is_mp_partial_isometry(ctx, a) is not None):
                disagree += 1
    ok = not bad and searched >= 2 * per_p - 10 and found > 0
    acceptance("C3 structure theorem search", ok,
               f"{searched} contractions, {found} MP-partial isometries, {len(bad)} counterexamples, "
               f"{disagree} classifier disagreements")
    assert ok and disagree == 0


def test_c04_p2_negative_control(acceptance):
    Z2 = gpd.group_cyclic(2)
    e, g = Z2.arrow("0"), Z2.arrow("1")
    f = (cv.delta(Z2, e) + cv.delta(Z2, g, 1j)) / math.sqrt(2)
    # direct 2×2 computation, independent of lambda_matrix
    L = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
    assert np.allclose(rg.lambda_matrix(Z2, f), L, atol=1e-15)
    s = np.linalg.svd(L, compute_uv=False)
    s_inv = np.linalg.svd(np.linalg.inv(L), compute_uv=False)
    unitary = np.allclose(L.conj().T @ L, np.eye(2), atol=ALG_TOL)
    norms_one = abs(s[0] - 1) <= ALG_TOL and abs(s_inv[0] - 1) <= ALG_TOL
    not_bisection = not gpd.is_bisection(Z2, f.support(st.SUPPORT_TOL))
    ctx2 = st.AlgebraContext(Z2, "fp", 2.0)
    fp2 = rg.fp_norm(Z2, f, 2)
    fp2_inv = rg.fp_norm(Z2, f.star(), 2)
    is_mp_at_2 = st.verify_mp(ctx2, f, f.star())
    away = [st.is_mp_partial_isometry(st.AlgebraContext(Z2, "fp", p), f) is None for p in (1.0, 1.5, 3.0)]
    ok = (unitary and norms_one and not_bisection and abs(fp2 - 1) <= ALG_TOL and abs(fp2_inv - 1) <= ALG_TOL
          and is_mp_at_2 and all(away))
    acceptance("C4 p=2 negative control", ok,
               f"||λ(f)||_2={s[0]:.12f}, ||λ(f)^-1||_2={s_inv[0]:.12f}, bisection support={not not_bisection}")
    assert ok


def test_c05_norm_sandwich(acceptance):
    g = gpd.pair(3)
    rng = np.random.default_rng(5)
    elems = [cv.random_element(g, rng) for _ in range(1000)]
    bis = gpd.enumerate_bisections(g)[1:]
    bis_elems = [cv.random_element(g, rng, support=bis[rng.integers(len(bis))]) for _ in range(100)]
    worst_low = worst_high = worst_eq = 0.0
    for p in (1.0, 1.5, 3.0):
        for f in elems:
            lam, sup, i = rg.fp_norm(g, f, p), f.sup_norm(), cv.i_norm(g, f)
            worst_low = max(worst_low, sup - lam)
            worst_high = max(worst_high, lam - i)
        for f in bis_elems:
            lam, sup, i = rg.fp_norm(g, f, p), f.sup_norm(), cv.i_norm(g, f)
            worst_eq = max(worst_eq, abs(lam - sup), abs(i - sup))
    ok = worst_low <= NORM_TOL and worst_high <= NORM_TOL and worst_eq <= NORM_TOL
    acceptance("C5 norm sandwich", ok,
               f"max(sup-λ)={worst_low:.2e}, max(λ-I)={worst_high:.2e}, bisection spread={worst_eq:.2e}")
    assert ok


def _hermitian_candidates(g, rng, count):
    units = list(g.units)
    off = [x for x in range(g.n) if x not in units]
    out = []
    for k in range(count):
        kind = k % 5
        if kind == 0:
            out.append((True, cv.on_units(g, rng.normal(size=3))))
        elif kind == 1:
            out.append((False, cv.on_units(g, rng.normal(size=3) + 1j * rng.uniform(0.5, 2, size=3))))
        elif kind == 2:
            # self-adjoint but off the units: hermitian only at p = 2
            h = cv.random_element(g, rng)
            out.append((False, h + h.star()))
        elif kind == 3:
            c = np.zeros(g.n, dtype=complex)
            c[units] = rng.normal(size=3)
            c[off[rng.integers(len(off))]] = rng.choice([-1, 1]) * rng.uniform(0.5, 2)
            out.append((False, cv.AlgElem(g, c)))
        else:
            out.append((False, cv.random_element(g, rng)))
    return out


def test_c06_core_identification(acceptance):
    g = gpd.pair(3)
    rng = np.random.default_rng(6)
    disagreements = wrong = checked = 0
    cstar = 0.0
    for p in (1.5, 3.0):
        ctx = st.AlgebraContext(g, "fp", p)
        for expected, f in _hermitian_candidates(g, rng, 100):
            checked += 1
            try:
                v = st.is_hermitian(ctx, f)
            except st.HermitianDisagreement:
                disagreements += 1
                continue
            wrong += bool(v) != expected
        for _ in range(100):
            x = cv.on_units(g, rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
            nx = ctx.norm(x)
            cstar = max(cstar, abs(ctx.norm(x.star() * x) - nx * nx))
    ok = disagreements == 0 and wrong == 0 and cstar <= NORM_TOL
    acceptance("C6 core identification", ok,
               f"{checked} candidates, {disagreements} disagreements, {wrong} misclassified, "
               f"C*-identity defect {cstar:.2e} on 200 core elements")
    assert ok


def test_c07_inverse_semigroup_laws(acceptance):
    g = gpd.pair(3)
    rng = np.random.default_rng(7)
    bis = gpd.enumerate_bisections(g)
    details, ok = [], True
    for p in (1.5, 3.0):
        ctx = st.AlgebraContext(g, "fp", p)
        sample = [st.random_phase_element(g, B, rng) for B in bis]
        rep = st.pi_mp_semigroup_check(ctx, sample, tol=ALG_TOL)
        projections = []
        for a in sample:
            ad = st.mp_inverse(ctx, a)
            projections += [ad * a, a * ad]
        commute = all((e * f).close_to(f * e, ALG_TOL) for e, f in itertools.combinations(projections, 2))
        good = rep.ok and commute and not rep.failures
        ok &= good
        details.append(f"p={p:g}: {len(sample)} elements, {len(rep.failures)} failures, "
                       f"idempotents commute={commute}, normalizer closure={rep.normalizer_valid}")
    acceptance("C7 inverse-semigroup laws", ok, "; ".join(details))
    assert ok


def test_c08_tight_machinery(acceptance):
    checked, mismatches = 0, []
    for name, g in rc.catalog().items():
        S = isg.from_bisections(g)
        L = S.semilattice()
        checked += 1
        if isg.tight_filters(L) != isg.ultrafilters(L):
            mismatches.append(name)
    I3 = isg.symmetric_inverse_monoid(3)
    T = isg.tight_groupoid(I3)
    iso = gpd.groupoid_isomorphic(T.groupoid, gpd.pair(3))
    ok = not mismatches and iso is not None and gpd.is_isomorphism(T.groupoid, gpd.pair(3), iso)
    acceptance("C8 tight machinery", ok,
               f"{checked} semilattices, mismatches={mismatches}, G_tight(I_3)≅P3={iso is not None}")
    assert ok


def test_c09_rakocevic_harness(acceptance):
    rows = []
    for p in (1.5, 3.0):
        for seq, expected in rc.sequence_battery(p):
            r = rc.rakocevic_experiment(seq, check=False)
            rows.append(r.consistent and r.conditions == (expected,) * 3)
    g2 = gpd.pair(2)
    ctx = st.AlgebraContext(g2, "fp", 1.5)
    try:
        rc.rakocevic_experiment(rc.alternating_sequence(ctx, {g2.arrow("(1,2)")}, {g2.arrow("(2,1)")}))
        rejected = False
    except rc.InvalidSequence:
        rejected = True
    g = gpd.pair(3)
    ctx3 = st.AlgebraContext(g, "fp", 1.5)
    E = st.hermitian_idempotents(g)
    gaps = [rc.projection_gap_check(ctx3, e, f) for e, f in itertools.product(E, repeat=2)]
    ok = len(rows) >= 12 and all(rows) and rejected and all(r.holds for r in gaps)
    acceptance("C9 Rakocevic harness", ok,
               f"{sum(rows)}/{len(rows)} sequence verdicts correct, invalid sequence rejected={rejected}, "
               f"projection gap {sum(r.holds for r in gaps)}/{len(gaps)}")
    assert ok


def test_c10_homotopy_witnesses(acceptance):
    g = gpd.pair(2)
    ctx = st.AlgebraContext(g, "fp", 1.5)
    rng = np.random.default_rng(10)
    bis = [B for B in gpd.enumerate_bisections(g) if B]
    steps = 64
    worst_gap, bad = 0.0, 0
    for _ in range(50):
        a = st.random_phase_element(g, bis[rng.integers(len(bis))], rng)
        path = st.homotopy_path(ctx, a, steps)
        bad += sum(st.is_mp_partial_isometry(ctx, h) is None for h in path)
        bad += not path[0].close_to(a, ALG_TOL)
        worst_gap = max(worst_gap, max((x - y).sup_norm() for x, y in zip(path, path[1:])))
    ok = bad == 0 and worst_gap <= math.pi / steps + ALG_TOL
    acceptance("C10 homotopy witnesses", ok, f"max gap {worst_gap:.6f} (bound {math.pi / steps:.6f}), {bad} bad samples")
    assert ok

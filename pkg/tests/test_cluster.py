import math

import numpy as np
import pytest

from gibbschain import chain, cluster, opalg, oracles, profiles, qbp
from gibbschain.errors import (
    CapExceeded,
    DimensionCap,
    NotCommuting,
    NotDisconnected,
    NotPSD,
    NotUnitNorm,
    OverlappingSupports,
)


def rand_herm(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (m + m.conj().T)


def test_double_identity_cases():
    eye = opalg.DenseOperator((1,), np.eye(2))
    assert np.allclose(cluster.double(eye, "one", 2).matrix, 0.0)
    assert np.allclose(cluster.double(eye, "plus", 2).matrix, 2 * np.eye(16))
    z = opalg.single_site(opalg.pauli("z"), 0)
    assert opalg.opnorm(cluster.double(z, "zero", 2).matrix) == pytest.approx(1.0)
    assert opalg.opnorm(cluster.double(z, "one", 2).matrix) <= 2.0 + 1e-12


def test_double_swap_symmetry():
    rng = np.random.default_rng(0)
    op = opalg.DenseOperator((0,), rand_herm(rng, 2))
    s = cluster.swap_matrix(2)
    plus = cluster.double(op, "plus", 1).matrix
    one = cluster.double(op, "one", 1).matrix
    assert np.allclose(s @ plus @ s, plus)
    assert np.allclose(s @ one @ s, -one)


def test_double_dimension_cap():
    z = opalg.single_site(opalg.pauli("z"), 0)
    with pytest.raises(DimensionCap):
        cluster.double(z, "plus", 8, dim_cap=4096)


def test_psi_norm_and_validation():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = rand_herm(rng, 2)
        a /= opalg.opnorm(a)
        b = rand_herm(rng, 2)
        b /= opalg.opnorm(b)
        probe = cluster.psi(opalg.DenseOperator((0,), a), opalg.DenseOperator((3,), b), 4)
        assert opalg.opnorm(probe.matrix()) <= 2.0 + 1e-10
    with pytest.raises(OverlappingSupports):
        cluster.psi(opalg.single_site(opalg.pauli("x"), 1),
                    opalg.single_site(opalg.pauli("y"), 1), 3)
    with pytest.raises(NotUnitNorm):
        cluster.psi(opalg.DenseOperator((0,), 2 * np.eye(2)),
                    opalg.single_site(opalg.pauli("x"), 1), 3)


def test_psi_identity_second_factor_vanishes():
    probe = cluster.psi(opalg.single_site(opalg.pauli("x"), 0),
                        opalg.DenseOperator((2,), np.eye(2)), 3)
    assert np.max(np.abs(probe.matrix())) < 1e-14


def test_psi_expectation_reproduces_correlation():
    rng = np.random.default_rng(2)
    h = rand_herm(rng, 16)
    beta = 0.9
    st = opalg.gibbs(h, beta, n=4)
    ox = opalg.single_site(opalg.pauli("x"), 0)
    oy = opalg.single_site(opalg.pauli("y"), 3)
    probe = cluster.psi(ox, oy, 4)
    rho = st.rho.matrix
    factorized = probe.expectation(rho)
    direct = opalg.correlation(st, ox, oy)
    assert factorized == pytest.approx(direct, abs=1e-12)
    # and the same number from the materialized doubled operators
    doubled = np.kron(rho, rho) @ probe.matrix()
    assert np.trace(doubled) == pytest.approx(direct, abs=1e-12)


def test_disconnected_trace_zero_and_counterexample():
    rng = np.random.default_rng(3)
    n = 4
    ox = opalg.single_site(opalg.pauli("x"), 0)
    oy = opalg.single_site(opalg.pauli("y"), n - 1)
    # no clusters at all: antisymmetry alone kills the trace
    res0 = cluster.disconnected_trace([], ox, oy, n)
    assert res0.disconnected and abs(res0.value) < 1e-10 * res0.scale
    # one cluster overlapping the X side only
    z1 = opalg.DenseOperator((0, 1), rand_herm(rng, 4))
    res1 = cluster.disconnected_trace([z1], ox, oy, n)
    assert res1.disconnected and abs(res1.value) < 1e-10 * res1.scale
    # bridging chain of clusters: checker flags it, value is generic
    zs = [opalg.DenseOperator((0, 1), rand_herm(rng, 4)),
          opalg.DenseOperator((1, 2), rand_herm(rng, 4)),
          opalg.DenseOperator((2, 3), rand_herm(rng, 4))]
    res2 = cluster.disconnected_trace(zs, ox, oy, n)
    assert not res2.disconnected
    assert abs(res2.value) > 1e-10 * res2.scale
    with pytest.raises(NotDisconnected):
        cluster.disconnected_trace(zs, ox, oy, n, require=True)


def _truncated(n=6, gen="random_two_site", coupling=0.4, seed=7, block_len=2, J=None):
    prof = profiles.finite_range(1) if gen == "ising_zz" else profiles.power_law(3.0)
    h = chain.build_chain(n, gen, prof, coupling=coupling, seed=seed)
    return chain.truncate(h, [0], [n - 1], block_len)


def test_g_operator_trivial_cases():
    htc = _truncated()
    beta = 0.7
    g0 = cluster.g_operator(htc, cluster.BondSelector(()), beta)
    assert np.allclose(g0.matrix, opalg.herm_expm(htc.matrix(), beta))
    zero_bond = np.zeros_like(htc.matrix())
    g1 = cluster.g_operator(htc, [zero_bond], beta)
    assert np.max(np.abs(g1.matrix)) < 1e-12
    with pytest.raises(CapExceeded):
        cluster.g_operator(htc, [zero_bond] * 9, beta, branch_cap=256)


def test_g_operator_single_bond_difference():
    htc = _truncated()
    beta = 0.6
    b0 = htc.bond_matrix(0)
    g = cluster.g_operator(htc, [b0], beta)
    expected = opalg.herm_expm(htc.matrix(), beta) - opalg.herm_expm(htc.matrix() - b0, beta)
    assert np.max(np.abs(g.matrix - expected)) < 1e-12


def test_g_operator_lambda_vs_nested():
    htc = _truncated()
    beta = 0.8
    for subset in ((0,), (0, 1), (1, 2)):
        bonds = [htc.bond_matrix(s) for s in subset]
        a = cluster.g_operator(htc, cluster.BondSelector(subset), beta).matrix
        b = cluster.g_operator_nested(htc, bonds, beta)
        assert opalg.opnorm(a - b) <= 1e-12 * max(opalg.opnorm(b), 1.0)


def test_g_operator_integral_oracle_single():
    # independent oracle: integrate the exact directional derivative of the
    # exponential over the bond coupling with Gauss nodes
    htc = _truncated(n=6, block_len=1)
    beta = 0.7
    h_mat = htc.matrix()
    b = htc.bond_matrix(1)
    xs, ws = np.polynomial.legendre.leggauss(40)
    lam = 0.5 * (xs + 1.0)
    w = 0.5 * ws
    acc = np.zeros_like(h_mat, dtype=complex)
    for lk, wk in zip(lam, w):
        evals, vecs = np.linalg.eigh(h_mat - (1 - lk) * b)
        bt = vecs.conj().T @ (beta * b) @ vecs
        e = beta * evals
        de = e[:, None] - e[None, :]
        ratio = np.where(np.abs(de) < 1e-12, np.exp(e)[:, None] * np.ones_like(de),
                         (np.exp(e)[:, None] - np.exp(e)[None, :]) / np.where(np.abs(de) < 1e-12, 1.0, de))
        acc += wk * (vecs @ (ratio * bt) @ vecs.conj().T)
    g = cluster.g_operator(htc, [b], beta).matrix
    assert opalg.opnorm(g - acc) <= 1e-9 * max(opalg.opnorm(g), 1.0)


def test_g_operator_integral_oracle_double():
    # central finite differences in both couplings, integrated over the square
    htc = _truncated(n=6, block_len=1)
    beta = 0.5
    h_mat = htc.matrix()
    b1, b2 = htc.bond_matrix(0), htc.bond_matrix(1)
    xs, ws = np.polynomial.legendre.leggauss(12)
    lam = 0.5 * (xs + 1.0)
    w = 0.5 * ws
    step = 1e-4
    acc = np.zeros_like(h_mat, dtype=complex)

    def e(l1, l2):
        return opalg.herm_expm(h_mat - (1 - l1) * b1 - (1 - l2) * b2, beta)

    for l1, w1 in zip(lam, w):
        for l2, w2 in zip(lam, w):
            mixed = (
                e(l1 + step, l2 + step) - e(l1 + step, l2 - step)
                - e(l1 - step, l2 + step) + e(l1 - step, l2 - step)
            ) / (4 * step**2)
            acc += w1 * w2 * mixed
    g = cluster.g_operator(htc, [b1, b2], beta).matrix
    assert opalg.opnorm(g - acc) <= 1e-5 * max(opalg.opnorm(g), 1.0)


def test_commuting_factorization():
    htc = _truncated(gen="ising_zz", coupling=1.0, block_len=1)
    beta = 0.9
    bonds = [htc.bond_matrix(s) for s in range(htc.q + 1)]
    g = cluster.g_operator(htc, cluster.BondSelector(tuple(range(htc.q + 1))), beta).matrix
    v_total = htc.matrix() - sum(bonds)
    prod = opalg.herm_expm(v_total, beta)
    dim = prod.shape[0]
    for b in bonds:
        prod = prod @ (opalg.herm_expm(b, beta) - np.eye(dim))
    assert opalg.opnorm(g - prod) <= 1e-10 * max(opalg.opnorm(prod), 1.0)


def test_identity_residual_beta_zero_and_small():
    htc = _truncated()
    ox = opalg.single_site(opalg.pauli("x"), 0)
    oy = opalg.single_site(opalg.pauli("x"), 5)
    rep0 = cluster.correlation_identity_residual(htc, ox, oy, 0.0)
    assert rep0.residual < 1e-14
    rep = cluster.correlation_identity_residual(htc, ox, oy, 1.0)
    assert rep.residual <= 1e-8
    assert rep.cor_abs == pytest.approx(rep.psi_g_over_z, abs=1e-12)


def test_commuting_chain_bound_oracle():
    htc = _truncated(gen="ising_zz", coupling=1.0, block_len=1, n=8)
    ox = opalg.single_site(opalg.pauli("z"), 0)
    oy = opalg.single_site(opalg.pauli("z"), 7)
    for beta in (0.5, 1.0):
        rep = cluster.commuting_chain_bound(htc, beta, o_x=ox, o_y=oy)
        oracle = abs(oracles.ising_transfer_correlation(8, 1.0, beta, 0, 7))
        assert rep.exact_cor == pytest.approx(oracle, abs=1e-12)
        assert rep.exact_cor <= rep.product_bound <= rep.final_bound + 1e-12
        assert rep.exact_cor == pytest.approx(math.tanh(beta) ** 7, abs=1e-12)
    with pytest.raises(NotCommuting):
        cluster.commuting_chain_bound(_truncated(), 0.5)


def test_positivity_shift():
    rng = np.random.default_rng(4)
    # B = 0 keeps the difference positive for any nonnegative shift
    a = rand_herm(rng, 6)
    a = a @ a.conj().T
    rep = cluster.verify_positivity_shift(a, np.zeros((6, 6)), 0.3)
    assert rep.passed
    for _ in range(20):
        dim = int(rng.integers(2, 17))
        aa = rand_herm(rng, dim)
        aa = aa @ aa.conj().T / dim
        bb = rand_herm(rng, dim)
        bb = bb @ bb.conj().T / dim
        assert cluster.verify_positivity_shift(aa, bb, opalg.opnorm(aa)).passed
    counter = cluster.verify_positivity_shift(np.diag([0.0, 10.0]), np.ones((2, 2)), 1.0)
    assert counter.min_eig < -1.0
    with pytest.raises(NotPSD):
        cluster.verify_positivity_shift(-np.eye(2), np.eye(2), 1.0)


def test_weighted_product_scalar_equality():
    # scalar weights give exact equality between the two sides
    n = 3
    rng = np.random.default_rng(5)
    rho = rand_herm(rng, 8)
    rho = rho @ rho.conj().T
    psi = rng.standard_normal(2)
    c1, c2 = 1.7, 0.4
    ws = [c1 * np.eye(4), c2 * np.eye(4)]
    rep = cluster.verify_weighted_product(ws, rho, psi, (0, 1), n)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-12)
    assert rep.passed


def test_weighted_product_random_draws():
    rng = np.random.default_rng(6)
    for k in range(30):
        n = 3 + k % 2
        m = 1 + k % 3
        ws = [np.diag(rng.uniform(0, 2.5, size=4)) for _ in range(m)]
        rho = rand_herm(rng, 2**n)
        rho = rho @ rho.conj().T
        psi = rng.standard_normal(2 ** (n - 2)) + 1j * rng.standard_normal(2 ** (n - 2))
        rep = cluster.verify_weighted_product(ws, rho, psi, (0, 1), n)
        assert rep.passed
    w1 = np.array([[1.0, 0.5], [0.5, 1.0]])
    w2 = np.diag([0.2, 2.0])
    with pytest.raises(NotCommuting):
        cluster.verify_weighted_product([w1, w2], np.eye(8), np.ones(4), (0,), 3)


def test_gamma_pair_trivial_and_factorized():
    htc = _truncated(gen="ising_zz", coupling=1.0, block_len=1)
    cd = chain.center_decomposition(htc, 2, 1, enforce_cutoff=False)
    ox = opalg.single_site(opalg.pauli("z"), 0)
    oy = opalg.single_site(opalg.pauli("z"), 5)
    beta = 0.7
    scheme = qbp.filter_quadrature(beta, 1e-9)
    rep = cluster.gamma_pair(htc, cd, beta, ox, oy, scheme=scheme, tau_steps=16,
                             compute_diff=False)
    assert rep.factorization_residual <= 1e-10
    # the probe trace of the alternating sum reproduces the correlation
    st = opalg.gibbs(htc.matrix(), beta)
    assert rep.psi_trace_gamma / rep.z2 == pytest.approx(
        abs(opalg.correlation(st, ox, oy)), abs=1e-10
    )


def test_gamma_pair_zero_bonds_vanish():
    # build a chain whose center bonds vanish: far-separated interactions only
    h = chain.build_chain(6, "ising_zz", profiles.finite_range(1), coupling=1.0, seed=0)
    # drop the two center bonds by hand to make the bundles empty
    kept = tuple(t for t in h.terms if t.sites not in ((1, 2), (3, 4)))
    h2 = h.replace_terms(kept)
    htc = chain.truncate(h2, [0], [5], 1)
    cd = chain.center_decomposition(htc, 2, 1, enforce_cutoff=False)
    assert all(len(b) == 0 for b in cd.bond_bundles)
    ox = opalg.single_site(opalg.pauli("z"), 0)
    oy = opalg.single_site(opalg.pauli("z"), 5)
    rep = cluster.gamma_pair(htc, cd, 0.8, ox, oy, tau_steps=4)
    assert rep.psi_trace_gamma < 1e-12
    assert rep.psi_trace_gamma_local < 1e-12


def test_gamma_pair_diff_trace_norm_small_on_commuting():
    htc = _truncated(gen="ising_zz", coupling=1.0, block_len=1, n=4)
    cd = chain.center_decomposition(htc, 1, 1, enforce_cutoff=False)
    ox = opalg.single_site(opalg.pauli("z"), 0)
    oy = opalg.single_site(opalg.pauli("z"), 3)
    beta = 0.6
    rep = cluster.gamma_pair(htc, cd, beta, ox, oy, tau_steps=16, compute_diff=True)
    # commuting case: the localized construction is numerically exact
    assert rep.diff_trace_norm <= 1e-7 * rep.z2


def test_product_bound_small_beta_scaling():
    htc = _truncated(gen="ising_zz", coupling=1.0, block_len=1, n=6)
    norms = [htc.bond_norm(s) for s in range(htc.q + 1)]
    leading = 2.0 * math.prod(2.0 * h for h in norms)
    for beta in (1e-4, 1e-5):
        rep = cluster.commuting_chain_bound(htc, beta)
        # product bound vanishes at leading order beta^(q+1)
        assert rep.product_bound / beta ** (htc.q + 1) == pytest.approx(leading, rel=1e-3)


def test_commuting_trace_inequality_dense():
    htc = _truncated(gen="ising_zz", coupling=1.0, block_len=2, n=6)
    beta = 0.8
    bonds = [htc.bond_matrix(s) for s in range(htc.q + 1)]
    v_total = htc.matrix() - sum(bonds)
    dim = v_total.shape[0]
    prod = opalg.herm_expm(v_total, beta)
    for b in bonds:
        prod = prod @ (opalg.herm_expm(b, beta) - np.eye(dim))
    lhs = float(np.trace(prod).real)
    rhs = float(np.trace(opalg.herm_expm(htc.matrix(), beta)).real)
    for b in bonds:
        nb = opalg.opnorm(b)
        rhs *= -math.expm1(-beta * nb)
    assert 0.0 <= lhs <= rhs * (1 + 1e-12)

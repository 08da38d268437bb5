import math

import numpy as np
import pytest

from gibbschain import opalg
from gibbschain.errors import (
    DimensionCap,
    NotHermitian,
    OverlappingSupports,
    SupportMismatch,
)


def rand_herm(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (m + m.conj().T)


def test_embed_identity_and_norm():
    eye = opalg.DenseOperator((2,), np.eye(2))
    assert np.allclose(opalg.embed(eye, 4).matrix, np.eye(16))
    z = opalg.single_site(opalg.pauli("z"), 0)
    assert opalg.opnorm(opalg.embed(z, 2)) == pytest.approx(1.0)


def test_embed_roundtrip_partial_trace():
    rng = np.random.default_rng(0)
    a = rand_herm(rng, 4)
    op = opalg.DenseOperator((1, 2), a)
    full = opalg.embed(op, 4).matrix
    back = opalg.partial_trace(full, (1, 2), 4) / 4.0  # identity factors carry 2 each
    assert np.allclose(back, a, atol=1e-12)


def test_embed_unsorted_support():
    rng = np.random.default_rng(1)
    a = rand_herm(rng, 4)
    # acting on (2, 0) must equal swapping factors then acting on (0, 2)
    swapped = a.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    m1 = opalg.embed_matrix(a, [2, 0], 3)
    m2 = opalg.embed_matrix(swapped, [0, 2], 3)
    assert np.allclose(m1, m2, atol=1e-12)


def test_embed_rejects_bad_support():
    a = np.eye(4)
    with pytest.raises(SupportMismatch):
        opalg.embed_matrix(a, [2, 4], 4)


def test_herm_expm_basics():
    assert np.allclose(opalg.herm_expm(np.zeros((3, 3))), np.eye(3))
    d = opalg.herm_expm(np.diag([0.0, math.log(2.0)]))
    assert np.allclose(d, np.diag([1.0, 2.0]))


def test_herm_expm_inverse_identity():
    rng = np.random.default_rng(2)
    a = rand_herm(rng, 8)
    prod = opalg.herm_expm(a) @ opalg.herm_expm(a, scale=-1.0)
    assert np.linalg.norm(prod - np.eye(8), 2) < 1e-10


def test_herm_expm_rejects_nonhermitian():
    with pytest.raises(NotHermitian):
        opalg.herm_expm(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_gibbs_maximally_mixed_and_two_level():
    rho0 = opalg.gibbs(np.zeros((8, 8)), 0.7, n=3).rho.matrix
    assert np.allclose(rho0, np.eye(8) / 8.0)
    e = 1.3
    st = opalg.gibbs(np.diag([0.0, e]), 2.0, n=1)
    pops = np.diag(st.rho.matrix).real
    z = 1.0 + math.exp(2.0 * e)
    assert pops == pytest.approx([1.0 / z, math.exp(2.0 * e) / z], rel=1e-12)
    assert st.logZ == pytest.approx(math.log(z))


def test_gibbs_energy_spectral_sum_oracle():
    rng = np.random.default_rng(3)
    h = rand_herm(rng, 64)
    beta = 1.0
    st = opalg.gibbs(h, beta, n=6)
    energy = float(np.trace(st.rho.matrix @ h).real)
    evals = np.linalg.eigvalsh(h)
    w = np.exp(beta * evals - np.max(beta * evals))
    oracle = float(np.sum(evals * w) / np.sum(w))
    assert energy == pytest.approx(oracle, rel=1e-10)
    assert np.trace(st.rho.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert np.min(np.linalg.eigvalsh(st.rho.matrix)) > -1e-12


def test_gibbs_dimension_cap():
    with pytest.raises(DimensionCap):
        opalg.gibbs(np.zeros((32, 32)), 1.0, dim_cap=16, n=5)


def test_evolve_identity_cases():
    rng = np.random.default_rng(4)
    o = rand_herm(rng, 8)
    g = rand_herm(rng, 8)
    assert np.allclose(opalg.evolve(o, g, 0.0), o)
    diag = np.diag(rng.standard_normal(8))
    f = np.diag(rng.standard_normal(8))
    assert np.allclose(opalg.evolve(f, diag, 0.83), f, atol=1e-12)


def test_evolve_preserves_norm_and_hermiticity():
    rng = np.random.default_rng(5)
    for _ in range(5):
        o = rand_herm(rng, 16)
        g = rand_herm(rng, 16)
        out = opalg.evolve(o, g, 0.61)
        assert opalg.opnorm(out) == pytest.approx(opalg.opnorm(o), abs=1e-10)
        assert opalg.herm_defect(out) < 1e-12


def test_norms():
    assert opalg.opnorm(np.eye(8)) == 1.0
    assert opalg.opnorm(np.eye(8), kind="trace") == 8.0
    proj = np.zeros((4, 4))
    proj[0, 0] = 1.0
    assert opalg.opnorm(proj) == 1.0
    assert opalg.opnorm(proj, kind="trace") == 1.0
    rng = np.random.default_rng(6)
    a = rand_herm(rng, 12)
    assert opalg.opnorm(a, kind="trace") == pytest.approx(
        np.sum(np.abs(np.linalg.eigvalsh(a))), rel=1e-10
    )
    # non-Hermitian spectral norm agrees with the SVD route
    b = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    assert opalg.opnorm(b) == pytest.approx(np.linalg.norm(b, 2), rel=1e-10)


def test_correlation_factorizing_states():
    ox = opalg.single_site(opalg.pauli("z"), 0)
    oy = opalg.single_site(opalg.pauli("z"), 2)
    st = opalg.gibbs(np.zeros((8, 8)), 1.0, n=3)  # maximally mixed
    assert abs(opalg.correlation(st, ox, oy)) < 1e-14

    rng = np.random.default_rng(7)
    h_left = opalg.embed_matrix(rand_herm(rng, 2), [0], 3)
    h_right = opalg.embed_matrix(rand_herm(rng, 4), [1, 2], 3)
    st2 = opalg.gibbs(h_left + h_right, 0.9, n=3)  # product state across 0 | 12
    assert abs(opalg.correlation(st2, ox, oy)) < 1e-12


def test_correlation_rejects_overlap():
    ox = opalg.single_site(opalg.pauli("z"), 1)
    oy = opalg.single_site(opalg.pauli("z"), 1)
    st = opalg.gibbs(np.zeros((4, 4)), 1.0, n=2)
    with pytest.raises(OverlappingSupports):
        opalg.correlation(st, ox, oy)


def test_correlation_shift_invariance():
    rng = np.random.default_rng(8)
    h = rand_herm(rng, 16)
    ox = opalg.single_site(opalg.pauli("x"), 0)
    oy = opalg.single_site(opalg.pauli("x"), 3)
    c1 = opalg.correlation(opalg.gibbs(h, 1.1, n=4), ox, oy)
    c2 = opalg.correlation(opalg.gibbs(h + 2.7 * np.eye(16), 1.1, n=4), ox, oy)
    assert abs(c1 - c2) < 1e-10


def test_golden_thompson():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = rand_herm(rng, 8)
        b = rand_herm(rng, 8)
        lhs = np.trace(opalg.herm_expm(a + b)).real
        rhs = np.trace(opalg.herm_expm(a) @ opalg.herm_expm(b)).real
        assert lhs <= rhs * (1 + 1e-12)

import math

import numpy as np
import pytest

from gibbschain import chain, locality, opalg, profiles
from gibbschain.errors import MissingParam, SubsetViolation


def test_convolution_constant_two_sites():
    # single pair: (jbar(0)jbar(1) + jbar(1)jbar(0)) / jbar(1) = 2
    for p in (profiles.power_law(3.0), profiles.exponential(0.9)):
        assert locality.convolution_constant(p, 2) == pytest.approx(2.0, rel=1e-12)


def test_convolution_constant_brute_force():
    p = profiles.exponential(math.log(2.0))
    n = 6
    got = locality.convolution_constant(p, n)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            s = sum(p(abs(i - k)) * p(abs(k - j)) for k in range(n))
            worst = max(worst, s / p(abs(i - j)))
    assert got == pytest.approx(worst, rel=1e-12)


def test_convolution_constant_monotone_in_n():
    p = profiles.power_law(3.0)
    vals = [locality.convolution_constant(p, n) for n in (4, 6, 8, 10)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_convolution_constant_infinite_for_finite_range():
    assert math.isinf(locality.convolution_constant(profiles.finite_range(1), 6))


def _env(h, mode=None):
    return locality.envelope_for_chain(h, mode=mode)


def test_envelope_zero_at_t0():
    h = chain.build_chain(6, "ising_zz", profiles.finite_range(2), coupling=1.0, seed=0)
    env = _env(h)
    assert env.mode == "finite_range"
    assert locality.lr_envelope(env, 0.0, 3) == 0.0

    h2 = chain.build_chain(6, "ising_zz", profiles.power_law(3.0), coupling=1.0, seed=0)
    env2 = _env(h2)
    assert env2.mode == "infinite_range"
    assert locality.lr_envelope(env2, 0.0, 3) == 0.0


def test_envelope_light_cone_step_count():
    h = chain.build_chain(8, "ising_zz", profiles.finite_range(2), coupling=1.0, seed=0)
    env = _env(h)
    p = env.params
    t, r = 0.3, 5
    n0 = math.floor(r / 2 + 1)
    assert n0 == 3
    expected = (2.0 / p.k) * (2 * p.g * p.k * t) ** n0 / math.factorial(n0)
    assert locality.lr_envelope(env, t, r) == pytest.approx(min(expected, 2.0), rel=1e-12)


def test_envelope_trivial_cap_and_monotonicity():
    h = chain.build_chain(8, "heisenberg_xxz", profiles.power_law(3.0), coupling=1.0, seed=1)
    env = _env(h)
    assert locality.lr_envelope(env, 50.0, 1) == pytest.approx(2.0)
    for mode_env in (env, _env(h.replace_terms(h.terms), mode="infinite_range")):
        vals_t = [locality.lr_envelope(mode_env, t, 3) for t in (0.0, 0.1, 0.5, 1.0, 3.0)]
        assert all(a <= b + 1e-15 for a, b in zip(vals_t, vals_t[1:]))
        vals_r = [locality.lr_envelope(mode_env, 0.5, r) for r in range(1, 7)]
        assert all(a >= b - 1e-15 for a, b in zip(vals_r, vals_r[1:]))


def test_truncated_envelope_modes():
    h = chain.build_chain(10, "heisenberg_xxz", profiles.power_law(3.0), coupling=0.5, seed=2)
    htc = chain.truncate(h, [0], [9], 2)
    env = _env(htc)
    assert env.mode == "truncated"
    p = env.params
    r, t = 6, 0.4
    f_tilde = p.prefactor * min(math.exp(-r / 4.0), h.profile(r))
    expected = min(2.0, math.exp(p.velocity * t) * f_tilde)
    assert locality.lr_envelope(env, t, r) == pytest.approx(min(expected, 2.0), rel=1e-12)


def test_exact_commutator_trivial_cases():
    h = chain.build_chain(6, "heisenberg_xxz", profiles.power_law(3.0), coupling=0.5, seed=0)
    ox = opalg.single_site(opalg.pauli("x"), 0)
    oy = opalg.single_site(opalg.pauli("x"), 4)
    assert locality.exact_commutator_norm(ox, oy, h, 0.0) < 1e-14
    assert locality.exact_commutator_norm(ox, oy, np.zeros((64, 64)), 1.3) < 1e-14


def test_certification_no_violations_small():
    h = chain.build_chain(6, "ising_zz", profiles.finite_range(1), coupling=1.0, seed=0)
    rep = locality.lr_certify(h, _env(h), (0.0, 0.25, 0.5), range(1, 6))
    assert rep.passed
    assert rep.max_ratio <= 1.0 + 1e-10

    empty = locality.lr_certify(h, _env(h), (), range(1, 6))
    assert empty.passed and len(empty.rows) == 0


def test_subset_evolution_trivial_and_bound():
    h = chain.build_chain(8, "heisenberg_xxz", profiles.power_law(3.0), coupling=0.4, seed=0)
    o = opalg.single_site(opalg.pauli("x"), 4)
    full = locality.subset_evolution_error(o, h, range(8), 0.7)
    assert full.exact < 1e-12 and full.bound == 0.0

    zero_t = locality.subset_evolution_error(o, h, range(1, 7), 0.0)
    assert zero_t.exact < 1e-14 and zero_t.bound == 0.0

    rep = locality.subset_evolution_error(o, h, range(2, 7), 0.5)
    assert rep.exact <= rep.bound
    assert rep.distance == 3.0

    with pytest.raises(SubsetViolation):
        locality.subset_evolution_error(o, h, range(0, 3), 0.5)


def test_infinite_range_mode_requires_convolution_constant():
    h = chain.build_chain(6, "ising_zz", profiles.finite_range(1), coupling=1.0, seed=0)
    env = locality.envelope_for_chain(h, mode="infinite_range")
    with pytest.raises(MissingParam):
        locality.lr_envelope(env, 0.5, 2)


def test_truncated_envelope_monotone():
    h = chain.build_chain(10, "heisenberg_xxz", profiles.power_law(3.0), coupling=0.5, seed=2)
    htc = chain.truncate(h, [0], [9], 2)
    env = _env(htc)
    vals_t = [locality.lr_envelope(env, t, 4) for t in (0.0, 0.2, 0.5, 1.0, 5.0)]
    assert all(a <= b + 1e-15 for a, b in zip(vals_t, vals_t[1:]))
    vals_r = [locality.lr_envelope(env, 0.5, r) for r in range(1, 9)]
    assert all(a >= b - 1e-15 for a, b in zip(vals_r, vals_r[1:]))

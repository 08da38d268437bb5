import math

import numpy as np
import pytest

from gibbschain import profiles
from gibbschain.errors import NonConvergentTail


def test_profile_shapes_and_normalization():
    for p in (
        profiles.finite_range(2),
        profiles.power_law(3.0),
        profiles.stretched_exp(0.5, 1.0),
        profiles.exponential(0.7),
    ):
        assert p(0) == 1.0
        xs = np.linspace(0, 12, 49)
        vals = p(xs)
        assert np.all(np.diff(vals) <= 1e-15), p.kind


def test_power_law_flat_inside_unit_distance():
    p = profiles.power_law(3.0)
    assert p(0.3) == 1.0
    assert p(3) == pytest.approx(1.0 / 27.0, rel=1e-15)


def test_tail_sum_matches_brute_force():
    from scipy.integrate import quad

    rng_cases = [
        (profiles.power_law(3.0), 1, 0),
        (profiles.power_law(3.0), 4, 1),
        (profiles.exponential(0.7), 2, 0),
        (profiles.exponential(0.7), 3, 1),
        (profiles.stretched_exp(0.5, 1.0), 1, 0),
        (profiles.stretched_exp(0.5, 1.0), 2, 1),
        (profiles.finite_range(4), 2, 1),
    ]
    for p, ell, z in rng_cases:
        hi = 200_000
        xs = np.arange(ell, hi + 1, dtype=float)
        brute = float(np.sum(xs**z * p(xs)))
        # midpoint integral approximates the discarded tail to O(hi^-3)
        if p.kind == "power_law":
            s = p.alpha - z
            brute += (hi + 0.5) ** (1.0 - s) / (s - 1.0)
        else:
            brute += quad(lambda t: t**z * p(t), hi + 0.5, np.inf, limit=200)[0]
        got = profiles.tail_sum(p, ell, z)
        assert got == pytest.approx(brute, rel=1e-8), (p.kind, ell, z)


def test_geometric_tail_closed_form():
    # jbar(x) = 2^-x: tail sum from ell is 2^(1-ell), ratio 2/ell, worst 2
    p = profiles.exponential(math.log(2.0))
    rep = profiles.verify_decay_condition(p, 2.0, 0, 30)
    assert rep.passed
    assert rep.worst_ratio == pytest.approx(2.0, rel=1e-12)


def test_inverse_square_first_moment_diverges():
    p = profiles.power_law(2.0)
    with pytest.raises(NonConvergentTail):
        profiles.tail_sum(p, 1, 1)
    with pytest.raises(NonConvergentTail):
        profiles.verify_decay_condition(p, 10.0, 1, 5)


def test_cubic_power_law_ratio_against_partial_sums():
    # frozen from an independent 2e6-term partial sum
    p = profiles.power_law(3.0)
    rep = profiles.verify_decay_condition(p, 1.21, 0, 50)
    assert rep.passed
    assert rep.worst_ratio == pytest.approx(1.202056903159, rel=1e-9)
    rep_tight = profiles.verify_decay_condition(p, 1.20, 0, 50)
    assert not rep_tight.passed


def test_measure_gamma_covers_both_moments():
    p = profiles.power_law(3.0)
    g = profiles.measure_gamma(p, 12)
    for z in (0, 1):
        assert profiles.verify_decay_condition(p, g, z, 12).passed
    # z=1 dominates for the cubic power law
    assert g == pytest.approx(math.pi**2 / 6.0, rel=1e-10)


def test_finite_range_vacuous_beyond_cutoff():
    p = profiles.finite_range(2)
    rep = profiles.verify_decay_condition(p, 10.0, 0, 10)
    assert rep.passed  # points with jbar = 0 are vacuous

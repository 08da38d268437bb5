"""Independent closed-form references used by sweeps and the test suite.

These deliberately avoid the dense operator algebra: the transfer-matrix
product below touches only 2x2 matrices, so it can cross-check the dense
Gibbs-state correlation path without sharing code with it.
"""

from __future__ import annotations

import math

import numpy as np


def ising_transfer_correlation(n, coupling, beta, i, j):
    """Connected zz correlation of the open classical Ising chain.

    Spins sigma = +-1 with weight exp(beta * coupling * sum sigma_k sigma_k+1)
    (couplings enter with a plus sign; the customary minus is absorbed into
    the energy).  Sites are 0-based, i < j < n.
    """
    if not (0 <= i < j < n):
        raise ValueError("need 0 <= i < j < n")
    bj = beta * coupling
    t = np.array([[math.exp(bj), math.exp(-bj)], [math.exp(-bj), math.exp(bj)]])
    s = np.array([[1.0, 0.0], [0.0, -1.0]])
    ones = np.ones(2)

    def chain_product(insertions):
        vec = ones.copy()
        for site in range(n):
            if site in insertions:
                vec = s @ vec
            if site < n - 1:
                vec = t @ vec
        return ones @ vec

    z = chain_product(set())
    two = chain_product({i, j}) / z
    one_i = chain_product({i}) / z
    one_j = chain_product({j}) / z
    return two - one_i * one_j


def ising_correlation_length(beta, coupling):
    """Closed-form correlation length -1/log(tanh(beta*J)) of the open chain."""
    t = math.tanh(beta * abs(coupling))
    return -1.0 / math.log(t)


def fit_exponential_decay(distances, values, floor=1e-14):
    """Least-squares fit of values ~ A * exp(-d / xi) on log scale.

    Rows with |value| below the floor are excluded (and reported); returns
    (xi, log_amplitude, n_used, excluded_indices).
    """
    distances = np.asarray(distances, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    mask = values > floor
    excluded = tuple(int(k) for k in np.nonzero(~mask)[0])
    if mask.sum() < 2:
        return math.nan, math.nan, int(mask.sum()), excluded
    slope, intercept = np.polyfit(distances[mask], np.log(values[mask]), 1)
    xi = -1.0 / slope if slope < 0 else math.inf
    return float(xi), float(intercept), int(mask.sum()), excluded

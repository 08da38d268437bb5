"""Information-propagation envelopes and their certification.

Three envelope modes are provided for the commutator norm ||[O_Z(t), O_Z']||:

* ``finite_range`` - the factorial light-cone envelope for interaction
  length d_H, (2/k) |Z| (2 g k |t|)^n0 / n0!  with  n0 = floor(r/d_H + 1);
* ``infinite_range`` - the convolution-constant envelope
  (2/gg) |Z||Z'| (exp(2 gg |t|) - 1) jbar(r);
* ``truncated`` - the packaged envelope for interaction-truncated chains,
  |Z||Z'| min(2, exp(v|t|) C min(exp(-r/(2 l0)), jbar(r))).

Every returned value is additionally capped by the trivial commutator bound
2 ||O_Z|| ||O_Z'||.  ``lr_certify`` sweeps a (t, r) grid and compares the
envelope against exactly computed commutator norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import opalg
from .chain import ChainHamiltonian, TruncatedHamiltonian, set_distance
from .errors import DimensionCap, MissingParam, SubsetViolation
from .profiles import DecayProfile


def convolution_constant(profile: DecayProfile, n: int) -> float:
    """Smallest c with sum_i0 jbar(d(i,i0)) jbar(d(i0,i')) <= c jbar(d(i,i'))
    on an n-site chain, by exhaustive evaluation over all site pairs.

    Profiles that vanish at finite distance admit no finite constant once the
    chain is long enough; math.inf is returned in that case.
    """
    if n < 2:
        raise ValueError("need at least two sites")
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :]).astype(float)
    jm = profile(dist)
    conv = jm @ jm
    worst = 0.0
    for i in range(n):
        for j in range(n):
            denom = jm[i, j]
            if denom == 0.0:
                if conv[i, j] > 0.0:
                    return math.inf
                continue
            worst = max(worst, conv[i, j] / denom)
    return worst


@dataclass(frozen=True)
class LRParams:
    """Constants entering the propagation envelopes."""

    g: float
    k: int
    conv_const: float
    range_cutoff: int | None = None
    block_len: int | None = None

    @property
    def velocity(self):
        return max(2.0 * self.g * self.k, 2.0 * self.conv_const)

    @property
    def prefactor(self):
        if math.isinf(self.conv_const):
            return 2.0 / self.k
        return 2.0 * (1.0 / self.k + 1.0 / self.conv_const)


@dataclass(frozen=True)
class LREnvelope:
    mode: str  # finite_range | infinite_range | truncated
    params: LRParams
    profile: DecayProfile

    def __post_init__(self):
        if self.mode not in ("finite_range", "infinite_range", "truncated"):
            raise ValueError(f"unknown envelope mode {self.mode!r}")


def envelope_for_chain(h, mode=None) -> LREnvelope:
    """Measure the envelope constants of a chain or truncated chain."""
    if isinstance(h, TruncatedHamiltonian):
        mode = mode or "truncated"
        base = h.base
        block_len = h.block_len
    else:
        base = h
        block_len = None
        if mode is None:
            mode = "finite_range" if base.profile.is_finite_range else "infinite_range"
    conv = convolution_constant(base.profile, base.n)
    params = LRParams(
        g=base.profile.g,
        k=base.k,
        conv_const=conv,
        range_cutoff=base.profile.range_cutoff,
        block_len=block_len,
    )
    return LREnvelope(mode=mode, params=params, profile=base.profile)


def combined_lightcone(env: LREnvelope, t, r):
    """min(2, exp(v|t|) F0(r)) with F0 per mode; the per-pair envelope core."""
    p = env.params
    if env.mode == "finite_range":
        if p.range_cutoff is None:
            raise MissingParam("finite_range mode needs range_cutoff")
        f0 = p.prefactor * math.exp(-r / p.range_cutoff)
    elif env.mode == "infinite_range":
        f0 = p.prefactor * env.profile(r)
    else:
        if p.block_len is None:
            raise MissingParam("truncated mode needs block_len")
        f0 = p.prefactor * min(math.exp(-r / (2.0 * p.block_len)), env.profile(r))
    if t == 0:
        return min(2.0, f0)
    if math.isinf(p.velocity):
        return 2.0
    exponent = p.velocity * abs(t)
    if f0 > 0 and exponent + math.log(f0) > math.log(2.0):
        return 2.0
    return min(2.0, math.exp(exponent) * f0) if f0 > 0 else 0.0


def lr_envelope(env: LREnvelope, t, r, size_z=1, size_zp=1, norm_z=1.0, norm_zp=1.0):
    """Envelope on ||[O_Z(t), O_Z']|| at time t and support distance r >= 1.

    The mode-specific form is evaluated and the trivial commutator bound
    2 ||O_Z|| ||O_Z'|| is applied on top.
    """
    if r < 1:
        raise ValueError("supports must be disjoint (r >= 1)")
    p = env.params
    norms = norm_z * norm_zp
    trivial = 2.0 * norms
    if env.mode == "finite_range":
        if p.range_cutoff is None:
            raise MissingParam("finite_range mode needs range_cutoff")
        n0 = math.floor(r / p.range_cutoff + 1)
        if t == 0:
            return 0.0
        # factorial in log space; n0 can be large for wide separations
        log_core = n0 * math.log(2.0 * p.g * p.k * abs(t)) - gammaln(n0 + 1)
        raw = (2.0 / p.k) * norms * size_z * math.exp(log_core)
        return min(raw, trivial)
    if env.mode == "infinite_range":
        if math.isinf(p.conv_const):
            raise MissingParam("profile admits no finite convolution constant")
        jb = env.profile(r)
        exponent = 2.0 * p.conv_const * abs(t)
        if jb > 0 and exponent + math.log(jb) > 710.0:
            return trivial
        raw = (2.0 / p.conv_const) * norms * size_z * size_zp * math.expm1(exponent) * jb
        return min(raw, trivial)
    raw = norms * size_z * size_zp * combined_lightcone(env, t, r)
    return min(raw, trivial)


def _hamiltonian_matrix(h):
    if isinstance(h, (ChainHamiltonian, TruncatedHamiltonian)):
        return h.matrix()
    return np.asarray(h)


def exact_commutator_norm(o_z, o_zp, h, t, dim_cap=opalg.DEFAULT_DIM_CAP):
    """Spectral norm of [O_Z(t), O_Z'] by dense evolution."""
    h_mat = _hamiltonian_matrix(h)
    if h_mat.shape[0] > dim_cap:
        raise DimensionCap(f"dimension {h_mat.shape[0]} exceeds cap {dim_cap}")
    n = int(round(math.log(h_mat.shape[0], o_z.local_dim)))
    a = opalg.embed(o_z, n).matrix
    b = opalg.embed(o_zp, n).matrix
    at = opalg.evolve(a, h_mat, t)
    comm = at @ b - b @ at
    # i[A, B] is Hermitian for Hermitian A, B
    return float(np.max(np.abs(np.linalg.eigvalsh(1j * comm))))


@dataclass(frozen=True)
class SubsetEvolutionReport:
    exact: float
    bound: float
    distance: float


def subset_evolution_error(
    o_local, h, window, t, env: LREnvelope | None = None
) -> SubsetEvolutionReport:
    """Error of evolving with the window-restricted Hamiltonian.

    exact = || O(H, t) - O(H_window, t) ||; the envelope combines the
    interaction tail across the window boundary with the light-cone factor
    evaluated at half the boundary distance.
    """
    if not isinstance(h, (ChainHamiltonian, TruncatedHamiltonian)):
        raise TypeError("need a chain to form subset Hamiltonians")
    chain = h.as_chain() if isinstance(h, TruncatedHamiltonian) else h
    window = sorted(int(s) for s in window)
    support = set(o_local.sites)
    if not support <= set(window):
        raise SubsetViolation("window must contain the operator support")
    if env is None:
        env = envelope_for_chain(h, mode="infinite_range" if not chain.profile.is_finite_range else None)

    n = chain.n
    o_full = opalg.embed(o_local, n).matrix
    h_full = chain.matrix()
    h_win = chain.subset_matrix(tuple(window))
    a = opalg.evolve(o_full, h_full, t)
    b = opalg.evolve(o_full, h_win, t)
    exact = opalg.opnorm(a - b)

    complement = [s for s in range(n) if s not in window]
    if not complement:
        return SubsetEvolutionReport(exact=exact, bound=0.0, distance=math.inf)
    ell = set_distance(complement, support)
    p = chain.profile
    g_tilde = p.g * p.gamma**2 * p(1)
    norm_o = opalg.opnorm(o_local)
    lightcone = combined_lightcone(env, t, ell / 2.0)
    bound = (
        abs(t)
        * len(support)
        * norm_o
        * (0.5 * p.g * p.gamma**2 * ell**2 * p(ell / 2.0) + g_tilde * chain.k * lightcone)
    )
    return SubsetEvolutionReport(exact=exact, bound=float(bound), distance=float(ell))


@dataclass(frozen=True)
class CertificationRow:
    t: float
    r: int
    exact: float
    envelope: float


@dataclass(frozen=True)
class CertificationReport:
    rows: tuple
    violations: tuple
    max_ratio: float

    @property
    def passed(self):
        return len(self.violations) == 0


def lr_certify(
    h,
    env: LREnvelope,
    t_grid,
    r_grid,
    base_site=None,
    probe="x",
    slack=1e-10,
    dim_cap=opalg.DEFAULT_DIM_CAP,
) -> CertificationReport:
    """Certify the envelope against exact commutators on a (t, r) grid.

    Probes are single-site Paulis at base_site and base_site + r.  For
    truncated chains the probes stay inside the interior blocks, where the
    truncated envelope applies.
    """
    h_mat = _hamiltonian_matrix(h)
    if h_mat.shape[0] > dim_cap:
        raise DimensionCap(f"dimension {h_mat.shape[0]} exceeds cap {dim_cap}")
    if isinstance(h, TruncatedHamiltonian):
        interior_lo = h.blocks[1][0]
        interior_hi = h.blocks[-2][-1]
        n = h.n
    else:
        interior_lo, interior_hi, n = 0, h.n - 1, h.n
    i0 = interior_lo if base_site is None else base_site
    op = opalg.pauli(probe)

    rows = []
    violations = []
    max_ratio = 0.0
    o_a = opalg.embed(opalg.single_site(op, i0), n).matrix
    for t in t_grid:
        a_t = opalg.evolve(o_a, h_mat, t)
        for r in r_grid:
            j = i0 + r
            if j > interior_hi:
                continue
            b = opalg.embed(opalg.single_site(op, j), n).matrix
            comm = a_t @ b - b @ a_t
            exact = float(np.max(np.abs(np.linalg.eigvalsh(1j * comm))))
            bound = lr_envelope(env, t, r)
            rows.append(CertificationRow(t=float(t), r=int(r), exact=exact, envelope=bound))
            if exact > bound + slack * 2.0:
                violations.append(rows[-1])
            if bound > 0:
                max_ratio = max(max_ratio, exact / bound)
    return CertificationReport(
        rows=tuple(rows), violations=tuple(violations), max_ratio=max_ratio
    )

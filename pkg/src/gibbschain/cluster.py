"""Doubled-space correlation machinery and inclusion-exclusion operators.

Bipartite correlations of a Gibbs state become single traces on the tensor
square of the Hilbert space: with O^(0) = O x 1, O^(1) = O x 1 - 1 x O and
O^(+) = O x 1 + 1 x O,

    Cor(O_X, O_Y) = tr[(rho x rho) O_X^(0) O_Y^(1)].

Traces of (+)-operator strings against O_X^(0) O_Y^(1) vanish whenever the
support collection splits into two parts, one holding X and one holding Y,
with disjoint unions; that is what makes inclusion-exclusion over boundary
bonds kill every cluster that fails to connect X to Y.

The inclusion-exclusion ("zeroth-order removing") operator over a bond set S
is the alternating sum of Gibbs exponentials

    G_S = sum_{lam in {0,1}^S} (-1)^(|S| - |lam|) exp(beta * (H - sum_(1-lam_j) h_j)),

computed branch by branch; on the doubled space every branch factorizes as
a tensor square, so traces against O_X^(0) O_Y^(1) reduce to single-space
traces and no doubled matrix needs to be materialized for them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import opalg, qbp
from .chain import ChainHamiltonian, TruncatedHamiltonian
from .errors import (
    CapExceeded,
    DimensionCap,
    NotCommuting,
    NotDisconnected,
    NotPSD,
    NotUnitNorm,
    OverlappingSupports,
)

DOUBLED_DIM_CAP = 4096


@dataclass(frozen=True)
class DoubledOperator:
    """Operator on the tensor square of the n-site space."""

    base: opalg.DenseOperator
    kind: str  # plus | zero | one
    matrix: np.ndarray
    n: int


def double(op: opalg.DenseOperator, kind, n, dim_cap=DOUBLED_DIM_CAP) -> DoubledOperator:
    """O^(+), O^(0) or O^(1) of an operator embedded on n sites."""
    if kind not in ("plus", "zero", "one"):
        raise ValueError(f"unknown doubling kind {kind!r}")
    dim = op.local_dim**n
    if dim**2 > dim_cap:
        raise DimensionCap(f"doubled dimension {dim**2} exceeds cap {dim_cap}")
    full = opalg.embed(op, n).matrix
    eye = np.eye(dim)
    if kind == "zero":
        mat = np.kron(full, eye)
    elif kind == "plus":
        mat = np.kron(full, eye) + np.kron(eye, full)
    else:
        mat = np.kron(full, eye) - np.kron(eye, full)
    return DoubledOperator(base=op, kind=kind, matrix=mat, n=n)


def swap_matrix(dim):
    """Factor-exchange unitary on the doubled space."""
    s = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            s[i * dim + j, j * dim + i] = 1.0
    return s


@dataclass(frozen=True)
class PsiOperator:
    """The probe O_X^(0) O_Y^(1), kept in factorized form."""

    o_x: opalg.DenseOperator
    o_y: opalg.DenseOperator
    n: int

    @property
    def x_full(self):
        return opalg.embed(self.o_x, self.n).matrix

    @property
    def y_full(self):
        return opalg.embed(self.o_y, self.n).matrix

    def matrix(self, dim_cap=DOUBLED_DIM_CAP):
        dim = self.o_x.local_dim**self.n
        if dim**2 > dim_cap:
            raise DimensionCap(f"doubled dimension {dim**2} exceeds cap {dim_cap}")
        x0 = double(self.o_x, "zero", self.n, dim_cap).matrix
        y1 = double(self.o_y, "one", self.n, dim_cap).matrix
        return x0 @ y1

    def expectation(self, a, b=None):
        """tr[Psi (A x B)] via single-space traces; B defaults to A."""
        b = a if b is None else b
        ox, oy = self.x_full, self.y_full
        return complex(
            np.trace(ox @ oy @ a) * np.trace(b) - np.trace(ox @ a) * np.trace(oy @ b)
        )


def psi(o_x: opalg.DenseOperator, o_y: opalg.DenseOperator, n, norm_tol=1e-10) -> PsiOperator:
    """Build the correlation probe; requires disjoint supports and unit norms."""
    if set(o_x.sites) & set(o_y.sites):
        raise OverlappingSupports("probe factors must have disjoint supports")
    for op, name in ((o_x, "O_X"), (o_y, "O_Y")):
        if abs(opalg.opnorm(op) - 1.0) > norm_tol:
            raise NotUnitNorm(f"{name} must have unit spectral norm")
    return PsiOperator(o_x=o_x, o_y=o_y, n=n)


# ---------------------------------------------------------------------------
# disconnected-support traces


def supports_split(x_sites, y_sites, z_supports):
    """True when {X, Z_1.., Y} splits into X-part and Y-part with disjoint unions.

    Connectivity by pairwise overlap: the split exists iff the overlap graph
    leaves X and Y in different components.
    """
    sets = [set(x_sites)] + [set(z) for z in z_supports] + [set(y_sites)]
    n_nodes = len(sets)
    seen = {0}
    frontier = [0]
    while frontier:
        cur = frontier.pop()
        for other in range(n_nodes):
            if other not in seen and sets[cur] & sets[other]:
                seen.add(other)
                frontier.append(other)
    return (n_nodes - 1) not in seen


@dataclass(frozen=True)
class DisconnectedTraceResult:
    value: complex
    disconnected: bool
    scale: float


def disconnected_trace(
    z_ops, o_x: opalg.DenseOperator, o_y: opalg.DenseOperator, n,
    dim_cap=DOUBLED_DIM_CAP, require=False,
) -> DisconnectedTraceResult:
    """tr[ prod_i Z_i^(+) . O_X^(0) O_Y^(1) ] with its disconnection check.

    When the support collection is disconnected the value is an exact zero
    up to rounding; the caller gets the measured value, the checker verdict
    and the natural scale (product of operator norms times the doubled
    dimension) to compare against.
    """
    if set(o_x.sites) & set(o_y.sites):
        raise OverlappingSupports("X and Y must be disjoint")
    dim = o_x.local_dim**n
    if dim**2 > dim_cap:
        raise DimensionCap(f"doubled dimension {dim**2} exceeds cap {dim_cap}")
    acc = np.eye(dim * dim, dtype=complex)
    scale = float(dim * dim)
    for z in z_ops:
        acc = acc @ double(z, "plus", n, dim_cap).matrix
        scale *= 2.0 * opalg.opnorm(z)
    probe = PsiOperator(o_x=o_x, o_y=o_y, n=n)
    acc = acc @ probe.matrix(dim_cap)
    scale *= 2.0 * opalg.opnorm(o_x) * opalg.opnorm(o_y)
    value = complex(np.trace(acc))
    ok = supports_split(o_x.sites, o_y.sites, [z.sites for z in z_ops])
    if require and not ok:
        raise NotDisconnected("support collection connects X to Y")
    return DisconnectedTraceResult(value=value, disconnected=ok, scale=scale)


# ---------------------------------------------------------------------------
# inclusion-exclusion operators


def lambda_branches(m):
    """All (lambda, sign) pairs of the m-bond inclusion-exclusion sum."""
    out = []
    for lam in itertools.product((0, 1), repeat=m):
        sign = (-1) ** (m - sum(lam))
        out.append((lam, sign))
    return tuple(out)


@dataclass(frozen=True)
class BondSelector:
    indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


@dataclass(frozen=True)
class ClusterOperator:
    matrix: np.ndarray
    beta: float
    bond_count: int
    lambda_plan: tuple


def _resolve_bonds(h, bonds):
    """(H matrix, list of bond matrices) from the accepted input forms."""
    if isinstance(h, TruncatedHamiltonian):
        h_mat = h.matrix()
        if isinstance(bonds, BondSelector):
            mats = [h.bond_matrix(s) for s in bonds.indices]
        else:
            mats = [np.asarray(b) for b in bonds]
        return h_mat, mats
    h_mat = h.matrix() if isinstance(h, ChainHamiltonian) else np.asarray(h)
    return h_mat, [np.asarray(b) for b in bonds]


def g_operator(h, bonds, beta, branch_cap=64, dim_cap=opalg.DEFAULT_DIM_CAP) -> ClusterOperator:
    """Inclusion-exclusion sum over the given bonds (single-space form).

    For an empty bond set this is exp(beta H); for one bond it equals
    exp(beta H) - exp(beta (H - h_s)).
    """
    h_mat, mats = _resolve_bonds(h, bonds)
    if h_mat.shape[0] > dim_cap:
        raise DimensionCap(f"dimension {h_mat.shape[0]} exceeds cap {dim_cap}")
    m = len(mats)
    if 2**m > branch_cap:
        raise CapExceeded(f"2^{m} branches exceed cap {branch_cap}")
    plan = lambda_branches(m)
    out = np.zeros_like(h_mat, dtype=complex)
    for lam, sign in plan:
        h_lam = h_mat - sum((1 - l) * b for l, b in zip(lam, mats)) if m else h_mat
        out = out + sign * opalg.herm_expm(h_lam, beta)
    return ClusterOperator(matrix=out, beta=float(beta), bond_count=m, lambda_plan=plan)


def g_operator_nested(h, bonds, beta):
    """The same operator by the recursive difference definition (test oracle)."""
    h_mat, mats = _resolve_bonds(h, bonds)

    def rec(mat, remaining):
        if not remaining:
            return opalg.herm_expm(mat, beta)
        head, *tail = remaining
        return rec(mat, tail) - rec(mat - head, tail)

    return rec(h_mat, mats)


# ---------------------------------------------------------------------------
# the all-bond identity and the commuting-case chain


@dataclass(frozen=True)
class IdentityResidualReport:
    residual: float
    cor_abs: float
    psi_g_over_z: float
    trace_norm_ratio: float | None
    z2: float


def correlation_identity_residual(
    h_tc: TruncatedHamiltonian, o_x, o_y, beta, dim_cap=opalg.DEFAULT_DIM_CAP
) -> IdentityResidualReport:
    """Residual of tr[Psi (e^{beta H+} - G_all)] = 0 over all boundary bonds.

    Works entirely through the tensor-square factorization: each
    inclusion-exclusion branch contributes single-space traces only.  Also
    reports |Cor| and |tr(Psi G)| / Z^2, whose agreement is the usable form
    of the identity, and for commuting chains the ratio to the trace-norm
    majorant 2 ||G||_1 / Z^2.
    """
    n = h_tc.n
    if h_tc.base.dim > dim_cap:
        raise DimensionCap("single-space dimension exceeds cap")
    probe = psi(o_x, o_y, n)
    h_mat = h_tc.matrix()
    bonds = [h_tc.bond_matrix(s) for s in range(h_tc.q + 1)]
    m = len(bonds)

    total = 0.0 + 0.0j
    g_trace = 0.0
    full_term = None
    for lam, sign in lambda_branches(m):
        h_lam = h_mat - sum((1 - l) * b for l, b in zip(lam, bonds))
        e_lam = opalg.herm_expm(h_lam, beta)
        contrib = probe.expectation(e_lam)
        total += sign * contrib
        g_trace += sign * float(np.trace(e_lam).real) ** 2
        if all(lam):
            full_term = contrib

    z = float(np.trace(opalg.herm_expm(h_mat, beta)).real)
    z2 = z * z
    # tr[Psi e^{beta H+}] equals the all-ones branch
    residual = abs(full_term - total) / z2

    cor_abs = abs(full_term) / z2  # Cor(O_X, O_Y) in factorized form
    psi_g = abs(total) / z2

    ratio = None
    if _kept_bundles_commute(h_tc):
        # commuting case: G is positive, so ||G||_1 = tr G, computable per branch
        ratio = cor_abs / max(2.0 * g_trace / z2, 1e-300)
    return IdentityResidualReport(
        residual=float(residual),
        cor_abs=float(cor_abs),
        psi_g_over_z=float(psi_g),
        trace_norm_ratio=ratio,
        z2=z2,
    )


def _kept_bundles_commute(h_tc: TruncatedHamiltonian, tol=1e-12):
    bundles = list(h_tc.v_terms) + list(h_tc.h_terms)
    mats, supports = [], []
    for b in bundles:
        if not b:
            continue
        support = tuple(sorted({s for t in b for s in t.sites}))
        mats.append((b, support))
    for (b1, s1), (b2, s2) in itertools.combinations(mats, 2):
        if not (set(s1) & set(s2)):
            continue
        union = tuple(sorted(set(s1) | set(s2)))
        pos = {s: a for a, s in enumerate(union)}
        d = h_tc.local_dim
        dim = d ** len(union)
        m1 = np.zeros((dim, dim), dtype=complex)
        m2 = np.zeros((dim, dim), dtype=complex)
        for t in b1:
            m1 += opalg.embed_matrix(t.matrix, [pos[s] for s in t.sites], len(union), d)
        for t in b2:
            m2 += opalg.embed_matrix(t.matrix, [pos[s] for s in t.sites], len(union), d)
        comm = m1 @ m2 - m2 @ m1
        scale = max(np.linalg.norm(m1, 2) * np.linalg.norm(m2, 2), 1e-300)
        if np.linalg.norm(comm, 2) / scale > tol:
            return False
    return True


@dataclass(frozen=True)
class CommutingBoundReport:
    exact_cor: float
    product_bound: float
    final_bound: float
    bond_norms: tuple

    @property
    def passed(self):
        return (
            self.exact_cor <= self.product_bound + 1e-10
            and self.product_bound <= self.final_bound + 1e-10
        )


def commuting_chain_bound(
    h_tc: TruncatedHamiltonian, beta, o_x=None, o_y=None, dim_cap=opalg.DEFAULT_DIM_CAP
) -> CommutingBoundReport:
    """Correlation bound chain for mutually commuting truncated chains.

    exact <= 2 prod_s (1 - e^{-beta 2||h_s||}) <= 2 exp(-R / (l0 e^{2 beta gt}))
    with doubled bond norms 2||h_s|| <= 2 gt and R = q * l0.
    """
    if not _kept_bundles_commute(h_tc):
        raise NotCommuting("bound chain needs mutually commuting bundles")
    n = h_tc.n
    if o_x is None:
        o_x = opalg.single_site(opalg.pauli("z"), h_tc.blocks[0][-1])
    if o_y is None:
        o_y = opalg.single_site(opalg.pauli("z"), h_tc.blocks[-1][0])
    state = opalg.gibbs(h_tc.matrix(), beta, dim_cap=dim_cap)
    exact = abs(opalg.correlation(state, o_x, o_y))

    bond_norms = tuple(h_tc.bond_norm(s) for s in range(h_tc.q + 1))
    product_bound = 2.0 * math.prod(-math.expm1(-2.0 * beta * h) for h in bond_norms)
    g_tilde = h_tc.g_tilde
    final_bound = 2.0 * math.exp(
        -h_tc.separation / (h_tc.block_len * math.exp(2.0 * beta * g_tilde))
    )
    return CommutingBoundReport(
        exact_cor=float(exact),
        product_bound=float(product_bound),
        final_bound=float(final_bound),
        bond_norms=bond_norms,
    )


# ---------------------------------------------------------------------------
# standalone operator lemmas as checkable properties


@dataclass(frozen=True)
class PositivityShiftReport:
    min_eig: float
    passed: bool


def verify_positivity_shift(a, b, zeta, tol=1e-10) -> PositivityShiftReport:
    """Minimum eigenvalue of e^{A + B + zeta} - e^{A} for PSD A, B.

    The difference is guaranteed positive for zeta >= ||A||; the report's
    ``passed`` records whether the measured minimum clears -tol.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    for name, mat in (("A", a), ("B", b)):
        opalg.require_hermitian(mat, name)
        if np.min(np.linalg.eigvalsh(mat)) < -1e-12 * max(1.0, np.linalg.norm(mat, 2)):
            raise NotPSD(f"{name} must be positive semidefinite")
    diff = math.exp(zeta) * opalg.herm_expm(a + b) - opalg.herm_expm(a)
    min_eig = float(np.min(np.linalg.eigvalsh(diff)))
    return PositivityShiftReport(min_eig=min_eig, passed=min_eig >= -tol)


@dataclass(frozen=True)
class WeightedProductReport:
    lhs: float
    rhs: float
    passed: bool


def verify_weighted_product(
    w_ops, rho_full, psi_vec, x_sites, n, local_dim=2, tol=1e-10
) -> WeightedProductReport:
    """Weighted-product trace inequality for commuting PSD factors on X.

    lhs = <psi| tr_X(rho prod W_j) |psi> must not exceed
    rhs = <psi| tr_X(rho prod (W_j + 1)) |psi> * prod ||W_j|| / (||W_j|| + 1)
    for any PSD rho and any state psi on the complement of X.
    """
    x_sites = tuple(sorted(int(s) for s in x_sites))
    w_ops = [np.asarray(w, dtype=complex) for w in w_ops]
    for i, w in enumerate(w_ops):
        opalg.require_hermitian(w, f"W_{i}")
        if np.min(np.linalg.eigvalsh(w)) < -1e-12 * max(1.0, np.linalg.norm(w, 2)):
            raise NotPSD(f"W_{i} must be positive semidefinite")
    for w1, w2 in itertools.combinations(w_ops, 2):
        if np.linalg.norm(w1 @ w2 - w2 @ w1, 2) > 1e-12 * max(
            1.0, np.linalg.norm(w1, 2) * np.linalg.norm(w2, 2)
        ):
            raise NotCommuting("weight factors must commute pairwise")
    rho_full = np.asarray(rho_full, dtype=complex)
    if np.min(np.linalg.eigvalsh(rho_full)) < -1e-12 * max(
        1.0, np.linalg.norm(rho_full, 2)
    ):
        raise NotPSD("rho must be positive semidefinite")

    keep = [s for s in range(n) if s not in x_sites]
    psi_vec = np.asarray(psi_vec, dtype=complex)
    psi_vec = psi_vec / np.linalg.norm(psi_vec)

    def bracket(mats):
        prod = rho_full.copy()
        for w in mats:
            prod = prod @ opalg.embed_matrix(w, x_sites, n, local_dim)
        reduced = opalg.partial_trace(prod, keep, n, local_dim)
        return float(np.real(psi_vec.conj() @ reduced @ psi_vec))

    lhs = bracket(w_ops)
    dim_x = local_dim ** len(x_sites)
    rhs = bracket([w + np.eye(dim_x) for w in w_ops])
    for w in w_ops:
        nw = float(np.max(np.abs(np.linalg.eigvalsh(w))))
        rhs *= nw / (nw + 1.0)
    scale = max(abs(lhs), abs(rhs), 1.0)
    return WeightedProductReport(lhs=lhs, rhs=rhs, passed=lhs <= rhs + tol * scale)


# ---------------------------------------------------------------------------
# block-localized inclusion-exclusion (the Gamma pair)


@dataclass(frozen=True)
class GammaPairReport:
    psi_trace_gamma: float
    psi_trace_gamma_local: float
    psi_trace_decay: float
    factorization_residual: float
    diff_trace_norm: float | None
    m: int
    beta: float
    z2: float


def gamma_pair(
    h_tc: TruncatedHamiltonian,
    centers,
    beta,
    o_x,
    o_y,
    scheme=None,
    tau_steps=32,
    integrator="cf4",
    branch_cap=64,
    compute_diff=False,
    doubled_dim_cap=DOUBLED_DIM_CAP,
    eps=1e-9,
) -> GammaPairReport:
    """Alternating Gibbs sum over center bonds and its block-local approximant.

    Gamma removes the zeroth order of every center bond from the doubled
    Gibbs exponential; Gamma-tilde replaces the exact removal operators by
    window-localized ones, after which the probe trace factorizes into the
    product form that drives the distance decay.  All traces go through the
    tensor-square factorization; the doubled matrices are materialized only
    when compute_diff requests the trace-norm distance.
    """
    n = h_tc.n
    m = centers.m
    if 2**m > branch_cap:
        raise CapExceeded(f"2^{m} branches exceed cap {branch_cap}")
    probe = psi(o_x, o_y, n)
    h_mat = h_tc.matrix()
    bonds = [centers.bond_matrix(j) for j in range(m)]

    # window-localized removal operators, one per center bond
    local_ops = []
    for j in range(m):
        op = qbp.build_bp_localized(
            h_tc, centers.centers[j], centers.blocks[j + 1], beta,
            scheme=scheme, tau_steps=tau_steps, integrator=integrator, eps=eps,
        )
        local_ops.append(opalg.embed(op.op, n).matrix)

    h0 = h_mat - sum(bonds) if m else h_mat
    e0 = opalg.herm_expm(h0, beta)

    tr_gamma = 0.0 + 0.0j
    tr_gamma_local = 0.0 + 0.0j
    branch_mats = {} if compute_diff else None
    for lam, sign in lambda_branches(m):
        h_lam = h_mat - sum((1 - l) * b for l, b in zip(lam, bonds)) if m else h_mat
        e_lam = opalg.herm_expm(h_lam, beta)
        tr_gamma += sign * probe.expectation(e_lam)
        b_lam = np.eye(h_mat.shape[0], dtype=complex)
        for j, l in enumerate(lam):
            if l:
                b_lam = b_lam @ local_ops[j]
        m_lam = b_lam @ e0 @ b_lam.conj().T
        tr_gamma_local += sign * probe.expectation(m_lam)
        if compute_diff:
            branch_mats[lam] = (e_lam, m_lam)

    # product form: expand prod_j (K_j (x) K_j - 1) over subsets, K_j = B_j^dag B_j
    k_ops = [o.conj().T @ o for o in local_ops]
    tr_product_form = 0.0 + 0.0j
    for subset in itertools.product((0, 1), repeat=m):
        sign = (-1) ** (m - sum(subset))
        kb = np.eye(h_mat.shape[0], dtype=complex)
        for j, inc in enumerate(subset):
            if inc:
                kb = kb @ k_ops[j]
        tr_product_form += sign * probe.expectation(kb @ e0)

    z = float(np.trace(opalg.herm_expm(h_mat, beta)).real)
    z2 = z * z
    scale = max(abs(tr_gamma_local), abs(tr_product_form), z2 * 1e-30)
    fact_residual = abs(tr_gamma_local - tr_product_form) / scale

    diff_tn = None
    if compute_diff:
        dim = h_mat.shape[0]
        if dim * dim > doubled_dim_cap:
            raise DimensionCap("doubled space too large for the trace-norm diff")
        acc = np.zeros((dim * dim, dim * dim), dtype=complex)
        for lam, sign in lambda_branches(m):
            e_lam, m_lam = branch_mats[lam]
            acc += sign * (np.kron(e_lam, e_lam) - np.kron(m_lam, m_lam))
        diff_tn = float(np.sum(np.abs(np.linalg.eigvalsh(acc))))

    return GammaPairReport(
        psi_trace_gamma=abs(tr_gamma),
        psi_trace_gamma_local=abs(tr_gamma_local),
        psi_trace_decay=abs(tr_gamma_local) / z2,
        factorization_residual=float(fact_residual),
        diff_trace_norm=diff_tn,
        m=m,
        beta=float(beta),
        z2=z2,
    )

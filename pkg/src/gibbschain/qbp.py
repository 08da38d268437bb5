"""Quantum belief propagation operators.

For a split H = H_env + h of a Hamiltonian into an environment and one
positive bond, the belief propagation operator Phi satisfies

    exp(beta H) = Phi exp(beta H_env) Phi^dag,

and is constructed as an ordered product over the coupling parameter tau of
exponentials of the filtered, Heisenberg-evolved bond

    phi(tau) = (beta/2) * integral dt f_beta(t) h(H_env + tau h, t).

The weight f_beta is the explicit kernel (2/(pi beta)) log((e^{pi|t|/beta}+1)
/(e^{pi|t|/beta}-1)): nonnegative, even, unit integral, with an integrable
log singularity at t = 0 and an exp(-pi|t|/beta) tail.  The t-integral is
discretized once per beta by a fixed quadrature scheme (Gauss panels away
from the origin, geometrically refined panels into the singularity), and the
same scheme is reused for every operator-valued integral.  In the eigenbasis
of the instantaneous Hamiltonian the node sum acts as a spectral filter
F(omega) = sum_j w_j f_beta(t_j) cos(omega t_j) on the Bohr frequencies,
which is how phi is evaluated.

Truncating the construction to a window around the bond gives an operator
supported on the window only; the distance dependence of the truncation
error is certified against a fully explicit envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import zeta

from . import opalg
from .chain import TruncatedHamiltonian
from .errors import (
    GeometryError,
    NonConvergence,
    PreconditionViolated,
    SingularPoint,
    ToleranceUnreachable,
)
from .locality import LRParams, convolution_constant

# first absolute moment of the filter is FILTER_FIRST_MOMENT * beta
FILTER_FIRST_MOMENT = 7.0 * zeta(3) / math.pi**3


def filter_value(beta, t):
    """Filter kernel value and its exponential tail majorant at time t.

    Returns (value, tail_bound) with tail_bound = (4/(pi beta))/(e^{pi|t|/beta}-1),
    which dominates the value for every t != 0.
    """
    t = float(t)
    if t == 0.0:
        raise SingularPoint("filter kernel diverges (integrably) at t = 0")
    x = math.pi * abs(t) / beta
    em1 = math.expm1(x)
    value = (2.0 / (math.pi * beta)) * math.log1p(2.0 / em1)
    tail = (4.0 / (math.pi * beta)) / em1
    return value, tail


def _filter_values(beta, ts):
    x = math.pi * np.abs(ts) / beta
    return (2.0 / (math.pi * beta)) * np.log1p(2.0 / np.expm1(x))


@dataclass(frozen=True)
class QuadratureScheme:
    """Node/weight discretization of integrals against the filter kernel.

    ``sum_j weights[j] * f_beta(nodes[j]) * F(nodes[j])`` approximates
    ``integral f_beta(t) F(t) dt`` for integrands F oscillating no faster
    than resolve_omega.  Nodes are symmetric about 0 and exclude it.
    """

    beta: float
    eps: float
    nodes: np.ndarray
    weights: np.ndarray
    t_max: float
    resolve_omega: float

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})

    @property
    def filter_at_nodes(self):
        hit = self._cache.get("fvals")
        if hit is None:
            hit = _filter_values(self.beta, self.nodes)
            self._cache["fvals"] = hit
        return hit

    def normalization(self):
        return float(np.sum(self.weights * self.filter_at_nodes))

    def first_moment(self):
        return float(np.sum(self.weights * np.abs(self.nodes) * self.filter_at_nodes))

    def moment(self, power):
        return float(
            np.sum(self.weights * np.abs(self.nodes) ** power * self.filter_at_nodes)
        )

    # -- spectral filter -----------------------------------------------------

    def spectral_filter_direct(self, omega):
        """sum_j w_j f_beta(t_j) cos(omega t_j), the exact node sum."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        coef = self.weights * self.filter_at_nodes
        out = np.empty(omega.shape, dtype=float)
        flat = omega.ravel()
        step = max(1, 8_000_000 // max(self.nodes.size, 1))
        for lo in range(0, flat.size, step):
            chunk = flat[lo : lo + step]
            out.ravel()[lo : lo + step] = np.cos(np.outer(chunk, self.nodes)) @ coef
        return out

    def _spline(self):
        hit = self._cache.get("spline")
        if hit is None:
            m4 = max(self.moment(4), 1e-12)
            # cubic interpolation error ~ (5/384) h^4 max|F''''|, F'''' <= m4
            h = (1e-12 * 384.0 / (5.0 * m4)) ** 0.25
            n_grid = int(min(max(self.resolve_omega / h, 4_000), 600_000))
            grid = np.linspace(0.0, self.resolve_omega * 1.01, n_grid)
            vals = self.spectral_filter_direct(grid)
            hit = CubicSpline(grid, vals)
            self._cache["spline"] = hit
        return hit

    def spectral_filter(self, omega, method="spline"):
        """Filter transfer function at Bohr frequencies omega."""
        if method == "direct":
            return self.spectral_filter_direct(omega)
        omega = np.asarray(omega, dtype=float)
        a = np.abs(omega)
        if a.max(initial=0.0) > self.resolve_omega * 1.005:
            return self.spectral_filter_direct(omega)
        return self._spline()(a)

    def refined(self, factor=2.0):
        """Companion scheme with the tolerance tightened by ``factor``."""
        return filter_quadrature(
            self.beta, self.eps / factor, resolve_omega=self.resolve_omega
        )


def _gauss_panel(a, b, order):
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def filter_quadrature(
    beta,
    eps,
    resolve_omega=192.0,
    panel_order=16,
    max_nodes=60_000,
) -> QuadratureScheme:
    """Build the quadrature scheme for integrals against the filter kernel.

    The time cutoff T = (beta/pi) log(1 + 8/(pi eps)) keeps the discarded
    tail mass below eps/2; panels of width ~panel_order/resolve_omega keep
    Gauss quadrature accurate for integrands oscillating up to resolve_omega;
    geometric refinement into the origin handles the log singularity.
    """
    if not (0.0 < eps <= 1e-2):
        raise ValueError("eps must lie in (0, 1e-2]")
    t_max = (beta / math.pi) * math.log(1.0 + 8.0 / (math.pi * eps))
    w0 = min(1.4 * panel_order / resolve_omega, t_max / 4.0)

    edges = [w0]
    while edges[-1] < t_max:
        edges.append(min(edges[-1] + w0, t_max))
    inner = [w0]
    for _ in range(54):  # leftover mass below w0 * 2^-54 is ~1e-16 relative
        inner.append(inner[-1] / 2.0)
    panels = [(inner[i + 1], inner[i]) for i in range(len(inner) - 1)]
    panels += [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]

    xs, ws = [], []
    for a, b in panels:
        order = panel_order if (b - a) > w0 / 4 else max(8, panel_order // 2)
        x, w = _gauss_panel(a, b, order)
        xs.append(x)
        ws.append(w)
    x_pos = np.concatenate(xs)
    w_pos = np.concatenate(ws)
    if 2 * x_pos.size > max_nodes:
        raise ToleranceUnreachable(
            f"{2 * x_pos.size} nodes exceed the budget of {max_nodes}"
        )
    nodes = np.concatenate([-x_pos[::-1], x_pos])
    weights = np.concatenate([w_pos[::-1], w_pos])
    scheme = QuadratureScheme(
        beta=float(beta),
        eps=float(eps),
        nodes=nodes,
        weights=weights,
        t_max=t_max,
        resolve_omega=float(resolve_omega),
    )
    if abs(scheme.normalization() - 1.0) > eps:
        raise ToleranceUnreachable("scheme failed its own normalization target")
    return scheme


# ---------------------------------------------------------------------------
# the ordered-product construction


@dataclass(frozen=True)
class BPOperator:
    """Belief propagation operator with its construction record."""

    op: opalg.DenseOperator
    beta: float
    tau_steps: int
    scheme: QuadratureScheme
    bond_norm: float
    phi_norm_max: float
    window: tuple | None = None
    bond_index: int | None = None
    reconstruction_residual: float | None = None
    integrator: str = "cf4"

    @property
    def matrix(self):
        return self.op.matrix

    @property
    def sites(self):
        return self.op.sites

    def embedded_matrix(self, n):
        return opalg.embed(self.op, n).matrix

    def norm(self):
        return opalg.opnorm(self.matrix)


def _phi_tau(h_tau, h_bond, beta, scheme, filter_method):
    evals, vecs = opalg.hermitian_eig(h_tau)
    hb = vecs.conj().T @ h_bond @ vecs
    om = evals[:, None] - evals[None, :]
    filt = scheme.spectral_filter(om, method=filter_method)
    phi = (0.5 * beta) * (vecs @ (filt * hb) @ vecs.conj().T)
    return 0.5 * (phi + phi.conj().T)


_CF4_C1 = 0.5 - math.sqrt(3.0) / 6.0
_CF4_C2 = 0.5 + math.sqrt(3.0) / 6.0
_CF4_A1 = 0.25 + math.sqrt(3.0) / 6.0
_CF4_A2 = 0.25 - math.sqrt(3.0) / 6.0


def _ordered_exponential(h_env, h_bond, beta, scheme, tau_steps, integrator, filter_method):
    """Product integration of the tau-ordered exponential, later factors left.

    Returns (Phi, max over evaluations of ||phi||).
    """
    dim = h_env.shape[0]
    # real inputs stay in the real BLAS path; dtype promotes only if phi is complex
    u = np.eye(dim)
    dtau = 1.0 / tau_steps
    phi_max = 0.0

    def phi_at(tau):
        nonlocal phi_max
        p = _phi_tau(h_env + tau * h_bond, h_bond, beta, scheme, filter_method)
        phi_max = max(phi_max, float(np.max(np.abs(np.linalg.eigvalsh(p)))))
        return p

    for k in range(tau_steps):
        t0 = k * dtau
        if integrator == "midpoint":
            u = opalg.herm_expm(phi_at(t0 + 0.5 * dtau), dtau) @ u
        elif integrator == "cf4":
            a1 = phi_at(t0 + _CF4_C1 * dtau)
            a2 = phi_at(t0 + _CF4_C2 * dtau)
            x1 = dtau * (_CF4_A1 * a1 + _CF4_A2 * a2)
            x2 = dtau * (_CF4_A2 * a1 + _CF4_A1 * a2)
            u = opalg.herm_expm(x2) @ opalg.herm_expm(x1) @ u
        else:
            raise ValueError(f"unknown integrator {integrator!r}")
    return u, phi_max


def reconstruction_residual(phi_mat, h_env, h_bond, beta):
    """|| Phi e^{beta H_env} Phi^dag - e^{beta H} || / || e^{beta H} ||."""
    e_env = opalg.herm_expm(h_env, beta)
    e_full = opalg.herm_expm(h_env + h_bond, beta)
    diff = phi_mat @ e_env @ phi_mat.conj().T - e_full
    return float(opalg.opnorm(diff) / opalg.opnorm(e_full))


def build_bp(
    h_env,
    h_bond,
    beta,
    scheme=None,
    tau_steps=32,
    integrator="cf4",
    residual_gate=None,
    max_refinements=3,
    sites=None,
    local_dim=2,
    filter_method="spline",
    eps=1e-9,
) -> BPOperator:
    """Belief propagation operator for the split H = H_env + h_bond.

    h_env and h_bond are matrices on a common space.  With a residual_gate,
    the reconstruction residual is computed and the construction refined
    (tau_steps x2, scheme eps /2) until the gate is met; NonConvergence is
    raised when refinements are exhausted.  Without a gate the residual is
    left uncomputed (callers doing difference certifications do not need it).
    """
    h_env = np.asarray(h_env)
    h_bond = np.asarray(h_bond)
    if scheme is None:
        scheme = filter_quadrature(beta, eps)
    bond_norm = float(np.max(np.abs(np.linalg.eigvalsh(h_bond)))) if np.any(h_bond) else 0.0
    n_sites = int(round(math.log(h_env.shape[0], local_dim)))
    sites = tuple(range(n_sites)) if sites is None else tuple(sites)

    if bond_norm == 0.0:
        op = opalg.DenseOperator(sites, np.eye(h_env.shape[0], dtype=complex), local_dim)
        return BPOperator(
            op=op, beta=beta, tau_steps=tau_steps, scheme=scheme, bond_norm=0.0,
            phi_norm_max=0.0, reconstruction_residual=0.0, integrator=integrator,
        )

    steps = tau_steps
    attempt = 0
    while True:
        u, phi_max = _ordered_exponential(
            h_env, h_bond, beta, scheme, steps, integrator, filter_method
        )
        residual = None
        if residual_gate is not None:
            residual = reconstruction_residual(u, h_env, h_bond, beta)
            if residual > residual_gate:
                if attempt >= max_refinements:
                    raise NonConvergence(
                        f"residual {residual:.3e} above gate {residual_gate:.1e} "
                        f"after {attempt} refinements"
                    )
                attempt += 1
                steps *= 2
                scheme = scheme.refined()
                continue
        op = opalg.DenseOperator(sites, u, local_dim)
        return BPOperator(
            op=op, beta=beta, tau_steps=steps, scheme=scheme, bond_norm=bond_norm,
            phi_norm_max=phi_max, reconstruction_residual=residual, integrator=integrator,
        )


# ---------------------------------------------------------------------------
# localized construction on truncated chains


def _window_split_matrices(h_tc: TruncatedHamiltonian, cut, window, excluded_cuts=()):
    """Environment and bond matrices on the window subspace.

    The bond is the bundle of kept terms crossing ``cut``; the environment is
    every kept term inside the window crossing neither ``cut`` nor any cut in
    ``excluded_cuts``.
    """
    window = tuple(sorted(int(s) for s in window))
    if window != tuple(range(window[0], window[-1] + 1)):
        raise GeometryError("window must be a contiguous interval")
    wset = set(window)
    pos = {s: a for a, s in enumerate(window)}
    d = h_tc.local_dim
    dim = d ** len(window)
    env = np.zeros((dim, dim), dtype=complex)
    bond = np.zeros((dim, dim), dtype=complex)
    bond_sites = set()
    for t in h_tc.kept_terms:
        if t.crosses(cut):
            if not set(t.sites) <= wset:
                raise GeometryError("bond bundle leaks outside the window")
            bond += opalg.embed_matrix(t.matrix, [pos[s] for s in t.sites], len(window), d)
            bond_sites |= set(t.sites)
            continue
        if not set(t.sites) <= wset:
            continue
        if any(t.crosses(c) for c in excluded_cuts):
            continue
        env += opalg.embed_matrix(t.matrix, [pos[s] for s in t.sites], len(window), d)
    if np.abs(env.imag).max(initial=0.0) == 0.0:
        env = np.ascontiguousarray(env.real)
    if np.abs(bond.imag).max(initial=0.0) == 0.0:
        bond = np.ascontiguousarray(bond.real)
    return env, bond, window


def build_bp_localized(
    h_tc: TruncatedHamiltonian,
    cut,
    window,
    beta,
    scheme=None,
    tau_steps=32,
    integrator="cf4",
    excluded_cuts=(),
    filter_method="spline",
    eps=1e-9,
    residual_gate=None,
    max_refinements=3,
) -> BPOperator:
    """BP operator for the bond at ``cut``, built from the window subset only."""
    env, bond, window = _window_split_matrices(h_tc, cut, window, excluded_cuts)
    op = build_bp(
        env, bond, beta, scheme=scheme, tau_steps=tau_steps, integrator=integrator,
        sites=window, local_dim=h_tc.local_dim, filter_method=filter_method, eps=eps,
        residual_gate=residual_gate, max_refinements=max_refinements,
    )
    return replace(op, window=window)


def build_bond_bp(h_tc: TruncatedHamiltonian, s, beta, **kw) -> BPOperator:
    """Exact-split BP operator for boundary bundle s, environment = rest of chain."""
    cut = h_tc.blocks[s][-1]
    op = build_bp_localized(h_tc, cut, tuple(range(h_tc.n)), beta, **kw)
    return replace(op, bond_index=s, window=None)


def build_truncated_bp(h_tc: TruncatedHamiltonian, s, r, beta, **kw) -> BPOperator:
    """Window-truncated BP operator for boundary bundle s, window radius r."""
    cut = h_tc.blocks[s][-1]
    lo = max(0, cut - r)
    hi = min(h_tc.n - 1, cut + r)
    op = build_bp_localized(h_tc, cut, tuple(range(lo, hi + 1)), beta, **kw)
    return replace(op, bond_index=s)


# ---------------------------------------------------------------------------
# locality certification


@dataclass(frozen=True)
class ThetaFunction:
    """Affine rate function theta0 + theta1 * beta with positive coefficients."""

    theta0: float
    theta1: float

    def __post_init__(self):
        if self.theta0 <= 0 or self.theta1 <= 0:
            raise ValueError("both coefficients must be positive")

    def __call__(self, beta):
        return self.theta0 + self.theta1 * beta


def locality_decay_envelope(theta: ThetaFunction, profile, block_len, beta, r):
    """Calibrated envelope e^{Theta} min(e^{-r/(l0 Theta)}, jbar(r/3)^(1/Theta))."""
    th = theta(beta)
    jb = profile(r / 3.0)
    if jb == 0.0:
        return 0.0
    log_val = th + min(-r / (block_len * th), math.log(jb) / th)
    if log_val > 709.0:
        return math.inf
    return math.exp(log_val)


@dataclass(frozen=True)
class BPLocalityReport:
    exact: float
    explicit_bound: float
    theta_bound: float | None
    r: int
    beta: float
    vacuous: bool
    f0_value: float

    @property
    def passed(self):
        return self.exact <= self.explicit_bound + 1e-12


def _truncated_f0(params: LRParams, profile, block_len, x):
    return params.prefactor * min(math.exp(-x / (2.0 * block_len)), profile(x))


def bp_locality_error(
    h_tc: TruncatedHamiltonian,
    s,
    r,
    beta,
    scheme=None,
    tau_steps=32,
    integrator="cf4",
    theta: ThetaFunction | None = None,
    phi_full: BPOperator | None = None,
    filter_method="spline",
    eps=1e-9,
) -> BPLocalityReport:
    """Measured || Phi_s - Phi_s,window || against the explicit envelope.

    Requires r > 6 * block_len and a subcritical light-cone value
    F0(r/3) <= 1.  When the window swallows the whole chain the two
    constructions coincide term by term and the error is exactly zero
    (reported as vacuous).
    """
    base = h_tc.base
    p = base.profile
    l0 = h_tc.block_len
    if r <= 6 * l0:
        raise PreconditionViolated(f"need r > 6*block_len = {6 * l0}, got {r}")
    conv = convolution_constant(p, base.n)
    params = LRParams(g=p.g, k=base.k, conv_const=conv, block_len=l0)
    f0 = _truncated_f0(params, p, l0, r / 3.0)
    if f0 > 1.0:
        raise PreconditionViolated(f"F0(r/3) = {f0:.3g} exceeds 1")

    g_tilde = h_tc.g_tilde
    c_pref = params.prefactor
    v = params.velocity
    explicit = math.exp(beta * g_tilde / 2.0) * (
        beta * p.g * p.gamma**2 * r**2
        * (1.0 + base.k * g_tilde * beta / (2.0 * math.pi**3))
        * p(r / 3.0)
        + (base.k * g_tilde * beta**2 / (2.0 * math.pi**3))
        * (
            9.0 * g_tilde * math.sqrt(c_pref * f0)
            + 72.0 * g_tilde * (f0 / c_pref) ** (math.pi / (4.0 * v * beta))
        )
    )
    theta_bound = (
        locality_decay_envelope(theta, p, l0, beta, r) if theta is not None else None
    )

    cut = h_tc.blocks[s][-1]
    lo, hi = max(0, cut - r), min(h_tc.n - 1, cut + r)
    if lo == 0 and hi == h_tc.n - 1:
        return BPLocalityReport(
            exact=0.0, explicit_bound=float(explicit), theta_bound=theta_bound,
            r=int(r), beta=float(beta), vacuous=True, f0_value=float(f0),
        )

    kw = dict(
        scheme=scheme, tau_steps=tau_steps, integrator=integrator,
        filter_method=filter_method, eps=eps,
    )
    if phi_full is None:
        phi_full = build_bond_bp(h_tc, s, beta, **kw)
    phi_win = build_truncated_bp(h_tc, s, r, beta, **kw)
    diff = phi_full.matrix - phi_win.embedded_matrix(h_tc.n)
    exact = opalg.opnorm(diff)
    return BPLocalityReport(
        exact=exact, explicit_bound=float(explicit), theta_bound=theta_bound,
        r=int(r), beta=float(beta), vacuous=False, f0_value=float(f0),
    )


def calibrate_theta(reports, profile, block_len, margin=1.05) -> ThetaFunction:
    """Smallest affine rate function whose envelope dominates measured errors.

    reports is an iterable of BPLocalityReport (or anything with .exact, .r,
    .beta).  For each slope on a log grid the minimal intercept is found by
    bisection; the feasible pair minimizing theta0 + theta1 wins.
    """
    pts = [(rep.r, rep.beta, rep.exact) for rep in reports if rep.exact > 0]
    if not pts:
        return ThetaFunction(1.0, 1.0)

    def dominates(th0, th1):
        theta = ThetaFunction(th0, th1)
        return all(
            locality_decay_envelope(theta, profile, block_len, b, r) >= e * margin
            for r, b, e in pts
        )

    best = None
    for th1 in np.geomspace(0.05, 20.0, 25):
        lo, hi = 1e-3, 1e3
        if not dominates(hi, th1):
            continue
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if dominates(mid, th1):
                hi = mid
            else:
                lo = mid
        cand = (hi, th1)
        if best is None or sum(cand) < sum(best):
            best = cand
    if best is None:
        raise NonConvergence("no affine rate function dominates the measurements")
    return ThetaFunction(*best)


# ---------------------------------------------------------------------------
# products of BP operators along a center decomposition


@dataclass(frozen=True)
class BPChainReport:
    exact_diff: float
    bound: float | None
    factor_diffs: tuple
    telescoping_bound: float
    m: int
    beta: float


def bp_chain(
    h_tc: TruncatedHamiltonian,
    centers,
    beta,
    scheme=None,
    tau_steps=32,
    integrator="cf4",
    theta: ThetaFunction | None = None,
    filter_method="spline",
    eps=1e-9,
):
    """Junction BP product versus its window-localized approximation.

    The m+1 junctions between consecutive blocks of the center decomposition
    are removed one at a time; factor j is built either from the full
    remaining Hamiltonian (exact) or from the window between the neighboring
    centers (localized).  Returns the product difference, the per-factor
    differences, the telescoping majorant from factor norms, and the
    calibrated envelope 2 m e^{2 m beta gtilde} G_beta(half_width).
    """
    blocks = centers.blocks
    cpoints = centers.centers
    m = centers.m
    n = h_tc.n
    kw = dict(scheme=scheme, tau_steps=tau_steps, integrator=integrator,
              filter_method=filter_method, eps=eps)

    cuts = [blocks[j][-1] for j in range(m + 1)]
    exact_ops, local_ops = [], []
    for j, cut in enumerate(cuts):
        exact_ops.append(
            build_bp_localized(h_tc, cut, tuple(range(n)), beta,
                               excluded_cuts=tuple(cuts[:j]), **kw)
        )
        if j == 0:
            window = tuple(range(0, cpoints[0] + 1))
        elif j == m:
            window = tuple(range(cpoints[m - 1] + 1, n))
        else:
            window = tuple(range(cpoints[j - 1] + 1, cpoints[j] + 1))
        local_ops.append(build_bp_localized(h_tc, cut, window, beta, **kw))

    full_exact = np.eye(h_tc.base.dim, dtype=complex)
    full_local = np.eye(h_tc.base.dim, dtype=complex)
    for j in range(m + 1):
        full_exact = full_exact @ exact_ops[j].matrix
        full_local = full_local @ local_ops[j].embedded_matrix(n)
    exact_diff = opalg.opnorm(full_exact - full_local)

    factor_diffs = tuple(
        opalg.opnorm(exact_ops[j].matrix - local_ops[j].embedded_matrix(n))
        for j in range(m + 1)
    )
    norms_exact = [opalg.opnorm(o.matrix) for o in exact_ops]
    norms_local = [opalg.opnorm(o.matrix) for o in local_ops]
    telescoping = 0.0
    for j in range(m + 1):
        left = math.prod(norms_local[:j])
        right = math.prod(norms_exact[j + 1 :])
        telescoping += left * factor_diffs[j] * right

    bound = None
    if theta is not None:
        g_env = locality_decay_envelope(
            theta, h_tc.base.profile, h_tc.block_len, beta, centers.half_width
        )
        bound = 2.0 * m * math.exp(2.0 * m * h_tc.g_tilde * beta) * g_env

    return BPChainReport(
        exact_diff=exact_diff,
        bound=bound,
        factor_diffs=factor_diffs,
        telescoping_bound=float(telescoping),
        m=m,
        beta=float(beta),
    ), exact_ops, local_ops

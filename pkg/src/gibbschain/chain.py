"""1D long-range Hamiltonians: construction, truncation, block geometry.

A chain is a list of positive local terms on n qudits.  Terms are generated
from a decay profile, shifted to positive semidefinite at build time (the
shift amount is stored, so shift-invariant quantities such as correlation
functions can be cross-checked against unshifted physics), and the coupling
scale ``g`` and tail constant ``gamma`` are measured from the generated terms
rather than assumed.

Sites are indexed 0..n-1.  Distances are shortest-path distances on the chain
graph (adjacent sites at distance 1, overlapping sets at distance 0).  For
block partitions, the quantity that multiplies block counts is the separation
width ``R = q * block_len`` = number of sites strictly between the terminal
regions, one less than the graph distance between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import opalg
from .errors import (
    BadPartition,
    CutoffError,
    DecayViolation,
    GeometryError,
    InvalidSpec,
    Overlap,
    OutOfRange,
)
from .profiles import DecayProfile, measure_gamma

GENERATORS = ("ising_zz", "heisenberg_xxz", "random_two_site")


@dataclass(frozen=True)
class LocalTerm:
    """Positive local term h_Z with its support and stored energy shift."""

    sites: tuple
    matrix: np.ndarray
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))

    @property
    def norm(self):
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))

    @property
    def diameter(self):
        return max(self.sites) - min(self.sites)

    def crosses(self, cut):
        """True if the support straddles the bond between sites cut, cut+1."""
        return min(self.sites) <= cut < max(self.sites)


def site_distance(i, j):
    return abs(int(i) - int(j))


def set_distance(a, b):
    """Shortest-path distance between two site sets; 0 when they intersect."""
    sa, sb = set(a), set(b)
    if sa & sb:
        return 0
    return min(abs(i - j) for i in sa for j in sb)


def _term_matrix_norm(mat):
    return float(np.max(np.abs(np.linalg.eigvalsh(mat))))


def _shift_psd(raw):
    """h -> h + ||h|| 1, making the term positive semidefinite."""
    shift = _term_matrix_norm(raw)
    dim = raw.shape[0]
    return raw + shift * np.eye(dim), shift


@dataclass(frozen=True)
class ChainHamiltonian:
    """Finite chain of positive local terms with its measured decay data."""

    n: int
    local_dim: int
    k: int
    terms: tuple
    profile: DecayProfile
    generator: str = "custom"
    seed: int | None = None
    coupling: float = 1.0
    _matrix_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def g(self):
        return self.profile.g

    @property
    def gamma(self):
        return self.profile.gamma

    @property
    def dim(self):
        return self.local_dim**self.n

    def matrix(self):
        """Full-space Hamiltonian matrix (cached)."""
        return self.subset_matrix(tuple(range(self.n)))

    def subset_matrix(self, sites, subspace=False):
        """Sum of terms fully inside ``sites``.

        With subspace=True the matrix lives on the ordered subset's own
        tensor space; otherwise it is embedded into the full chain.
        """
        sites = tuple(sorted(int(s) for s in sites))
        key = (sites, subspace)
        hit = self._matrix_cache.get(key)
        if hit is not None:
            return hit
        if subspace:
            pos = {s: a for a, s in enumerate(sites)}
            dim = self.local_dim ** len(sites)
            out = np.zeros((dim, dim), dtype=complex)
            for t in self.terms:
                if set(t.sites) <= set(sites):
                    local_sites = [pos[s] for s in t.sites]
                    out += opalg.embed_matrix(t.matrix, local_sites, len(sites), self.local_dim)
        else:
            out = np.zeros((self.dim, self.dim), dtype=complex)
            for t in self.terms:
                if set(t.sites) <= set(sites):
                    out += opalg.embed_matrix(t.matrix, t.sites, self.n, self.local_dim)
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = np.ascontiguousarray(out.real)
        self._matrix_cache[key] = out
        return out

    def one_site_energy(self, i):
        return sum(t.norm for t in self.terms if i in t.sites)

    def replace_terms(self, terms):
        return ChainHamiltonian(
            n=self.n,
            local_dim=self.local_dim,
            k=self.k,
            terms=tuple(terms),
            profile=self.profile,
            generator=self.generator,
            seed=self.seed,
            coupling=self.coupling,
        )


def _pair_terms(n, profile, coupling, generator, seed, local_dim, anisotropy):
    rng = np.random.default_rng(seed)
    sx, sy, sz = opalg.pauli("x"), opalg.pauli("y"), opalg.pauli("z")
    zz = np.kron(sz, sz).real
    xxz = (np.kron(sx, sx) + np.kron(sy, sy).real + anisotropy * zz).real
    terms = []
    for i in range(n):
        for j in range(i + 1, n):
            strength = coupling * profile(j - i)
            if strength == 0.0:
                continue
            if generator == "ising_zz":
                raw = strength * zz
            elif generator == "heisenberg_xxz":
                raw = strength * xxz
            else:
                m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
                m = 0.5 * (m + m.conj().T)
                raw = (strength / _term_matrix_norm(m)) * m
            shifted, shift = _shift_psd(raw)
            terms.append(LocalTerm((i, j), shifted, shift))
    return terms


def build_chain(
    n,
    generator,
    profile: DecayProfile,
    coupling=1.0,
    seed=None,
    local_dim=2,
    anisotropy=1.5,
    k=2,
) -> ChainHamiltonian:
    """Generate a chain whose couplings follow the profile.

    The one-site coupling scale g is measured from the shifted terms as the
    larger of the worst pair ratio J_{ii'} / jbar(d) and the worst one-site
    energy, so both coupling invariants hold by construction.  gamma is
    measured from the profile up to ell = n.
    """
    if n < 2:
        raise InvalidSpec("need at least two sites")
    if local_dim < 2:
        raise InvalidSpec("local dimension must be >= 2")
    if k > n:
        raise InvalidSpec("term support cap k exceeds chain length")
    if generator not in GENERATORS:
        raise InvalidSpec(f"unknown generator {generator!r}")
    if local_dim != 2:
        raise InvalidSpec("bundled generators are qubit-only")

    terms = _pair_terms(n, profile, coupling, generator, seed, local_dim, anisotropy)

    pair_strength = {}
    for t in terms:
        i, j = min(t.sites), max(t.sites)
        pair_strength[(i, j)] = pair_strength.get((i, j), 0.0) + t.norm
    worst_pair = 0.0
    for (i, j), s in pair_strength.items():
        jb = profile(j - i)
        if jb == 0.0:
            if s > 0.0:
                raise DecayViolation(f"coupling on {(i, j)} outside the profile range")
            continue
        worst_pair = max(worst_pair, s / jb)
    one_site = max(
        (sum(t.norm for t in terms if i in t.sites) for i in range(n)), default=0.0
    )
    g = max(worst_pair, one_site)
    gamma = measure_gamma(profile, n)

    chain = ChainHamiltonian(
        n=n,
        local_dim=local_dim,
        k=k,
        terms=tuple(terms),
        profile=profile.with_constants(g=g, gamma=gamma),
        generator=generator,
        seed=seed,
        coupling=coupling,
    )
    # defensive re-check of the decay envelope on the built chain
    for (i, j), s in pair_strength.items():
        if s > g * profile(j - i) * (1 + 1e-12):
            raise DecayViolation(f"pair {(i, j)} exceeds g * jbar")
    return chain


def coupling_strength(h: ChainHamiltonian, i, j):
    """Summed norm of all terms containing both sites."""
    if i == j:
        raise Overlap("coupling strength needs two distinct sites")
    for s in (i, j):
        if s < 0 or s >= h.n:
            raise OutOfRange(f"site {s} outside 0..{h.n - 1}")
    return sum(t.norm for t in h.terms if i in t.sites and j in t.sites)


# ---------------------------------------------------------------------------
# block interaction norms


@dataclass(frozen=True)
class BlockInteraction:
    exact: float
    bound: float
    distance: int


def block_interaction_norm(h, region_a, region_b) -> BlockInteraction:
    """Summed norm of terms joining two disjoint regions, with its envelope.

    exact is the sum of term norms over terms touching both regions (an upper
    bound on the norm of their sum); bound is g * gamma^2 * r^2 * jbar(r).
    """
    terms = h.terms if isinstance(h, ChainHamiltonian) else h.kept_terms
    profile = h.profile if isinstance(h, ChainHamiltonian) else h.base.profile
    sa, sb = set(region_a), set(region_b)
    if sa & sb:
        raise Overlap("regions must be disjoint")
    r = set_distance(sa, sb)
    exact = sum(t.norm for t in terms if set(t.sites) & sa and set(t.sites) & sb)
    bound = profile.g * profile.gamma**2 * r**2 * profile(r)
    return BlockInteraction(exact=float(exact), bound=float(bound), distance=r)


# ---------------------------------------------------------------------------
# interaction truncation


@dataclass(frozen=True)
class TruncatedHamiltonian:
    """Chain with all couplings between non-adjacent blocks removed.

    blocks[0] and blocks[-1] are the terminal regions; the q interior blocks
    have width block_len each.  v_terms[s] collects the terms inside block s,
    h_terms[s] the boundary terms joining blocks s and s+1, dropped the terms
    removed by the truncation.
    """

    base: ChainHamiltonian
    blocks: tuple
    block_len: int
    v_terms: tuple
    h_terms: tuple
    dropped: tuple
    _matrix_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self):
        return self.base.n

    @property
    def local_dim(self):
        return self.base.local_dim

    @property
    def q(self):
        return len(self.blocks) - 2

    @property
    def separation(self):
        """R = q * block_len, the width of the region between the ends."""
        return self.q * self.block_len

    @property
    def g_tilde(self):
        """Uniform bound g * gamma^2 * jbar(1) on every boundary bundle."""
        p = self.base.profile
        return p.g * p.gamma**2 * p(1)

    @property
    def interaction_length(self):
        return 2 * self.block_len

    @property
    def kept_terms(self):
        out = []
        for bundle in self.v_terms:
            out.extend(bundle)
        for bundle in self.h_terms:
            out.extend(bundle)
        return tuple(out)

    def as_chain(self) -> ChainHamiltonian:
        """The truncated system repackaged as a plain chain."""
        return self.base.replace_terms(self.kept_terms)

    def matrix(self):
        return self.as_chain().matrix()

    def bond_matrix(self, s, embedded=True):
        """Boundary bundle h_s as a matrix (full space or its own support)."""
        bundle = self.h_terms[s]
        return bundle_matrix(bundle, self.n, self.local_dim, embedded)

    def bond_norm(self, s):
        mat = self.bond_matrix(s, embedded=False)
        if mat is None:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))

    def delta_matrix(self):
        """Sum of the dropped terms, embedded in the full space."""
        out = np.zeros((self.base.dim, self.base.dim), dtype=complex)
        for t in self.dropped:
            out += opalg.embed_matrix(t.matrix, t.sites, self.n, self.local_dim)
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = np.ascontiguousarray(out.real)
        return out


def bundle_matrix(bundle, n, local_dim=2, embedded=True):
    """Sum a term bundle; returns None for an empty bundle in subspace form."""
    if embedded:
        out = np.zeros((local_dim**n,) * 2, dtype=complex)
        for t in bundle:
            out += opalg.embed_matrix(t.matrix, t.sites, n, local_dim)
        if np.abs(out.imag).max(initial=0.0) == 0.0:
            out = np.ascontiguousarray(out.real)
        return out
    if not bundle:
        return None
    support = sorted({s for t in bundle for s in t.sites})
    pos = {s: a for a, s in enumerate(support)}
    dim = local_dim ** len(support)
    out = np.zeros((dim, dim), dtype=complex)
    for t in bundle:
        out += opalg.embed_matrix(t.matrix, [pos[s] for s in t.sites], len(support), local_dim)
    if np.abs(out.imag).max(initial=0.0) == 0.0:
        out = np.ascontiguousarray(out.real)
    return out


def truncate(h: ChainHamiltonian, x_sites, y_sites, block_len) -> TruncatedHamiltonian:
    """Drop every term that straddles non-adjacent blocks.

    X must be a prefix and Y a suffix of the chain, with the q = width/block_len
    interior blocks an even count >= 2.
    """
    x = sorted(int(s) for s in x_sites)
    y = sorted(int(s) for s in y_sites)
    if x != list(range(0, x[-1] + 1)):
        raise BadPartition("X must be a contiguous prefix of the chain")
    if y != list(range(y[0], h.n)):
        raise BadPartition("Y must be a contiguous suffix of the chain")
    width = y[0] - x[-1] - 1
    if width <= 0:
        raise BadPartition("X and Y must leave room between them")
    if block_len < 1 or width % block_len != 0:
        raise BadPartition(f"width {width} is not a multiple of block_len {block_len}")
    q = width // block_len
    if q % 2 != 0 or q < 2:
        raise BadPartition(f"interior block count q={q} must be an even integer >= 2")

    blocks = [tuple(x)]
    start = x[-1] + 1
    for _ in range(q):
        blocks.append(tuple(range(start, start + block_len)))
        start += block_len
    blocks.append(tuple(y))

    block_of = {}
    for b, sites in enumerate(blocks):
        for s in sites:
            block_of[s] = b

    v_terms = [[] for _ in blocks]
    h_terms = [[] for _ in range(len(blocks) - 1)]
    dropped = []
    for t in h.terms:
        touched = sorted({block_of[s] for s in t.sites})
        if len(touched) == 1:
            v_terms[touched[0]].append(t)
        elif len(touched) == 2 and touched[1] == touched[0] + 1:
            h_terms[touched[0]].append(t)
        else:
            dropped.append(t)

    return TruncatedHamiltonian(
        base=h,
        blocks=tuple(blocks),
        block_len=int(block_len),
        v_terms=tuple(tuple(b) for b in v_terms),
        h_terms=tuple(tuple(b) for b in h_terms),
        dropped=tuple(dropped),
    )


@dataclass(frozen=True)
class TruncationErrorReport:
    exact_delta_norm: float
    op_norm_bound: float
    exact_trace_norm_diff: float
    trace_norm_bound: float | None
    condition_value: float
    condition_ok: bool
    partition_function: float


def truncation_error_report(h: ChainHamiltonian, h_tc: TruncatedHamiltonian, beta) -> TruncationErrorReport:
    """Measured truncation errors against their closed-form envelopes.

    The operator-norm envelope gamma^2 g q l0^2 jbar(l0) is unconditional.
    The trace-norm envelope 3 beta gamma^2 g q l0^2 jbar(l0) * tr exp(beta H)
    requires beta * gamma^2 g q l0^2 jbar(l0) <= 1; if that fails the bound
    is reported as None with condition_ok False.
    """
    p = h.profile
    l0 = h_tc.block_len
    op_bound = p.gamma**2 * p.g * h_tc.q * l0**2 * p(l0)
    cond = beta * op_bound
    delta = h_tc.delta_matrix()
    exact_delta = float(np.max(np.abs(np.linalg.eigvalsh(delta)))) if h_tc.dropped else 0.0

    e_full = opalg.herm_expm(h.matrix(), scale=beta)
    e_trunc = opalg.herm_expm(h_tc.matrix(), scale=beta)
    diff_trace = float(np.sum(np.abs(np.linalg.eigvalsh(e_full - e_trunc))))
    z = float(np.trace(e_full).real)

    ok = cond <= 1.0
    return TruncationErrorReport(
        exact_delta_norm=exact_delta,
        op_norm_bound=float(op_bound),
        exact_trace_norm_diff=diff_trace,
        trace_norm_bound=3.0 * beta * op_bound * z if ok else None,
        condition_value=float(cond),
        condition_ok=ok,
        partition_function=z,
    )


# ---------------------------------------------------------------------------
# center-block decomposition


@dataclass(frozen=True)
class CenterDecomposition:
    """Interior split into m blocks of width 2*half_width with center bonds."""

    h_tc: TruncatedHamiltonian
    blocks: tuple
    centers: tuple
    bond_bundles: tuple
    half_width: int

    @property
    def m(self):
        return len(self.centers)

    def bond_matrix(self, j, embedded=True):
        return bundle_matrix(
            self.bond_bundles[j], self.h_tc.n, self.h_tc.local_dim, embedded
        )


def center_decomposition(
    h_tc: TruncatedHamiltonian, m, half_width, enforce_cutoff=True
) -> CenterDecomposition:
    """Split the region between the terminal blocks into m width-2l blocks.

    Each interior block carries the bundle of kept terms that straddle its
    center cut.  The locality error estimates behind the block construction
    need half_width > 6 * block_len; pass enforce_cutoff=False for desk-scale
    geometries where only the exact algebraic identities are exercised.
    """
    if m < 1:
        raise GeometryError("need at least one interior block")
    ell = int(half_width)
    x = h_tc.blocks[0]
    y = h_tc.blocks[-1]
    width = y[0] - x[-1] - 1
    if 2 * ell * m != width:
        raise GeometryError(
            f"m={m} blocks of width {2 * ell} do not cover the {width}-site interior"
        )
    if enforce_cutoff and ell <= 6 * h_tc.block_len:
        raise CutoffError(
            f"half_width {ell} must exceed 6 * block_len = {6 * h_tc.block_len}"
        )

    blocks = [x]
    centers = []
    bundles = []
    start = x[-1] + 1
    kept = h_tc.kept_terms
    for _ in range(m):
        sites = tuple(range(start, start + 2 * ell))
        blocks.append(sites)
        center = start + ell - 1
        centers.append(center)
        bundle = tuple(t for t in kept if t.crosses(center))
        for t in bundle:
            if not set(t.sites) <= set(sites):
                raise GeometryError("center bond bundle leaks outside its block")
        bundles.append(bundle)
        start += 2 * ell
    blocks.append(y)

    return CenterDecomposition(
        h_tc=h_tc,
        blocks=tuple(blocks),
        centers=tuple(centers),
        bond_bundles=tuple(bundles),
        half_width=ell,
    )

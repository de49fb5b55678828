"""Bound-state spectrum of the quadratic pencil gamma(z) = -z^2 P_M + z H - 1.

Null vectors of gamma(z) with |z| < 1 extend to rail-decaying
eigenstates of the full Hamiltonian.  Classification:

    confined    z on the unit circle (or real |z| > 1 pairs), zero
                boundary amplitude; equivalently D beta = E beta with
                B^T beta = 0.  Eigenvalues come in inverse pairs.
    evanescent  z in (-1, 1), nonzero boundary amplitude.
    half-bound  z = +-1, nonzero boundary amplitude (not normalizable).

The confined subspace is computed independently of the QEP (eigenspaces
of D intersected with ker B^T) and everything downstream works in the
deflated complement, where gamma_nc(z)^(-1) is obtained by direct
factorization.  The resolvent-form decomposition is built only as a
verification artifact.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as la

from .graphs import Graph, ChainCondition, chain_condition

REAL_TOL = 1e-9
UNIT_TOL = 1e-9
BOUNDARY_TOL = 1e-9
DEGENERACY_TOL = 1e-7


class PoleProximityError(ArithmeticError):
    def __init__(self, z, nearest):
        super().__init__(
            f"z={z:.12g} within tolerance of gamma eigenvalue {nearest:.12g}"
        )
        self.z = z
        self.nearest = nearest


class ClassificationAmbiguity(RuntimeError):
    """An eigenvalue sits within tolerance of two classification branches."""


class BoundClass(enum.Enum):
    CONFINED = "confined"
    CONFINED_PM1 = "confined_pm1"
    EVANESCENT = "evanescent"
    HALF_BOUND = "half_bound"


@dataclass(frozen=True)
class BoundState:
    """One physical bound (or half-bound) state.

    `x` is the amplitude vector on V(G); confined and evanescent states
    are normalized including the rail tails (alpha_j z^(x-1) on rail j),
    so |beta|^2 + |alpha|^2 / (1 - z^2) = 1.  Half-bound states are not
    normalizable and carry unit graph norm instead.
    """

    cls: BoundClass
    z: complex
    energy: float
    x: np.ndarray
    y: np.ndarray | None

    @property
    def z_partner(self) -> complex:
        return 1.0 / self.z


def gamma(g: Graph, z: complex) -> np.ndarray:
    """The matrix polynomial -z^2 P_M + z H_G - 1 at z."""
    nv = g.n_vertices
    out = z * g.h_g.astype(complex)
    out[np.diag_indices(nv)] -= 1.0
    idx = np.arange(g.n_boundary, nv)
    out[idx, idx] -= z * z
    return out


def _z_pair_for_energy(energy: float):
    """Roots of z^2 - E z + 1 = 0; returns the canonical |z| <= 1 root."""
    if abs(energy) < 2.0 - REAL_TOL:
        theta = np.arccos(energy / 2.0)
        return complex(np.cos(theta), -np.sin(theta))
    if abs(abs(energy) - 2.0) <= REAL_TOL:
        return complex(1.0 if energy > 0 else -1.0)
    s = np.sqrt(energy * energy - 4.0)
    root = (energy - s) / 2.0 if energy > 0 else (energy + s) / 2.0
    return complex(root)


def confined_subspace(g: Graph):
    """Pairs (energy, beta) spanning eigenspaces of D intersected with ker B^T.

    beta vectors are orthonormal internal amplitudes of the confined states.
    """
    m = g.n_internal
    if m == 0:
        return []
    evals, vecs = la.eigh(g.block_d.astype(float))
    out = []
    i = 0
    while i < m:
        j = i
        while j + 1 < m and evals[j + 1] - evals[i] < REAL_TOL:
            j += 1
        group = vecs[:, i:j + 1]
        bt_on_group = g.block_b.T.astype(float) @ group
        null = la.null_space(bt_on_group, rcond=1e-12)
        lam = float(np.mean(evals[i:j + 1]))
        for k in range(null.shape[1]):
            out.append((lam, group @ null[:, k]))
        i = j + 1
    return out


@dataclass
class QEPResult:
    eigenvalues: np.ndarray    # finite eigenvalues
    eigenvectors: np.ndarray   # columns, graph-norm 1
    n_infinite: int


def _companion_eig(a0, a1, a2):
    """Finite eigenpairs of A0 + z A1 + z^2 A2 via companion linearization."""
    d = a0.shape[0]
    c1 = np.zeros((2 * d, 2 * d))
    c2 = np.zeros((2 * d, 2 * d))
    c1[:d, :d] = a0
    c1[d:, d:] = np.eye(d)
    c2[:d, :d] = -a1
    c2[:d, d:] = -a2
    c2[d:, :d] = np.eye(d)
    vals, vecs = la.eig(c1, c2)
    # eigenvalues beyond any physical scale are perturbed infinite ones
    finite = np.isfinite(vals) & (np.abs(vals) < 1e6)
    z = vals[finite]
    x = vecs[:d, finite]
    norms = np.linalg.norm(x, axis=0)
    ok = norms > 1e-10
    z, x = z[ok], x[:, ok] / norms[ok]
    return z, x, int(vals.size - z.size)


def solve_qep(g: Graph) -> QEPResult:
    """All finite eigenvalues of det gamma(z) = 0 with eigenvectors."""
    nv = g.n_vertices
    a0 = -np.eye(nv)
    a1 = g.h_g.astype(float)
    a2 = -np.diag(g.p_m_diag)
    z, x, n_inf = _companion_eig(a0, a1, a2)
    # polish eigenvectors: x should satisfy gamma(z) x ~ 0
    for k in range(z.size):
        scale = max(1.0, abs(z[k]) ** 2)
        resid = np.linalg.norm(gamma(g, z[k]) @ x[:, k]) / scale
        if resid > 1e-6:
            raise ArithmeticError(
                f"linearization produced unusable eigenpair at z={z[k]:.6g} "
                f"(residual {resid:.2e})"
            )
    return QEPResult(z, x, n_inf)


def _match_confined(z, confined_energies):
    energy = z + 1.0 / z
    if abs(energy.imag) > 1e-6:
        return False
    return any(abs(energy.real - lam) < 1e-6 for lam in confined_energies)


@dataclass
class BoundStateSet:
    graph: Graph
    confined: list
    evanescent: list
    half_bound: list
    qep_eigenvalues: np.ndarray

    @property
    def counts(self):
        return (len(self.evanescent), len(self.confined), len(self.half_bound))

    @property
    def physical(self):
        return self.confined + self.evanescent

    def to_json_dict(self):
        states = []
        for st in self.confined + self.evanescent + self.half_bound:
            states.append({
                "class": st.cls.value,
                "z": [st.z.real, st.z.imag],
                "E": st.energy,
                "amplitudes": st.x.tolist(),
            })
        n_ev, n_c, n_h = self.counts
        return {"graph": self.graph.name,
                "counts": {"n_ev": n_ev, "n_c": n_c, "n_h": n_h},
                "states": states}


def classify_bound_states(g: Graph, qep: QEPResult | None = None) -> BoundStateSet:
    """Partition the QEP spectrum into confined/evanescent/half-bound states.

    Confined states are taken from the independent D-restricted
    computation; QEP eigenpairs are used for the evanescent and
    half-bound branches and cross-checked against the confined set.
    """
    if qep is None:
        qep = solve_qep(g)
    n = g.n_boundary
    confined = []
    for lam, beta in confined_subspace(g):
        x = np.concatenate([np.zeros(n), beta])
        z = _z_pair_for_energy(lam)
        if abs(abs(lam) - 2.0) <= REAL_TOL:
            confined.append(BoundState(BoundClass.CONFINED_PM1, z, lam, x, None))
        else:
            y = x / (z - 1.0 / z)
            confined.append(BoundState(BoundClass.CONFINED, z, lam, x, y))
    confined_energies = [st.energy for st in confined]

    evanescent, half_bound = [], []
    for k in range(qep.eigenvalues.size):
        z = qep.eigenvalues[k]
        x = qep.eigenvectors[:, k]
        if abs(z.imag) > REAL_TOL:
            continue
        zr = z.real
        bd_amp = np.linalg.norm(x[:n])
        if abs(abs(zr) - 1.0) <= UNIT_TOL:
            if bd_amp <= BOUNDARY_TOL:
                continue  # confined state at z = +-1, already counted
            x = np.real(x / x[np.argmax(np.abs(x))])
            x = x / np.linalg.norm(x)
            half_bound.append(BoundState(
                BoundClass.HALF_BOUND, complex(np.sign(zr)),
                float(2.0 * np.sign(zr)), x, None))
            continue
        if not -1.0 < zr < 1.0:
            continue
        if bd_amp <= BOUNDARY_TOL:
            if _match_confined(complex(zr), confined_energies):
                continue
            raise ClassificationAmbiguity(
                f"real eigenvalue z={zr:.12g} has no boundary amplitude but "
                "matches no confined energy")
        if bd_amp < 1e-7:
            raise ClassificationAmbiguity(
                f"boundary amplitude {bd_amp:.3e} at z={zr:.12g} is between "
                "the confined and evanescent tolerance bands")
        x = np.real(x / x[np.argmax(np.abs(x))])
        alpha, beta = x[:n], x[n:]
        full_norm = np.sqrt(beta @ beta + (alpha @ alpha) / (1.0 - zr * zr))
        x = x / full_norm
        y = -x / (zr - 1.0 / zr)
        evanescent.append(BoundState(
            BoundClass.EVANESCENT, complex(zr), float(zr + 1.0 / zr), x, y))

    evanescent.sort(key=lambda st: st.energy)
    confined.sort(key=lambda st: st.energy)
    return BoundStateSet(g, confined, evanescent, half_bound, qep.eigenvalues)


@lru_cache(maxsize=None)
def bound_states(g: Graph) -> BoundStateSet:
    return classify_bound_states(g)


# ---------------------------------------------------------------------------
# deflated inverse of gamma on the complement of the confined subspace
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _deflation(g: Graph):
    """Orthonormal basis W of the confined complement + projected blocks."""
    bs = bound_states(g)
    nv = g.n_vertices
    if bs.confined:
        c_mat = np.column_stack([st.x for st in bs.confined])
        w = la.null_space(c_mat.T)
    else:
        w = np.eye(nv)
    hw = w.T @ g.h_g @ w
    pw = w.T @ (g.p_m_diag[:, None] * w)
    return w, hw, pw


def gamma_nc_inv_batch(g: Graph, zs: np.ndarray, block: str = "internal"):
    """gamma_nc(z)^(-1) at many z, projected back to V(G).

    block="internal" returns the G0 x G0 restriction (M x M per z);
    block="full" the V(G) x V(G) matrix.
    """
    w, hw, pw = _deflation(g)
    zs = np.asarray(zs, dtype=complex).ravel()
    d = hw.shape[0]
    t = (-(zs * zs))[:, None, None] * pw + zs[:, None, None] * hw
    t -= np.eye(d)
    inv = np.linalg.inv(t)
    wl = w[g.n_boundary:, :] if block == "internal" else w
    return np.einsum("aj,kjl,bl->kab", wl, inv, wl, optimize=True)


def gamma_nc_inv(g: Graph, z: complex, block: str = "internal"):
    return gamma_nc_inv_batch(g, np.array([z]), block=block)[0]


@lru_cache(maxsize=None)
def _qep_nc(g: Graph):
    """Finite eigenpairs of the deflated pencil (W coordinates)."""
    w, hw, pw = _deflation(g)
    d = hw.shape[0]
    z, x, n_inf = _companion_eig(-np.eye(d), hw, -pw)
    return z, x, n_inf


def nonphysical_disc_guard(g: Graph, margin: float = 1e-6):
    """Check no non-physical deflated eigenvalue lies inside or near the unit disc.

    The closed-form inner integral used by the two-particle kernel needs
    every finite eigenvalue of gamma_nc inside the unit disc to be an
    evanescent bound state (half-bound +-1 poles are cancelled
    analytically).  Returns the offending eigenvalues, empty when safe.
    """
    z, _, _ = _qep_nc(g)
    bs = bound_states(g)
    known = np.array([st.z for st in bs.evanescent] + [1.0, -1.0], dtype=complex)
    bad = []
    for zv in z:
        if np.abs(zv - known).min() < 1e-7:
            continue
        if abs(zv) < 1.0 + margin:
            bad.append(zv)
    return np.array(bad)


def gamma_inverse(g: Graph, z: complex) -> np.ndarray:
    """Direct inverse of gamma(g, z) with pole-proximity guard."""
    eigs = bound_states(g).qep_eigenvalues
    if eigs.size:
        dist = np.abs(z - eigs)
        k = int(np.argmin(dist))
        if dist[k] < REAL_TOL:
            raise PoleProximityError(z, eigs[k])
    return la.inv(gamma(g, z))


def det_scan_counts(g: Graph, n_grid: int = 4001):
    """(n_ev, n_h) estimated from sign changes of det gamma_nc on [-1, 1].

    Independent of the companion-linearization path.
    """
    w, hw, pw = _deflation(g)
    d = hw.shape[0]
    xs = np.linspace(-1.0 + 1e-4, 1.0 - 1e-4, n_grid)
    dets = np.empty(n_grid)
    for i, xv in enumerate(xs):
        t = -(xv * xv) * pw + xv * hw - np.eye(d)
        dets[i] = la.det(t)
    signs = np.sign(dets)
    n_ev = int(np.sum(signs[:-1] * signs[1:] < 0))
    scale = np.abs(dets).max()
    n_h = 0
    for endpoint in (1.0, -1.0):
        t = -pw + endpoint * hw - np.eye(d)
        if abs(la.det(t)) < 1e-8 * max(scale, 1.0):
            n_h += 1
    return n_ev, n_h


# ---------------------------------------------------------------------------
# residue checks and the resolvent-form verification artifact
# ---------------------------------------------------------------------------

def _contour_residue(g: Graph, center: complex, radius: float, n_nodes: int = 64):
    theta = 2.0 * np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    ring = center + radius * np.exp(1j * theta)
    vals = gamma_nc_inv_batch(g, ring, block="full")
    offs = (ring - center)[:, None, None]
    return np.mean(vals * offs, axis=0)


def _min_gap(z0, others):
    others = np.asarray(others, dtype=complex)
    others = others[np.abs(others - z0) > 1e-12]
    if others.size == 0:
        return np.inf
    return float(np.abs(others - z0).min())


@dataclass
class ResidueReport:
    supported: bool
    reason: str
    per_state: list      # (z_i, residual) for each evanescent state
    infinity_chain_length_2: bool | None
    passed: bool


def verify_residues(g: Graph, bs: BoundStateSet | None = None,
                    tol: float = 1e-6) -> ResidueReport:
    """Check Res_{z=z_i} gamma_nc(z)^(-1) = -x_i x_i^T / (z_i - 1/z_i).

    Residues are estimated by small-circle contour quadrature, the
    oracle side of the identity.  Graphs failing the chain condition are
    reported as unsupported (Line included) rather than silently passed.
    """
    if bs is None:
        bs = bound_states(g)
    status, _ = chain_condition(g)
    if status is not ChainCondition.HOLDS:
        return ResidueReport(False, f"chain condition: {status.value}",
                             [], None, False)
    z_all = np.concatenate([bs.qep_eigenvalues, [1.0, -1.0]])
    per_state = []
    ok = True
    for st in bs.evanescent:
        radius = min(1e-3, 0.45 * _min_gap(st.z, z_all))
        res = _contour_residue(g, st.z, radius)
        target = -np.outer(st.x, st.x) / (st.z - 1.0 / st.z)
        err = float(np.abs(res - target).max())
        per_state.append((st.z, err))
        ok &= err <= tol
    chain2 = infinity_chain_length_two(g)
    return ResidueReport(True, "", per_state, chain2, ok and chain2)


def infinity_chain_length_two(g: Graph) -> bool:
    """True when both Jordan chains at infinity stop at length exactly 2.

    Solvability of the chain equations reduces to the boundary 2x2
    system whose determinant is the chain-condition value.
    """
    status, value = chain_condition(g)
    return status is ChainCondition.HOLDS and value != 0


@dataclass
class ResolventData:
    """Pole/residue decomposition of gamma_nc(z)^(-1), for verification only.

    gamma_nc(z)^(-1) ~= sum_c R_c / (z - lambda_c) + sum_k z^k C_k with
    clusters of eigenvalues grouped within DEGENERACY_TOL.
    """

    graph: Graph
    poles: np.ndarray
    residues: list
    tail_coeffs: list
    cluster_sizes: list = field(default_factory=list)

    def reconstruct(self, z: complex) -> np.ndarray:
        out = sum(r / (z - lam) for lam, r in zip(self.poles, self.residues))
        for k, c in enumerate(self.tail_coeffs):
            out = out + (z ** k) * c
        return out


def build_resolvent_data(g: Graph, tail_degree: int = 3) -> ResolventData:
    """Assemble ResolventData from contour residues plus a polynomial tail.

    Residues at every finite deflated eigenvalue cluster are computed by
    small-circle quadrature; the remainder is fit by a short polynomial
    in z (degree 1 exactly when both infinity chains have length 2).
    """
    z_all, _, _ = _qep_nc(g)
    order = np.argsort(z_all.real + 1e-9 * z_all.imag)
    z_sorted = z_all[order]
    clusters = []
    used = np.zeros(z_sorted.size, dtype=bool)
    for i in range(z_sorted.size):
        if used[i]:
            continue
        members = [z_sorted[i]]
        used[i] = True
        for j in range(i + 1, z_sorted.size):
            if not used[j] and abs(z_sorted[j] - z_sorted[i]) <= DEGENERACY_TOL:
                members.append(z_sorted[j])
                used[j] = True
        clusters.append(np.mean(members) if len(members) > 1 else members[0])

    poles, residues, sizes = [], [], []
    for c in clusters:
        gap = _min_gap(c, np.array(clusters))
        radius = min(1e-3, 0.45 * gap)
        poles.append(c)
        residues.append(_contour_residue(g, c, radius))
        sizes.append(int(np.sum(np.abs(z_all - c) <= DEGENERACY_TOL)))

    # polynomial tail from anchor points off the poles
    anchors = np.array([0.0, 0.31j, -0.17 + 0.23j, 0.41 - 0.11j])[:tail_degree + 1]
    w, _, _ = _deflation(g)
    d = w.shape[1]
    vals = []
    for a in anchors:
        direct = gamma_nc_inv_batch(g, np.array([a]), block="full")[0]
        pole_part = sum(r / (a - lam) for lam, r in zip(poles, residues))
        vals.append(direct - pole_part)
    vand = np.vander(anchors, tail_degree + 1, increasing=True)
    stacked = np.array([v.ravel() for v in vals])
    coeffs = la.solve(vand, stacked)
    nv = g.n_vertices
    tail = [coeffs[k].reshape(nv, nv) for k in range(tail_degree + 1)]
    return ResolventData(g, np.array(poles), residues, tail, sizes)

"""Direct time-domain verification on truncated rails.

Wavepackets are evolved with a Chebyshev expansion of exp(-iHt) on the
graph plus finite rails; outcome probabilities per rail are compared
against S-matrix predictions convolved with the packet's momentum
density.  The hard-core limit is realized exactly by projecting out
doubly-occupied internal configurations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import jv

from .graphs import Graph
from .bound import BoundState, BoundStateSet


class TruncatedSystem:
    """Graph + N finite rails of `rail_length` sites (site 1 = boundary vertex)."""

    def __init__(self, graph: Graph, rail_length: int = 400):
        self.graph = graph
        self.rail_length = rail_length
        nv = graph.n_vertices
        n = graph.n_boundary
        self.dim = nv + n * (rail_length - 1)
        rows, cols = [], []
        h = graph.h_g
        for u in range(nv):
            for v in range(u + 1, nv):
                if h[u, v]:
                    rows.append(u)
                    cols.append(v)
        for rail in range(n):
            prev = rail  # boundary vertex = site x=1
            for x in range(2, rail_length + 1):
                cur = self.site_index(rail + 1, x)
                rows.append(prev)
                cols.append(cur)
                prev = cur
        data = np.ones(len(rows))
        m = sp.coo_matrix((data, (rows, cols)), shape=(self.dim, self.dim))
        self.h1 = (m + m.T).tocsr()
        self.internal_indices = np.arange(n, nv)

    def site_index(self, rail: int, x: int) -> int:
        """Index of rail site (x >= 1); x = 1 is the boundary vertex itself."""
        if x == 1:
            return rail - 1
        nv = self.graph.n_vertices
        return nv + (rail - 1) * (self.rail_length - 1) + (x - 2)

    def rail_indices(self, rail: int, x_min: int = 1) -> np.ndarray:
        return np.array([self.site_index(rail, x)
                         for x in range(x_min, self.rail_length + 1)])

    def norm_bound(self) -> float:
        """Upper bound on the spectral radius of h1 (max degree)."""
        deg = np.asarray(self.h1.sum(axis=1)).ravel().max()
        return float(deg)


def gaussian_packet(system: TruncatedSystem, rail: int, x0: float,
                    sigma: float, p0: float) -> np.ndarray:
    """Incoming Gaussian wavepacket exp(-(x-x0)^2/4sigma^2) exp(-i p0 x).

    p0 in (-pi, 0) moves the packet toward the graph.
    """
    psi = np.zeros(system.dim, dtype=complex)
    xs = np.arange(1, system.rail_length + 1)
    amp = np.exp(-((xs - x0) ** 2) / (4.0 * sigma * sigma) - 1j * p0 * xs)
    psi[system.rail_indices(rail)] = amp
    return psi / np.linalg.norm(psi)


def embed_bound_state(system: TruncatedSystem, state: BoundState) -> np.ndarray:
    """Bound state on the truncated lattice, rail tails alpha_j z^(x-1)."""
    g = system.graph
    psi = np.zeros(system.dim, dtype=complex)
    psi[:g.n_vertices] = state.x
    z = state.z.real
    if abs(z) > 1e-12:
        xs = np.arange(2, system.rail_length + 1)
        tail = z ** (xs - 1)
        for rail in range(1, g.n_boundary + 1):
            alpha = state.x[rail - 1]
            if alpha != 0.0:
                psi[system.rail_indices(rail, x_min=2)] = alpha * tail
    return psi / np.linalg.norm(psi)


def _chebyshev_coeffs(tau: float, tol: float = 1e-14):
    order = int(tau + 40.0 * (max(tau, 1.0)) ** (1.0 / 3.0) + 40)
    k = np.arange(order + 1)
    c = 2.0 * (-1j) ** k * jv(k, tau)
    c[0] *= 0.5
    mags = np.abs(c)
    keep = order
    while keep > 2 and mags[keep] < tol and mags[keep - 1] < tol:
        keep -= 1
    return c[:keep + 1]


def chebyshev_evolve(apply_h, psi, t: float, bound: float):
    """exp(-iHt) psi for any linear map with spectrum in [-bound, bound]."""
    coeffs = _chebyshev_coeffs(bound * t)
    tm1 = psi
    t0 = apply_h(psi) / bound
    acc = coeffs[0] * tm1 + coeffs[1] * t0
    for ck in coeffs[2:]:
        t1 = 2.0 * apply_h(t0) / bound - tm1
        acc += ck * t1
        tm1, t0 = t0, t1
    return acc


# ---------------------------------------------------------------------------
# one particle
# ---------------------------------------------------------------------------

@dataclass
class EvolveResult:
    rail_prob: dict
    graph_prob: float
    norm_drift: float
    energy_drift: float
    boundary_contamination: float
    inconclusive: bool
    extras: dict = field(default_factory=dict)


def evolve_1p(system: TruncatedSystem, p0: float, sigma: float, rail: int,
              t_final: float | None = None, x0: float | None = None) -> EvolveResult:
    """Evolve one incoming packet until it clears the graph; rail outcomes."""
    if x0 is None:
        x0 = max(6.0 * sigma, 0.25 * system.rail_length)
    speed = 2.0 * abs(np.sin(p0))
    if t_final is None:
        t_final = 2.2 * x0 / max(speed, 0.2)
    psi0 = gaussian_packet(system, rail, x0, sigma, p0)
    h1 = system.h1
    apply_h = lambda v: h1 @ v
    bound = system.norm_bound() + 0.1
    e0 = np.real(np.vdot(psi0, h1 @ psi0))
    psi = chebyshev_evolve(apply_h, psi0, t_final, bound)
    norm_drift = abs(np.linalg.norm(psi) - 1.0)
    e1 = np.real(np.vdot(psi, h1 @ psi))
    g = system.graph
    rail_prob = {}
    contamination = 0.0
    for m in range(1, g.n_boundary + 1):
        idx = system.rail_indices(m, x_min=2)
        pr = float(np.abs(psi[idx]) ** 2 @ np.ones(idx.size))
        rail_prob[m] = pr
        contamination = max(contamination,
                            float((np.abs(psi[idx[-10:]]) ** 2).sum()))
    graph_prob = float((np.abs(psi[:g.n_vertices]) ** 2).sum())
    return EvolveResult(rail_prob, graph_prob, norm_drift, abs(e1 - e0),
                        contamination, contamination > 1e-4)


def evolve_1p_series(system: TruncatedSystem, p0: float, sigma: float,
                     rail: int, t_final: float, n_snapshots: int = 40,
                     x0: float | None = None):
    """Per-region probability time series [(t, graph, rail1, rail2, ...)]."""
    if x0 is None:
        x0 = max(6.0 * sigma, 0.25 * system.rail_length)
    psi = gaussian_packet(system, rail, x0, sigma, p0)
    h1 = system.h1
    bound = system.norm_bound() + 0.1
    dt = t_final / n_snapshots
    g = system.graph
    rails = [system.rail_indices(m, x_min=2)
             for m in range(1, g.n_boundary + 1)]
    rows = []
    t = 0.0
    for _ in range(n_snapshots + 1):
        probs = [float((np.abs(psi[idx]) ** 2).sum()) for idx in rails]
        rows.append((t, float((np.abs(psi[:g.n_vertices]) ** 2).sum()),
                     *probs))
        psi = chebyshev_evolve(lambda v: h1 @ v, psi, dt, bound)
        t += dt
    return rows


def momentum_density(p_grid: np.ndarray, p0: float, sigma: float) -> np.ndarray:
    rho = np.exp(-2.0 * sigma * sigma * (p_grid - p0) ** 2)
    return rho / np.trapezoid(rho, p_grid)


def predicted_1p(g: Graph, p0: float, sigma: float, n: int,
                 n_grid: int = 401) -> dict:
    """Packet-convolved |S^{mn}|^2 per outgoing rail."""
    from .single import s_matrix_at_energy
    half = min(abs(p0) - 1e-3, np.pi - abs(p0) - 1e-3, 6.0 / (2.0 * sigma))
    ps = np.linspace(p0 - half, p0 + half, n_grid)
    rho = momentum_density(ps, p0, sigma)
    out = {m: np.zeros(n_grid) for m in range(1, g.n_boundary + 1)}
    for i, p in enumerate(ps):
        s = s_matrix_at_energy(g, 2.0 * np.cos(p))
        for m in out:
            out[m][i] = abs(s[m - 1, n - 1]) ** 2
    return {m: float(np.trapezoid(out[m] * rho, ps)) for m in out}


# ---------------------------------------------------------------------------
# two particles
# ---------------------------------------------------------------------------

class TwoParticleEvolver:
    """Dense pair wavefunction Psi[x, y] with sparse one-body maps.

    interaction: U = 0, finite U (diagonal on internal double
    occupancies) or U = inf (those configurations projected out).
    """

    def __init__(self, system: TruncatedSystem, u: float = np.inf):
        self.system = system
        self.u = u
        self.h1 = system.h1
        self.idx_int = system.internal_indices
        self.bound = 2.0 * system.norm_bound() + (0.0 if not np.isfinite(u)
                                                  else abs(u)) + 0.2

    def project(self, psi2: np.ndarray) -> np.ndarray:
        if np.isinf(self.u):
            psi2[self.idx_int, self.idx_int] = 0.0
        return psi2

    def apply_h(self, psi2: np.ndarray) -> np.ndarray:
        out = self.h1 @ psi2 + psi2 @ self.h1
        if np.isfinite(self.u) and self.u != 0.0:
            out[self.idx_int, self.idx_int] += self.u * psi2[self.idx_int,
                                                             self.idx_int]
        return self.project(out) if np.isinf(self.u) else out

    def evolve(self, psi2: np.ndarray, t: float) -> np.ndarray:
        psi2 = self.project(psi2.copy())
        psi2 /= np.linalg.norm(psi2)
        return chebyshev_evolve(self.apply_h, psi2, t, self.bound)


def symmetrize(psi2: np.ndarray) -> np.ndarray:
    s = psi2 + psi2.T
    return s / np.linalg.norm(s)


def product_state(a: np.ndarray, b: np.ndarray, boson: bool = True) -> np.ndarray:
    psi2 = np.outer(a, b)
    return symmetrize(psi2) if boson else psi2 / np.linalg.norm(psi2)


@dataclass
class TwoParticleOutcome:
    bound_retained: dict      # rail -> P(one particle far on rail, other in chi)
    both_far: dict            # (rail_i, rail_j) i<=j -> probability
    near_prob: float
    norm_drift: float
    inconclusive: bool


def analyze_2p(system: TruncatedSystem, psi2: np.ndarray,
               chi_vec: np.ndarray | None, x_far: int = 60) -> TwoParticleOutcome:
    """Region/channel decomposition of a final two-particle state."""
    g = system.graph
    n = g.n_boundary
    far_idx = {m: system.rail_indices(m, x_min=x_far) for m in range(1, n + 1)}
    bound_retained = {}
    if chi_vec is not None:
        for m in range(1, n + 1):
            amp = psi2[far_idx[m], :] @ chi_vec.conj()
            bound_retained[m] = 2.0 * float((np.abs(amp) ** 2).sum())
    both_far = {}
    for mi in range(1, n + 1):
        for mj in range(mi, n + 1):
            blk = psi2[np.ix_(far_idx[mi], far_idx[mj])]
            p = float((np.abs(blk) ** 2).sum())
            if mi != mj:
                p += float((np.abs(psi2[np.ix_(far_idx[mj], far_idx[mi])]) ** 2).sum())
            both_far[(mi, mj)] = p
    near = np.ones(system.dim, dtype=bool)
    for m in range(1, n + 1):
        near[far_idx[m]] = False
    near_prob = float((np.abs(psi2[np.ix_(near, near)]) ** 2).sum())
    contamination = 0.0
    for m in range(1, n + 1):
        tail = system.rail_indices(m, x_min=system.rail_length - 10)
        contamination = max(contamination,
                            float((np.abs(psi2[tail, :]) ** 2).sum()
                                  + (np.abs(psi2[:, tail]) ** 2).sum()))
    return TwoParticleOutcome(bound_retained, both_far, near_prob,
                              0.0, contamination > 1e-4)


def evolve_2p_bound(system: TruncatedSystem, state: BoundState, p0: float,
                    sigma: float, rail: int, u: float = np.inf,
                    t_final: float | None = None,
                    x0: float | None = None) -> TwoParticleOutcome:
    """One packet incoming on `rail` with the other particle bound in `state`."""
    if x0 is None:
        x0 = max(6.0 * sigma, 0.25 * system.rail_length)
    speed = 2.0 * abs(np.sin(p0))
    if t_final is None:
        t_final = 2.2 * x0 / max(speed, 0.2)
    packet = gaussian_packet(system, rail, x0, sigma, p0)
    chi = embed_bound_state(system, state)
    psi2 = product_state(packet, chi, boson=True)
    ev = TwoParticleEvolver(system, u)
    norm0 = 1.0
    out = ev.evolve(psi2, t_final)
    drift = abs(np.linalg.norm(out) - norm0)
    res = analyze_2p(system, out, chi)
    res.norm_drift = drift
    return res


def evolve_2p_free(system: TruncatedSystem, packets, u: float = 0.0,
                   t_final: float = 100.0, boson: bool = False) -> np.ndarray:
    """Evolve two packets; returns the final pair wavefunction."""
    (p1, s1, r1, x1), (p2, s2, r2, x2) = packets
    a = gaussian_packet(system, r1, x1, s1, p1)
    b = gaussian_packet(system, r2, x2, s2, p2)
    psi2 = product_state(a, b, boson=boson)
    ev = TwoParticleEvolver(system, u)
    return ev.evolve(psi2, t_final)

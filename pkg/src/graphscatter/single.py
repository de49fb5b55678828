"""Single-particle S-matrix, internal amplitudes and transmission coefficients.

Conventions: incoming momentum p in (-pi, 0), z = exp(ip), energy
E = z + 1/z = 2 cos p in (-2, 2); outgoing momentum k = -p.  With

    Q(z) = 1 - z A - z B^T (E - D)^(-1) B

the fixed-momentum S-matrix and internal amplitudes are

    S(z)   = -Q(1/z) Q(z)^(-1)            (N x N, unitary on |z| = 1)
    Psi(z) = (E - D)^(-1) B (1/z + z S)   (M x N)

and the scattering state entering rail n has rail amplitudes
delta_mn z^(-x) + S^(mn) z^x and internal amplitudes Psi[:, n].
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg as la

from .graphs import Graph

RESONANCE_TOL = 1e-9
LIMIT_BAND = 1e-6
COND_LIMIT = 1e12


class ResonanceError(ArithmeticError):
    """E = z + 1/z collides with an eigenvalue of the internal block D."""

    def __init__(self, z, energy, nearest):
        super().__init__(
            f"E={energy:.12g} within tolerance of internal eigenvalue "
            f"{nearest:.12g} (z={z:.12g})"
        )
        self.z = z
        self.energy = energy
        self.nearest = nearest


class SingularQError(ArithmeticError):
    """Q(z) is numerically singular at the requested z."""

    def __init__(self, z, cond):
        super().__init__(f"Q(z) singular at z={z:.12g} (cond~{cond:.3g})")
        self.z = z
        self.cond = cond


def energy_to_z(energy: float) -> complex:
    """Map E in (-2, 2) to z = exp(ip) with p in (-pi, 0)."""
    if not -2.0 < energy < 2.0:
        raise ValueError(f"energy {energy} outside open band (-2, 2)")
    p = -np.arccos(energy / 2.0)
    return complex(np.cos(p), np.sin(p))


def z_to_energy(z: complex) -> complex:
    return z + 1.0 / z


@lru_cache(maxsize=None)
def _d_eigenvalues(g: Graph) -> np.ndarray:
    if g.n_internal == 0:
        return np.zeros(0)
    return la.eigvalsh(g.block_d.astype(float))


def _check_resonance(g: Graph, z: complex):
    energy = z + 1.0 / z
    evals = _d_eigenvalues(g)
    if evals.size:
        dist = np.abs(energy - evals)
        k = int(np.argmin(dist))
        if dist[k] < RESONANCE_TOL:
            raise ResonanceError(z, energy, evals[k])


def q_matrix(g: Graph, z: complex) -> np.ndarray:
    """Q(z) = 1 - zA - zB^T (E - D)^(-1) B with E = z + 1/z."""
    if z == 0:
        raise ValueError("z must be nonzero")
    _check_resonance(g, z)
    n = g.n_boundary
    q = np.eye(n, dtype=complex) - z * g.block_a
    if g.n_internal:
        energy = z + 1.0 / z
        core = energy * np.eye(g.n_internal) - g.block_d
        x = la.solve(core, g.block_b.astype(complex))
        q -= z * (g.block_b.T @ x)
    return q


def s_matrix_1p(g: Graph, z: complex) -> np.ndarray:
    """S(z) = -Q(1/z) Q(z)^(-1), by linear solve against Q(z)."""
    qz = q_matrix(g, z)
    qinv_z = q_matrix(g, 1.0 / z)
    cond = np.linalg.cond(qz)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularQError(z, cond)
    # S Q(z) = -Q(1/z)  =>  Q(z)^T S^T = -Q(1/z)^T
    return -la.solve(qz.T, qinv_z.T).T


def psi_matrix(g: Graph, z: complex) -> np.ndarray:
    """Internal amplitudes Psi(z); column n is the state entering rail n."""
    s = s_matrix_1p(g, z)
    if g.n_internal == 0:
        return np.zeros((0, g.n_boundary), dtype=complex)
    energy = z + 1.0 / z
    core = energy * np.eye(g.n_internal) - g.block_d
    x = la.solve(core, g.block_b.astype(complex))
    return x @ (np.eye(g.n_boundary) / z + z * s)


def s_and_psi(g: Graph, z: complex):
    """(S, Psi) sharing one Q factorization path."""
    return s_matrix_1p(g, z), psi_matrix(g, z)


def _richardson_limit(f, energy, h):
    """Limit of f at `energy` through a removable singularity.

    Symmetric O(h^4) Richardson when E +- h stays inside the band,
    otherwise one-sided quadratic extrapolation toward band center.
    """
    if abs(energy) + h < 2.0:
        g1 = 0.5 * (f(energy + h) + f(energy - h))
        g2 = 0.5 * (f(energy + h / 2) + f(energy - h / 2))
        return (4.0 * g2 - g1) / 3.0
    s = -1.0 if energy > 0 else 1.0
    f1, f2, f3 = (f(energy + s * k * h) for k in (1, 2, 3))
    return 3.0 * f1 - 3.0 * f2 + f3


def _near_resonance(g: Graph, energy: float) -> bool:
    """True when the direct solve would be dangerously ill-conditioned."""
    evals = _d_eigenvalues(g)
    return bool(evals.size) and np.abs(energy - evals).min() < LIMIT_BAND


def s_matrix_at_energy(g: Graph, energy: float, limit_at_resonance: bool = True,
                       h: float = 1e-3) -> np.ndarray:
    """S evaluated at real energy, extrapolating through resonances.

    At isolated points where E hits an eigenvalue of D (or Q is singular)
    the S-matrix has a removable singularity; a symmetric Richardson
    step recovers the limit to O(h^4).  The limit path also engages in a
    narrow protective band around each resonance, where the direct
    solve loses accuracy.
    """
    try:
        if limit_at_resonance and _near_resonance(g, energy):
            raise ResonanceError(energy_to_z(energy), energy, energy)
        return s_matrix_1p(g, energy_to_z(energy))
    except (ResonanceError, SingularQError):
        if not limit_at_resonance:
            raise
        return _richardson_limit(
            lambda e: s_matrix_1p(g, energy_to_z(e)), energy, h
        )


def psi_at_energy(g: Graph, energy: float, limit_at_resonance: bool = True,
                  h: float = 1e-3) -> np.ndarray:
    try:
        if limit_at_resonance and _near_resonance(g, energy):
            raise ResonanceError(energy_to_z(energy), energy, energy)
        return psi_matrix(g, energy_to_z(energy))
    except (ResonanceError, SingularQError):
        if not limit_at_resonance:
            raise
        return _richardson_limit(
            lambda e: psi_matrix(g, energy_to_z(e)), energy, h
        )


def transmission_1p(g: Graph, energy: float, m: int, n: int,
                    limit_at_resonance: bool = True) -> complex:
    """t^{mn}(E) = S^{mn}(exp(ip)); rails are 1-based."""
    s = s_matrix_at_energy(g, energy, limit_at_resonance)
    return complex(s[m - 1, n - 1])


def unitarity_defect(s: np.ndarray) -> float:
    return float(np.abs(s.conj().T @ s - np.eye(s.shape[0])).max())


def reciprocity_defect(s: np.ndarray) -> float:
    return float(np.abs(s - s.T).max())


def scattering_state_residual(g: Graph, z: complex) -> float:
    """Max Schroedinger-equation residual of the scattering states on V(G).

    Checks H|psi> = E|psi> row-wise on every graph vertex, feeding in the
    rail amplitude at x = 2 for boundary rows.
    """
    s = s_matrix_1p(g, z)
    psi = psi_matrix(g, z)
    n, m = g.n_boundary, g.n_internal
    energy = z + 1.0 / z
    # columns: incoming rail; rows: amplitudes on V(G) at x=1 (boundary) / internal
    amp_bd = np.eye(n, dtype=complex) / z + z * s          # x = 1
    rail2 = np.eye(n, dtype=complex) / z**2 + z**2 * s     # x = 2
    full = np.vstack([amp_bd, psi]) if m else amp_bd
    h = g.h_g.astype(complex)
    lhs = h @ full
    lhs[:n, :] += rail2
    resid = lhs - energy * full
    return float(np.abs(resid).max())

"""Two-particle interaction kernel and S/R-matrix amplitudes.

Everything reduces to the M x M energy-dependent matrix

    J_uv = oint insum(w(z))_uv [(z^2-1) gamma_nc(z)^(-1)]_uv dz/(2 pi i z)
           + 2 sum_i insum(E - E_i + i eps)_uv (x_i x_i^T)_uv
           + sum_{i,j} (x_i x_i^T)_uv (x_j x_j^T)_uv / (E - E_i - E_j + i eps)

where w(z) = E + i eps - z - 1/z, the sums run over the physical bound
states (confined and evanescent, each once), matrices multiply
entrywise, and

    insum(w) = -omega_minus(w) gamma_nc(omega_minus(w))^(-1)
               - sum_ev x_j x_j^T / (w - E_j)

is the closed form of the one-momentum integral
int dk/(2 pi) Psi Psi^T(k) / (w - 2 cos k).  The subtraction makes
insum analytic in the upper half w-plane: the pole of the gamma factor
at an open bound channel cancels exactly against the bound-state term,
which is what keeps the periodic-trapezoid contour quadrature accurate
at small eps.  With T = 1 - U J, amplitudes are

    R = -2 pi i b^2 sum_uv <out1|u><out2|u> (U T^-1)_uv <v|in1><v|in2>

and the hard-core limit U -> infinity gives U T^-1 = -J^(-1).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graphs import Graph
from .bound import (
    BoundStateSet,
    bound_states,
    gamma_inverse,
    gamma_nc_inv_batch,
    nonphysical_disc_guard,
    _qep_nc,
)
from .single import energy_to_z, psi_at_energy

TWO_PI = 2.0 * np.pi
DEFAULT_EPS = 1e-3
DEFAULT_NODES = 2048
ONSHELL_TOL = 1e-9


class KernelAccuracyError(ArithmeticError):
    """Contour quadrature failed its node-doubling convergence check."""


class SingularKernelError(ArithmeticError):
    def __init__(self, e_total, cond):
        super().__init__(
            f"J singular in the hard-core limit at E={e_total:.12g} "
            f"(cond~{cond:.3g})"
        )
        self.e_total = e_total
        self.cond = cond


class Statistics(enum.Enum):
    DISTINGUISHABLE = "distinguishable"
    BOSON = "boson"
    FERMION = "fermion"

    @property
    def b_squared(self) -> float:
        return {"distinguishable": 1.0, "boson": 2.0, "fermion": 0.0}[self.value]


@dataclass(frozen=True)
class FreeLeg:
    """One asymptotically free particle: energy in (-2, 2) plus a rail."""
    energy: float
    rail: int


@dataclass(frozen=True)
class BoundLeg:
    """One particle in a physical bound state (index into BoundStateSet.physical)."""
    index: int


def omega_pair(w):
    """Roots (omega_minus, omega_plus) of x + 1/x = w, |omega_minus| <= 1.

    Principal-branch square roots; omega_minus * omega_plus = 1.
    """
    w = np.asarray(w, dtype=complex)
    s = np.sqrt(w - 2.0) * np.sqrt(w + 2.0)
    om = (w - s) / 2.0
    op = (w + s) / 2.0
    swap = np.abs(om) > np.abs(op)
    om_final = np.where(swap, op, om)
    op_final = np.where(swap, om, op)
    return om_final, op_final


def omega_minus(e_total: float, e_prime: float, eps: float) -> complex:
    """omega^-(E - E' + i eps), the in-disc root of x + 1/x = w."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    om, _ = omega_pair(np.array(e_total - e_prime + 1j * eps))
    return complex(om)


# ---------------------------------------------------------------------------
# kernel assembly
# ---------------------------------------------------------------------------

def _physical_data(bs: BoundStateSet):
    """(energies, internal xx^T stack) over physical bound states."""
    n = bs.graph.n_boundary
    phys = bs.physical
    if not phys:
        m = bs.graph.n_internal
        return np.zeros(0), np.zeros((0, m, m))
    energies = np.array([st.energy for st in phys])
    xx = np.stack([np.outer(st.x[n:], st.x[n:]) for st in phys])
    return energies, xx


def _ev_data(bs: BoundStateSet):
    n = bs.graph.n_boundary
    evs = bs.evanescent
    if not evs:
        m = bs.graph.n_internal
        return np.zeros(0), np.zeros((0, m, m))
    energies = np.array([st.energy for st in evs])
    xx = np.stack([np.outer(st.x[n:], st.x[n:]) for st in evs])
    return energies, xx


@lru_cache(maxsize=8)
def _circle_cache(g: Graph, n_nodes: int, offset: float):
    theta = TWO_PI * (np.arange(n_nodes) + offset) / n_nodes
    zs = np.exp(1j * theta)
    blocks = gamma_nc_inv_batch(g, zs, block="internal")
    gamma0 = (zs * zs - 1.0)[:, None, None] * blocks
    return zs, gamma0


def _circle_nodes(g: Graph, n_nodes: int):
    """Half-offset trapezoid nodes, shifted when one lands near a pole."""
    eigs, _, _ = _qep_nc(g)
    for offset in (0.5, 0.37, 0.61):
        zs, gamma0 = _circle_cache(g, n_nodes, offset)
        if eigs.size == 0 or np.abs(zs[:, None] - eigs[None, :]).min() > 1e-8:
            return zs, gamma0
        warnings.warn(
            f"contour node within 1e-8 of a gamma pole on {g.name}; "
            "shifting the node grid")
    return zs, gamma0


def insum_batch(g: Graph, bs: BoundStateSet, ws: np.ndarray) -> np.ndarray:
    """Closed-form inner integral at each w (Im w > 0), internal block."""
    ws = np.asarray(ws, dtype=complex).ravel()
    om, _ = omega_pair(ws)
    blocks = gamma_nc_inv_batch(g, om, block="internal")
    out = -om[:, None, None] * blocks
    ev_energies, ev_xx = _ev_data(bs)
    for lam, xx in zip(ev_energies, ev_xx):
        out -= xx[None, :, :] / (ws - lam)[:, None, None]
    return out


def j_matrix(g: Graph, bs: BoundStateSet | None = None, e_total: float = 0.0,
             eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
             check_convergence: bool = False, conv_tol: float = 1e-6) -> np.ndarray:
    """The M x M two-particle kernel J at total energy e_total."""
    if bs is None:
        bs = bound_states(g)
    bad = nonphysical_disc_guard(g)
    if bad.size:
        raise KernelAccuracyError(
            f"{g.name} has non-physical gamma eigenvalues near/inside the "
            f"unit disc ({bad}); the closed-form kernel does not apply")
    j = _j_contour(g, bs, e_total, eps, nodes)
    if check_convergence:
        j2 = _j_contour(g, bs, e_total, eps, 2 * nodes)
        delta = float(np.abs(j2 - j).max())
        if delta > conv_tol:
            raise KernelAccuracyError(
                f"J not converged at {nodes} nodes (doubling moves entries "
                f"by {delta:.3e} > {conv_tol:g})")
        return j2
    return j


def _j_contour(g, bs, e_total, eps, nodes):
    zs, gamma0 = _circle_nodes(g, nodes)
    ws = e_total + 1j * eps - zs - 1.0 / zs
    term_a = np.mean(insum_batch(g, bs, ws) * gamma0, axis=0)
    return term_a + _j_bound_terms(g, bs, e_total, eps)


def _j_bound_terms(g, bs, e_total, eps):
    m = g.n_internal
    energies, xx = _physical_data(bs)
    out = np.zeros((m, m), dtype=complex)
    if energies.size == 0:
        return out
    ins = insum_batch(g, bs, e_total - energies + 1j * eps)
    out += 2.0 * np.sum(ins * xx, axis=0)
    denom = e_total - energies[:, None] - energies[None, :] + 1j * eps
    out += np.einsum("iab,jab,ij->ab", xx, xx, 1.0 / denom, optimize=True)
    return out


def j_matrix_deformed(g: Graph, bs: BoundStateSet | None = None,
                      e_total: float = 0.0, eps: float = DEFAULT_EPS,
                      n_inner: int = 512, n_cut: int = 400,
                      r_inner: float = 0.05) -> np.ndarray:
    """J with the contour collapsed onto the branch cut of omega^-.

    The unit circle deforms to a small circle of radius r_inner plus the
    wrap around the arc {z : w(z) in [-2, 2]} plus the explicit residues
    at the evanescent poles crossed on the way.  Agreement with
    j_matrix exercises the residue-cancellation structure.
    """
    if bs is None:
        bs = bound_states(g)
    # inner circle |z| = r_inner
    theta = TWO_PI * (np.arange(n_inner) + 0.5) / n_inner
    zs = r_inner * np.exp(1j * theta)
    blocks = gamma_nc_inv_batch(g, zs, block="internal")
    gamma0 = (zs * zs - 1.0)[:, None, None] * blocks
    ws = e_total + 1j * eps - zs - 1.0 / zs
    term_circle = np.mean(insum_batch(g, bs, ws) * gamma0, axis=0)

    # wrap around the cut, parametrized by wt = 2 cos(phi)
    from numpy.polynomial.legendre import leggauss
    xg, wg = leggauss(n_cut)
    phi = 0.5 * np.pi * (xg + 1.0)
    wphi = 0.5 * np.pi * wg
    wt = 2.0 * np.cos(phi)
    v = e_total + 1j * eps - wt
    z_arc, _ = omega_pair(v)
    # jump of insum across its cut at wt: omega_minus(wt +- i0) = exp(-+ i phi)
    om_a = np.exp(-1j * phi)
    om_b = np.exp(1j * phi)
    g_a = gamma_nc_inv_batch(g, om_a, block="internal")
    g_b = gamma_nc_inv_batch(g, om_b, block="internal")
    jump = om_b[:, None, None] * g_b - om_a[:, None, None] * g_a
    gam_on_arc = gamma_nc_inv_batch(g, z_arc, block="internal")
    gamma0_arc = (z_arc * z_arc - 1.0)[:, None, None] * gam_on_arc
    dz_dwt = -(z_arc * z_arc) / (z_arc * z_arc - 1.0)
    dwt_dphi = -2.0 * np.sin(phi)
    meas = (dz_dwt * dwt_dphi / (TWO_PI * 1j * z_arc))[:, None, None]
    term_cut = np.einsum(
        "k,kab->ab", wphi, jump * gamma0_arc * meas, optimize=True)

    # residues at evanescent poles between the two contours
    ev_energies, ev_xx = _ev_data(bs)
    term_res = np.zeros_like(term_circle)
    if ev_energies.size:
        ins = insum_batch(g, bs, e_total - ev_energies + 1j * eps)
        term_res = -np.sum(ins * ev_xx, axis=0)

    term_a = term_circle + term_res + term_cut
    return term_a + _j_bound_terms(g, bs, e_total, eps)


def j_matrix_direct(g: Graph, bs: BoundStateSet | None = None,
                    e_total: float = 0.0, eps: float = 1e-2,
                    n_panels: int = 48, panel_order: int = 12) -> np.ndarray:
    """Brute-force J from the raw momentum integrals (test oracle).

    Double and single momentum integrals are done with composite
    Gauss-Legendre panels refined around the 1/(... + i eps) ridges, so
    use a moderate eps.  Slow; intended for small graphs in tests.
    """
    if bs is None:
        bs = bound_states(g)
    m = g.n_internal
    energies, xx = _physical_data(bs)

    nodes, weights = _ridge_grid(e_total, eps, n_panels, panel_order)
    ff = np.empty((nodes.size, m, m), dtype=complex)
    for i, k in enumerate(nodes):
        psi = psi_at_energy(g, 2.0 * np.cos(k))
        ff[i] = (psi @ psi.conj().T) / TWO_PI
    denom = (e_total + 1j * eps
             - 2.0 * np.cos(nodes)[:, None] - 2.0 * np.cos(nodes)[None, :])
    ww = weights[:, None] * weights[None, :] / denom
    j = np.einsum("kab,lab,kl->ab", ff, ff, ww, optimize=True)

    for lam, xxi in zip(energies, xx):
        nodes1, weights1 = _ridge_grid(e_total - lam, eps, n_panels, panel_order)
        ff1 = np.empty((nodes1.size, m, m), dtype=complex)
        for i, k in enumerate(nodes1):
            psi = psi_at_energy(g, 2.0 * np.cos(k))
            ff1[i] = (psi @ psi.conj().T) / TWO_PI
        den1 = e_total - lam + 1j * eps - 2.0 * np.cos(nodes1)
        j += 2.0 * xxi * np.einsum("k,kab->ab", weights1 / den1, ff1)

    if energies.size:
        den = e_total - energies[:, None] - energies[None, :] + 1j * eps
        j += np.einsum("iab,jab,ij->ab", xx, xx, 1.0 / den, optimize=True)
    return j


def _ridge_grid(e_res, eps, n_panels, order):
    """Composite GL grid on (-pi, 0) clustered around 2 cos k = e_res."""
    from numpy.polynomial.legendre import leggauss
    breaks = set(np.linspace(-np.pi, 0.0, n_panels + 1))
    if abs(e_res) < 2.0:
        k_star = -np.arccos(np.clip(e_res / 2.0, -1.0, 1.0))
        for scale in (1.0, 3.0, 9.0, 27.0, 81.0):
            for s in (-1.0, 1.0):
                b = k_star + s * scale * eps
                if -np.pi < b < 0.0:
                    breaks.add(b)
    breaks = np.array(sorted(breaks))
    xg, wg = leggauss(order)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * xg)
        weights.append(half * wg)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class TwoParticleKernel:
    """Energy-dependent interaction data at fixed total energy."""

    graph: Graph
    bound_set: BoundStateSet
    e_total: float
    eps: float
    nodes: int
    u: float
    j: np.ndarray
    ut_inv: np.ndarray


def kernel(g: Graph, bs: BoundStateSet | None = None, e_total: float = 0.0,
           u: float = np.inf, eps: float = DEFAULT_EPS,
           nodes: int = DEFAULT_NODES, **jkw) -> TwoParticleKernel:
    """Build J and U T^(-1) = U (1 - U J)^(-1) (hard-core: -J^(-1))."""
    if bs is None:
        bs = bound_states(g)
    j = j_matrix(g, bs, e_total, eps, nodes, **jkw)
    m = g.n_internal
    if u == 0:
        ut_inv = np.zeros((m, m), dtype=complex)
    elif np.isinf(u):
        cond = np.linalg.cond(j)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularKernelError(e_total, cond)
        ut_inv = -np.linalg.inv(j)
    else:
        t = np.eye(m) - u * j
        ut_inv = u * np.linalg.inv(t)
    return TwoParticleKernel(g, bs, e_total, eps, nodes, u, j, ut_inv)


# ---------------------------------------------------------------------------
# channel amplitude vectors and the R amplitude
# ---------------------------------------------------------------------------

@lru_cache(maxsize=200_000)
def _psi_cached(g: Graph, energy: float):
    psi = psi_at_energy(g, energy)
    psi.setflags(write=False)
    return psi


def leg_vector(g: Graph, bs: BoundStateSet, leg, side: str,
               basis: str = "energy", out_family: str = "minus") -> np.ndarray:
    """Internal-vertex amplitude factor of one channel leg.

    side "in" gives <v|leg>; side "out" gives <leg|u>.  Outgoing free
    legs use the out-family scattering states by default ("minus"); the
    "plus" family (conjugated amplitudes) is what in-basis matrix
    elements such as the cross-section integrand need.
    """
    if isinstance(leg, BoundLeg):
        phys = bs.physical
        if not 0 <= leg.index < len(phys):
            raise ValueError(f"bound index {leg.index} out of range")
        return phys[leg.index].x[g.n_boundary:].astype(complex)
    if not 1 <= leg.rail <= g.n_boundary:
        raise ValueError(f"rail {leg.rail} out of range 1..{g.n_boundary}")
    col = _psi_cached(g, leg.energy)[:, leg.rail - 1] / np.sqrt(TWO_PI)
    if basis == "energy":
        col = col / (4.0 - leg.energy ** 2) ** 0.25
    if side == "out" and out_family == "plus":
        col = np.conj(col)
    return col


def leg_energy(bs: BoundStateSet, leg) -> float:
    if isinstance(leg, BoundLeg):
        return bs.physical[leg.index].energy
    return leg.energy


def channel_energy(bs: BoundStateSet, legs) -> float:
    return sum(leg_energy(bs, leg) for leg in legs)


def _validate_channel(legs):
    n_bound = sum(isinstance(leg, BoundLeg) for leg in legs)
    if n_bound > 1:
        raise ValueError("at most one bound leg per two-particle channel")


def r_amplitude(kern: TwoParticleKernel, out_legs, in_legs,
                stats: Statistics = Statistics.BOSON, basis: str = "energy",
                out_family: str = "minus",
                allow_off_shell: bool = False) -> complex:
    """The reduced amplitude R with the energy delta stripped.

    R( out ; in ) = -2 pi i b^2 (c1*c2)^T UT^(-1) (s1*s2), legs combined
    entrywise.  Off-shell evaluation must be requested explicitly.
    """
    _validate_channel(out_legs)
    _validate_channel(in_legs)
    if stats is Statistics.FERMION:
        return 0.0 + 0.0j
    g, bs = kern.graph, kern.bound_set
    e_in = channel_energy(bs, in_legs)
    e_out = channel_energy(bs, out_legs)
    if abs(e_in - kern.e_total) > 1e-8:
        raise ValueError(
            f"kernel built at E={kern.e_total} but in-channel has E={e_in}")
    if not allow_off_shell and abs(e_out - e_in) > ONSHELL_TOL:
        raise ValueError(
            f"off-shell channels (dE={e_out - e_in:.3e}); pass "
            "allow_off_shell=True for off-shell scans")
    c = (leg_vector(g, bs, out_legs[0], "out", basis, out_family)
         * leg_vector(g, bs, out_legs[1], "out", basis, out_family))
    s = (leg_vector(g, bs, in_legs[0], "in", basis)
         * leg_vector(g, bs, in_legs[1], "in", basis))
    return complex(-2j * np.pi * stats.b_squared * (c @ kern.ut_inv @ s))


def psi_psi_dagger_check(g: Graph, z: complex) -> float:
    """Residual of Psi Psi^T = [(z^2-1) g(z)^-1 + (1/z^2-1) g(1/z)^-1]_G0."""
    if g.n_internal == 0:
        return 0.0
    psi = psi_at_energy(g, float((z + 1.0 / z).real))
    lhs = psi @ psi.conj().T
    n = g.n_boundary
    rhs = ((z * z - 1.0) * gamma_inverse(g, z)
           + (z ** -2 - 1.0) * gamma_inverse(g, 1.0 / z))[n:, n:]
    return float(np.abs(lhs - rhs).max())

"""Physical quantities built from the reduced two-particle amplitude R.

All probabilities use energy-normalized channel states, so channel
integrals carry no leftover density-of-states Jacobians.  Band-edge
1/sqrt singularities of the normalization are absorbed by integrating
in the substitution variable E = 2 cos(theta).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .graphs import Graph
from .bound import BoundStateSet
from .single import s_matrix_at_energy
from .twoparticle import (
    BoundLeg,
    FreeLeg,
    Statistics,
    TwoParticleKernel,
    kernel,
    leg_vector,
    r_amplitude,
    DEFAULT_EPS,
    DEFAULT_NODES,
)

# clip channel integrals this far inside the band: keeps quadrature nodes
# out of the ill-conditioned zone when an internal eigenvalue sits at a
# band edge; the sacrificed integrable mass is O(sqrt(margin))
BAND_MARGIN = 2e-6


# ---------------------------------------------------------------------------
# band-window quadrature
# ---------------------------------------------------------------------------

def band_window_nodes(e_total: float, n_per_half: int = 96):
    """Nodes/weights for int dE over {|E| < 2, |e_total - E| < 2}.

    The window is split at its midpoint and each half is mapped through
    E = 2 cos(theta) in whichever of E, e_total - E is band-edge
    singular at that half's outer endpoint, which regularizes the
    (4 - E^2)^(-1/2) normalization factors.
    """
    a = max(-2.0 + BAND_MARGIN, e_total - 2.0 + BAND_MARGIN)
    b = min(2.0 - BAND_MARGIN, e_total + 2.0 - BAND_MARGIN)
    if a >= b:
        return np.zeros(0), np.zeros(0)
    mid = 0.5 * (a + b)
    xg, wg = leggauss(n_per_half)
    energies, weights = [], []
    for lo, hi, outer in ((a, mid, a), (mid, b, b)):
        partner_sing = abs(abs(e_total - outer) - 2.0) < 1e-6
        self_sing = abs(abs(outer) - 2.0) < 1e-6
        if partner_sing and not self_sing:
            # substitute in the partner energy e_total - E
            plo, phi = e_total - hi, e_total - lo
            tlo, thi = np.arccos(phi / 2.0), np.arccos(plo / 2.0)
            th = 0.5 * (tlo + thi) + 0.5 * (thi - tlo) * xg
            energies.append(e_total - 2.0 * np.cos(th))
            weights.append(wg * 0.5 * (thi - tlo) * 2.0 * np.sin(th))
        else:
            tlo, thi = np.arccos(hi / 2.0), np.arccos(lo / 2.0)
            th = 0.5 * (tlo + thi) + 0.5 * (thi - tlo) * xg
            energies.append(2.0 * np.cos(th))
            weights.append(wg * 0.5 * (thi - tlo) * 2.0 * np.sin(th))
    return np.concatenate(energies), np.concatenate(weights)


# ---------------------------------------------------------------------------
# single-bound-particle scattering amplitudes
# ---------------------------------------------------------------------------

def _chi_leg(bs: BoundStateSet, chi) -> BoundLeg:
    if isinstance(chi, BoundLeg):
        return chi
    return BoundLeg(int(chi))


def make_kernel(g: Graph, bs: BoundStateSet, e_total: float,
                u: float = np.inf, eps: float = DEFAULT_EPS,
                nodes: int = DEFAULT_NODES) -> TwoParticleKernel:
    return kernel(g, bs, e_total, u, eps, nodes)


def elastic_amplitude(g: Graph, bs: BoundStateSet, energy: float, chi, m: int,
                      n: int, stats: Statistics = Statistics.BOSON,
                      eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
                      kern: TwoParticleKernel | None = None) -> complex:
    """t_{chi->chi}^{mn}(E) = S^{mn}(E) + R(E^m-, chi ; E^n+, chi)."""
    chi = _chi_leg(bs, chi)
    e_tot = energy + bs.physical[chi.index].energy
    if kern is None:
        kern = kernel(g, bs, e_tot, np.inf, eps, nodes)
    s = s_matrix_at_energy(g, energy)[m - 1, n - 1]
    r = r_amplitude(kern, (FreeLeg(energy, m), chi), (FreeLeg(energy, n), chi),
                    stats)
    return complex(s + r)


def inelastic_amplitude(g: Graph, bs: BoundStateSet, energy: float, chi,
                        chi_to, m: int, n: int,
                        stats: Statistics = Statistics.BOSON,
                        eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
                        kern: TwoParticleKernel | None = None) -> complex:
    """t_{chi->chi'}^{mn}(E); zero when E_cons = E + E_chi - E_chi' is closed."""
    chi, chi_to = _chi_leg(bs, chi), _chi_leg(bs, chi_to)
    e_chi = bs.physical[chi.index].energy
    e_to = bs.physical[chi_to.index].energy
    e_cons = energy + e_chi - e_to
    if abs(e_cons) >= 2.0 - BAND_MARGIN:
        return 0.0 + 0.0j
    if kern is None:
        kern = kernel(g, bs, energy + e_chi, np.inf, eps, nodes)
    return r_amplitude(kern, (FreeLeg(e_cons, m), chi_to),
                       (FreeLeg(energy, n), chi), stats)


def _ejection_grid(kern: TwoParticleKernel, in_legs, stats, n_quad):
    """|R|^2 over the two-free outgoing grid; returns (E, w, P[mi, mj, k])."""
    g, bs = kern.graph, kern.bound_set
    e_tot = kern.e_total
    energies, weights = band_window_nodes(e_tot, n_quad)
    if energies.size == 0:
        return energies, weights, np.zeros((g.n_boundary, g.n_boundary, 0))
    n_rails = g.n_boundary
    v1 = np.empty((n_rails, energies.size, g.n_internal), dtype=complex)
    v2 = np.empty_like(v1)
    for i, e in enumerate(energies):
        for rail in range(1, n_rails + 1):
            v1[rail - 1, i] = leg_vector(g, bs, FreeLeg(e, rail), "out")
            v2[rail - 1, i] = leg_vector(g, bs, FreeLeg(e_tot - e, rail), "out")
    s = (leg_vector(g, bs, in_legs[0], "in")
         * leg_vector(g, bs, in_legs[1], "in"))
    w = kern.ut_inv @ s
    amps = np.einsum("aku,bku,u->abk", v1, v2, w, optimize=True)
    amps *= -2j * np.pi * stats.b_squared
    return energies, weights, np.abs(amps) ** 2


def ejection_probability(g: Graph, bs: BoundStateSet, energy: float, chi,
                         n: int, stats: Statistics = Statistics.BOSON,
                         eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
                         n_quad: int = 96,
                         kern: TwoParticleKernel | None = None):
    """Per-rail ejection probabilities p_ej[m] (dict) and their sum.

    For bosons the unordered two-free channel space is counted once
    (ordered integral halved); the per-rail entry is the symmetric
    marginal, so values sum to the total ejection probability.
    """
    chi = _chi_leg(bs, chi)
    e_tot = energy + bs.physical[chi.index].energy
    if kern is None:
        kern = kernel(g, bs, e_tot, np.inf, eps, nodes)
    in_legs = (FreeLeg(energy, n), chi)
    energies, weights, p = _ejection_grid(kern, in_legs, stats, n_quad)
    factor = 0.5 if stats is Statistics.BOSON else 1.0
    per_rail = {}
    for m in range(1, g.n_boundary + 1):
        per_rail[m] = factor * float(np.einsum("bk,k->", p[m - 1], weights))
    return per_rail, sum(per_rail.values())


@dataclass
class ProcessBudget:
    """Probability decomposition for one (E, chi, n, stats) input channel.

    For bosons the capture processes coincide with the inelastic
    channels (unordered final states) and the capture map stays empty.
    """

    energy: float
    chi_index: int
    rail_in: int
    stats: Statistics
    elastic: dict = field(default_factory=dict)
    inelastic: dict = field(default_factory=dict)
    ejection: dict = field(default_factory=dict)
    capture: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return (sum(self.elastic.values()) + sum(self.inelastic.values())
                + sum(self.ejection.values()) + sum(self.capture.values()))


def process_budget(g: Graph, bs: BoundStateSet, energy: float, chi, n: int,
                   stats: Statistics = Statistics.BOSON,
                   eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
                   n_quad: int = 96) -> ProcessBudget:
    """Exhaustive outgoing-channel probabilities for one incoming channel."""
    chi = _chi_leg(bs, chi)
    e_chi = bs.physical[chi.index].energy
    e_tot = energy + e_chi
    kern = kernel(g, bs, e_tot, np.inf, eps, nodes)
    budget = ProcessBudget(energy, chi.index, n, stats)
    s_row = s_matrix_at_energy(g, energy)
    for m in range(1, g.n_boundary + 1):
        amp = s_row[m - 1, n - 1] + r_amplitude(
            kern, (FreeLeg(energy, m), chi), (FreeLeg(energy, n), chi), stats)
        budget.elastic[m] = float(abs(amp) ** 2)
    for j, st in enumerate(bs.physical):
        if j == chi.index:
            continue
        e_cons = e_tot - st.energy
        if abs(e_cons) >= 2.0 - BAND_MARGIN:
            continue
        for m in range(1, g.n_boundary + 1):
            amp = r_amplitude(kern, (FreeLeg(e_cons, m), BoundLeg(j)),
                              (FreeLeg(energy, n), chi), stats)
            budget.inelastic[(m, j)] = float(abs(amp) ** 2)
    if stats is Statistics.DISTINGUISHABLE:
        for j, st in enumerate(bs.physical):
            e_cons = e_tot - st.energy
            if abs(e_cons) >= 2.0 - BAND_MARGIN:
                continue
            for m in range(1, g.n_boundary + 1):
                amp = r_amplitude(kern, (BoundLeg(j), FreeLeg(e_cons, m)),
                                  (FreeLeg(energy, n), chi), stats)
                budget.capture[(j, m)] = float(abs(amp) ** 2)
    per_rail, _ = ejection_probability(
        g, bs, energy, chi, n, stats, eps, nodes, n_quad, kern=kern)
    budget.ejection = per_rail
    return budget


# ---------------------------------------------------------------------------
# optical theorem
# ---------------------------------------------------------------------------

def optical_theorem_residual(g: Graph, bs: BoundStateSet, e1: float, n1: int,
                             e2: float, n2: int,
                             stats: Statistics = Statistics.BOSON,
                             eps: float = DEFAULT_EPS,
                             nodes: int = DEFAULT_NODES,
                             n_quad: int = 128) -> float:
    """Relative residual of R + R^dag = -R^dag R on the diagonal element.

    Both sides are expanded over the complete outgoing channel set:
    the two-free double integral (energy-conservation delta consumed)
    plus both free-bound families.
    """
    if stats is Statistics.FERMION:
        return 0.0
    e_tot = e1 + e2
    kern = kernel(g, bs, e_tot, np.inf, eps, nodes)
    c_in = (FreeLeg(e1, n1), FreeLeg(e2, n2))
    # diagonal element in the incoming basis, hence plus-family bra
    lhs = 2.0 * np.real(
        r_amplitude(kern, c_in, c_in, stats, out_family="plus"))

    energies, weights, p = _ejection_grid(kern, c_in, stats, n_quad)
    ff_factor = 0.5 if stats is Statistics.BOSON else 1.0
    rhs = -ff_factor * float(np.einsum("abk,k->", p, weights))

    fb_factor = 1.0 if stats is Statistics.BOSON else 2.0
    for j, st in enumerate(bs.physical):
        e_free = e_tot - st.energy
        if abs(e_free) >= 2.0 - BAND_MARGIN:
            continue
        for l in range(1, g.n_boundary + 1):
            amp = r_amplitude(kern, (FreeLeg(e_free, l), BoundLeg(j)), c_in,
                              stats)
            rhs -= fb_factor * abs(amp) ** 2
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return float(abs(lhs - rhs) / scale)


# ---------------------------------------------------------------------------
# two-particle cross section
# ---------------------------------------------------------------------------

@dataclass
class CrossSectionResult:
    sigma: float
    integral_i: complex
    delta: float
    rails: tuple
    centers: tuple
    n_s_panels: int


def cross_section(g: Graph, bs: BoundStateSet, e1: float, n1: int, e2: float,
                  n2: int, delta: float,
                  stats: Statistics = Statistics.BOSON,
                  eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
                  n_s_panels: int = 24, gl_order: int = 8,
                  n_inner: int = 16) -> CrossSectionResult:
    """Sigma_delta = -2 Re I for square wavepackets of half-width delta.

    The energy-conservation delta reduces the 4-fold integral to three:
    total energy s (one kernel per node), difference d and the bra-side
    split.  The s integral is a composite Gauss rule dense enough to
    resolve eps-scale structure of the kernel.
    """
    for c in (e1 - delta, e1 + delta, e2 - delta, e2 + delta):
        if not -2.0 < c < 2.0:
            raise ValueError("wavepacket window leaves the energy band")
    if stats is Statistics.FERMION:
        return CrossSectionResult(0.0, 0.0j, delta, (n1, n2), (e1, e2), 0)
    s0, d0 = e1 + e2, e1 - e2
    # bound-state pole terms give the kernel eps-scale structure in the
    # total energy; without them sqrt(eps)-scale features remain
    s_scale = 10.0 * eps if bs.physical else max(10.0 * eps, 2e-2)
    n_s_panels = max(n_s_panels, int(np.ceil(4.0 * delta / s_scale)))
    xg, wg = leggauss(gl_order)
    xi, wi = leggauss(n_inner)
    b2 = stats.b_squared

    total = 0.0 + 0.0j
    edges = np.linspace(s0 - 2.0 * delta, s0 + 2.0 * delta, n_s_panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        s_nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg
        s_w = 0.5 * (hi - lo) * wg
        for s, ws in zip(s_nodes, s_w):
            kern = kernel(g, bs, float(s), np.inf, eps, nodes)
            half = 2.0 * delta - abs(s - s0)
            if half <= 0:
                continue
            d_nodes = d0 + half * xi
            d_w = half * wi
            lo_p = max(e1 - delta, s - e2 - delta)
            hi_p = min(e1 + delta, s - e2 + delta)
            p_nodes = 0.5 * (lo_p + hi_p) + 0.5 * (hi_p - lo_p) * xi
            p_w = 0.5 * (hi_p - lo_p) * wi
            # bra legs over d, ket legs over e1'
            v1 = np.stack([
                leg_vector(g, bs, FreeLeg(0.5 * (s + d), n1), "out",
                           out_family="plus")
                * leg_vector(g, bs, FreeLeg(0.5 * (s - d), n2), "out",
                             out_family="plus")
                for d in d_nodes])
            v2 = np.stack([
                leg_vector(g, bs, FreeLeg(ep, n1), "in")
                * leg_vector(g, bs, FreeLeg(s - ep, n2), "in")
                for ep in p_nodes])
            block = np.einsum("du,uv,pv,d,p->", v1, kern.ut_inv, v2,
                              d_w, p_w, optimize=True)
            total += ws * (-2j * np.pi * b2) * block * 0.5
    integral_i = total / (4.0 * delta * delta)
    sigma = float(-2.0 * np.real(integral_i))
    return CrossSectionResult(sigma, complex(integral_i), delta, (n1, n2),
                              (e1, e2), n_s_panels)


# ---------------------------------------------------------------------------
# off-shell grids and on-shell curves
# ---------------------------------------------------------------------------

def _signed_to_leg(k_signed: float, direction: str, line_convention: bool):
    """Map a signed momentum to (energy, rail).

    Positive incoming momenta enter on rail 1.  On the line graph,
    positive *outgoing* momenta exit on rail 2 (right-movers); other
    two-rail graphs keep rail 1 for positive outgoing momenta.
    """
    k = abs(k_signed)
    energy = 2.0 * np.cos(k)
    if direction == "in":
        rail = 1 if k_signed > 0 else 2
    else:
        if line_convention:
            rail = 2 if k_signed > 0 else 1
        else:
            rail = 1 if k_signed > 0 else 2
    return FreeLeg(energy, rail)


def offshell_r_grid(g: Graph, bs: BoundStateSet, p1: float, p2: float,
                    n_k: int = 121, stats: Statistics = Statistics.BOSON,
                    eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES,
                    line_convention: bool = False, k_margin: float = 0.02):
    """Re/Im R over a signed outgoing-momentum grid at fixed incoming pair.

    Momentum-basis amplitudes; incoming momenta are signed the same way.
    Returns (k_axis, R[k1, k2]) with the energy delta stripped.
    """
    in1 = _signed_to_leg(p1, "in", line_convention)
    in2 = _signed_to_leg(p2, "in", line_convention)
    e_tot = in1.energy + in2.energy
    kern = kernel(g, bs, e_tot, np.inf, eps, nodes)
    s_in = (leg_vector(g, bs, in1, "in", basis="momentum")
            * leg_vector(g, bs, in2, "in", basis="momentum"))
    w = kern.ut_inv @ s_in

    half = np.linspace(k_margin, np.pi - k_margin, n_k // 2 + 1)
    k_axis = np.concatenate([-half[::-1], half])
    legs = [_signed_to_leg(k, "out", line_convention) for k in k_axis]
    v = np.stack([
        leg_vector(g, bs, leg, "out", basis="momentum") for leg in legs])
    grid = np.einsum("iu,ju,u->ij", v, v, w, optimize=True)
    grid *= -2j * np.pi * stats.b_squared
    return k_axis, grid


def onshell_curve(g: Graph, bs: BoundStateSet, p1: float, n1: int, p2: float,
                  n2: int, m1: int = 1, m2: int = 1, n_points: int = 401,
                  stats: Statistics = Statistics.BOSON,
                  eps: float = DEFAULT_EPS, nodes: int = DEFAULT_NODES):
    """R restricted to 2cos k1 + 2cos k2 = 2cos p1 + 2cos p2.

    Parametrized by dE = 2cos k1 - 2cos p1; returns (dE, R) arrays.
    """
    e_in1, e_in2 = 2.0 * np.cos(p1), 2.0 * np.cos(p2)
    e_tot = e_in1 + e_in2
    kern = kernel(g, bs, e_tot, np.inf, eps, nodes)
    in_legs = (FreeLeg(e_in1, n1), FreeLeg(e_in2, n2))
    s_in = (leg_vector(g, bs, in_legs[0], "in", basis="momentum")
            * leg_vector(g, bs, in_legs[1], "in", basis="momentum"))
    w = kern.ut_inv @ s_in
    lo = max(-2.0 + 1e-6, e_tot - 2.0 + 1e-6)
    hi = min(2.0 - 1e-6, e_tot + 2.0 - 1e-6)
    es = np.linspace(lo, hi, n_points)
    out = np.empty(n_points, dtype=complex)
    for i, e in enumerate(es):
        c = (leg_vector(g, bs, FreeLeg(e, m1), "out", basis="momentum")
             * leg_vector(g, bs, FreeLeg(e_tot - e, m2), "out",
                          basis="momentum"))
        out[i] = -2j * np.pi * stats.b_squared * (c @ w)
    return es - e_in1, out


def estimate_grid_period(k_axis: np.ndarray, grid: np.ndarray) -> float:
    """Dominant oscillation period of |Re R| along k1 (FFT peak)."""
    signal = np.abs(np.real(grid)).mean(axis=1)
    signal = signal - signal.mean()
    n = signal.size
    spec = np.abs(np.fft.rfft(signal * np.hanning(n)))
    dk = k_axis[1] - k_axis[0]
    freqs = np.fft.rfftfreq(n, d=dk)
    peak = 1 + int(np.argmax(spec[1:]))
    return float(1.0 / freqs[peak])


def conservation_band_fraction(k_axis, grid, p_sum: float,
                               width: float = np.pi / 20.0) -> float:
    """Fraction of sum |Re R| within |k1 + k2 - p_sum| < width/2."""
    kk1, kk2 = np.meshgrid(k_axis, k_axis, indexing="ij")
    mask = np.abs(kk1 + kk2 - p_sum) < 0.5 * width
    mass = np.abs(np.real(grid))
    return float(mass[mask].sum() / mass.sum())

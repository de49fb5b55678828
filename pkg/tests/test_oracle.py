import numpy as np
import pytest

from graphscatter import bound_states, family_from_string, make_family
from graphscatter.oracle import (
    TruncatedSystem,
    TwoParticleEvolver,
    analyze_2p,
    chebyshev_evolve,
    embed_bound_state,
    evolve_1p,
    evolve_2p_bound,
    gaussian_packet,
    momentum_density,
    predicted_1p,
    product_state,
)


@pytest.fixture(scope="module")
def sys_bridge(bridge):
    return TruncatedSystem(bridge, 240)


def test_hamiltonian_hermitian(sys_bridge):
    h = sys_bridge.h1
    assert (abs(h - h.T)).max() == 0.0


def test_chebyshev_vs_dense_expm(rng):
    g = make_family(family_from_string("AC:4"))
    system = TruncatedSystem(g, 30)
    psi0 = gaussian_packet(system, 1, 15.0, 4.0, -np.pi / 2)
    import scipy.linalg as la
    t = 7.0
    exact = la.expm(-1j * t * system.h1.toarray()) @ psi0
    approx = chebyshev_evolve(lambda v: system.h1 @ v, psi0, t,
                              system.norm_bound() + 0.1)
    assert np.linalg.norm(exact - approx) < 1e-10


def test_bridge_free_transmission(sys_bridge):
    res = evolve_1p(sys_bridge, -np.pi / 2, 12.0, 1)
    assert res.norm_drift < 1e-8
    assert res.energy_drift < 1e-6
    assert not res.inconclusive
    assert res.rail_prob[2] == pytest.approx(1.0, abs=2e-3)


def test_1p_oracle_matches_smatrix_prediction():
    g = make_family(family_from_string("AC:4"))
    system = TruncatedSystem(g, 400)
    for p0 in (-np.pi / 2, -np.pi / 4):
        res = evolve_1p(system, p0, 20.0, 1)
        pred = predicted_1p(g, p0, 20.0, 1)
        for m in (1, 2):
            assert res.rail_prob[m] == pytest.approx(pred[m], abs=2e-2)


def test_boundary_contamination_flag(bridge):
    # time the packet to sit right on the truncation boundary
    system = TruncatedSystem(bridge, 120)
    res = evolve_1p(system, -np.pi / 2, 10.0, 1, t_final=75.0, x0=30.0)
    assert res.inconclusive


def test_embedded_bound_state_is_eigenstate():
    g = make_family(family_from_string("AC:4"))
    system = TruncatedSystem(g, 200)
    bs = bound_states(g)
    for st in bs.physical:
        vec = embed_bound_state(system, st)
        resid = system.h1 @ vec - st.energy * vec
        # residual only from the truncated tail
        assert np.linalg.norm(resid) < 1e-8


def test_u0_two_particle_factorizes(bridge):
    system = TruncatedSystem(bridge, 160)
    pk = dict(rail=1, x0=60.0, sigma=8.0)
    a = gaussian_packet(system, 1, 60.0, 8.0, -np.pi / 2)
    b = gaussian_packet(system, 2, 70.0, 8.0, -np.pi / 3)
    psi2 = product_state(a, b, boson=False)
    ev = TwoParticleEvolver(system, u=0.0)
    t = 25.0
    out = ev.evolve(psi2, t)
    a_t = chebyshev_evolve(lambda v: system.h1 @ v, a, t,
                           system.norm_bound() + 0.1)
    b_t = chebyshev_evolve(lambda v: system.h1 @ v, b, t,
                           system.norm_bound() + 0.1)
    assert np.abs(out - np.outer(a_t, b_t)).max() < 1e-6


def test_hardcore_projector_enforced():
    g = make_family(family_from_string("AC:4"))
    system = TruncatedSystem(g, 60)
    a = gaussian_packet(system, 1, 25.0, 5.0, -np.pi / 2)
    chi = embed_bound_state(system, bound_states(g).physical[0])
    psi2 = product_state(a, chi, boson=True)
    ev = TwoParticleEvolver(system, u=np.inf)
    out = ev.evolve(psi2, 10.0)
    diag = out[system.internal_indices, system.internal_indices]
    assert np.abs(diag).max() < 1e-12
    assert abs(np.linalg.norm(out) - 1.0) < 1e-8


def test_momentum_density_normalized():
    p = np.linspace(-2.0, -0.5, 301)
    rho = momentum_density(p, -1.2, 15.0)
    assert np.trapezoid(rho, p) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.slow
def test_ac4_confined_transparency_time_domain():
    g = make_family(family_from_string("AC:4"))
    bs = bound_states(g)
    system = TruncatedSystem(g, 400)
    chi = bs.physical[0]
    res = evolve_2p_bound(system, chi, -np.pi / 3, 20.0, 1, u=np.inf)
    assert not res.inconclusive
    assert res.bound_retained[2] >= 0.99
    assert sum(res.both_far.values()) < 1e-6

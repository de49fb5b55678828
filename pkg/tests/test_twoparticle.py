import numpy as np
import pytest

from graphscatter import (
    BoundLeg,
    FreeLeg,
    Statistics,
    bound_states,
    family_from_string,
    j_matrix,
    kernel,
    make_family,
    omega_minus,
    psi_psi_dagger_check,
    r_amplitude,
)
from graphscatter.twoparticle import (
    SingularKernelError,
    j_matrix_deformed,
    j_matrix_direct,
    omega_pair,
)


def test_omega_identities(rng):
    w = rng.uniform(-3.5, 3.5, 50) + 1j * 10.0 ** rng.uniform(-4, -1, 50)
    om, op = omega_pair(w)
    assert np.abs(om * op - 1.0).max() < 1e-12
    assert np.all(np.abs(om) <= np.abs(op) + 1e-14)


def test_omega_closed_forms():
    assert omega_minus(3.0, 0.0, 1e-3) == pytest.approx((3 - np.sqrt(5)) / 2,
                                                        abs=2e-3)
    assert omega_minus(-3.0, 0.0, 1e-3) == pytest.approx(-(3 - np.sqrt(5)) / 2,
                                                         abs=2e-3)
    # continuity across the band: small eps keeps |omega| <= 1
    for e in np.linspace(-3.9, 3.9, 41):
        om = omega_minus(e, 0.0, 1e-3)
        assert abs(om) <= 1.0 + 1e-12


def test_psi_psi_dagger_lemma(rng):
    for spec in ("AC:4", "C:10:5", "Line:4"):
        g = make_family(family_from_string(spec))
        for p in rng.uniform(-np.pi + 0.05, -0.05, 50):
            assert psi_psi_dagger_check(g, np.exp(1j * p)) < 1e-9


def test_psi_psi_dagger_vacuous_for_bridge(bridge):
    assert psi_psi_dagger_check(bridge, np.exp(-0.4j)) == 0.0


@pytest.mark.parametrize("spec,e_total", [("Line:1", 0.9), ("AC:4", 0.9),
                                          ("AC:4", 3.1)])
def test_j_contour_matches_direct_integral(spec, e_total):
    """The closed-form kernel equals brute-force momentum quadrature."""
    g = make_family(family_from_string(spec))
    bs = bound_states(g)
    jc = j_matrix(g, bs, e_total, eps=1e-2, nodes=4096)
    jd = j_matrix_direct(g, bs, e_total, eps=1e-2, n_panels=64,
                         panel_order=16)
    rel = np.abs(jc - jd).max() / np.abs(jc).max()
    assert rel < 1e-5


def test_j_contour_convergence(ac4):
    bs = bound_states(ac4)
    j1 = j_matrix(ac4, bs, 0.9, eps=1e-3, nodes=8192)
    j2 = j_matrix(ac4, bs, 0.9, eps=1e-3, nodes=16384)
    assert np.abs(j1 - j2).max() < 1e-6


def test_j_contour_independence(ac4, c105):
    for g, e in ((ac4, 0.0), (ac4, -0.01), (c105, 0.02)):
        bs = bound_states(g)
        jc = j_matrix(g, bs, e, eps=1e-3, nodes=16384)
        jd = j_matrix_deformed(g, bs, e, eps=1e-3)
        assert np.abs(jc - jd).max() < 1e-6


def test_kernel_limits(ac4):
    bs = bound_states(ac4)
    k0 = kernel(ac4, bs, 0.9, u=0.0)
    assert np.abs(k0.ut_inv).max() == 0.0
    k_inf = kernel(ac4, bs, 0.9, u=np.inf)
    k_big = kernel(ac4, bs, 0.9, u=1e6)
    rel = np.abs(k_big.ut_inv - k_inf.ut_inv).max() / np.abs(k_inf.ut_inv).max()
    assert rel < 1e-4
    # hard-core consistency: UTinv J = -1
    resid = k_inf.ut_inv @ k_inf.j + np.eye(ac4.n_internal)
    assert np.abs(resid).max() < 1e-8


def test_fermion_amplitude_vanishes(ac4):
    bs = bound_states(ac4)
    kern = kernel(ac4, bs, 1.2)
    out_legs = (FreeLeg(0.7, 1), FreeLeg(0.5, 2))
    in_legs = (FreeLeg(0.9, 1), FreeLeg(0.3, 2))
    amp = r_amplitude(kern, out_legs, in_legs, Statistics.FERMION)
    assert amp == 0.0


def test_boson_exchange_symmetry(c105):
    bs = bound_states(c105)
    kern = kernel(c105, bs, 1.2)
    o1, o2 = FreeLeg(0.7, 1), FreeLeg(0.5, 2)
    i1, i2 = FreeLeg(0.9, 1), FreeLeg(0.3, 2)
    a = r_amplitude(kern, (o1, o2), (i1, i2), Statistics.BOSON)
    b = r_amplitude(kern, (o2, o1), (i1, i2), Statistics.BOSON)
    c = r_amplitude(kern, (o1, o2), (i2, i1), Statistics.BOSON)
    assert a == pytest.approx(b, abs=1e-12)
    assert a == pytest.approx(c, abs=1e-12)


def test_off_shell_requires_flag(ac4):
    bs = bound_states(ac4)
    kern = kernel(ac4, bs, 1.2)
    with pytest.raises(ValueError):
        r_amplitude(kern, (FreeLeg(0.8, 1), FreeLeg(0.5, 2)),
                    (FreeLeg(0.7, 1), FreeLeg(0.5, 2)), Statistics.BOSON)


def test_channel_validation(ac4):
    bs = bound_states(ac4)
    kern = kernel(ac4, bs, 1.2 + bs.physical[0].energy + bs.physical[1].energy)
    with pytest.raises(ValueError):
        r_amplitude(kern, (BoundLeg(0), BoundLeg(1)),
                    (FreeLeg(1.2, 1), FreeLeg(0.0, 2)), Statistics.BOSON,
                    allow_off_shell=True)
    kern2 = kernel(ac4, bs, 1.2)
    with pytest.raises(ValueError):
        r_amplitude(kern2, (FreeLeg(0.7, 5), FreeLeg(0.5, 2)),
                    (FreeLeg(0.7, 1), FreeLeg(0.5, 2)), Statistics.BOSON)


def test_reciprocity_on_shell(ac4):
    """R(out; in) equals R(in-reversed; out-reversed) for real symmetric H."""
    bs = bound_states(ac4)
    e1, e2 = 0.8, 0.4
    kern = kernel(ac4, bs, e1 + e2)
    fwd = r_amplitude(kern, (FreeLeg(e1, 2), FreeLeg(e2, 1)),
                      (FreeLeg(e1, 1), FreeLeg(e2, 2)), Statistics.BOSON)
    bwd = r_amplitude(kern, (FreeLeg(e1, 1), FreeLeg(e2, 2)),
                      (FreeLeg(e1, 2), FreeLeg(e2, 1)), Statistics.BOSON)
    assert fwd == pytest.approx(bwd, abs=1e-8)


def test_singular_kernel_reported(c105):
    # at the confined-pair pole E = 2 E_c the kernel J is dominated by one
    # rank-one piece; the hard-core inverse must either exist or report
    bs = bound_states(c105)
    try:
        kernel(c105, bs, 2 * bs.physical[2].energy, u=np.inf, eps=1e-12,
               nodes=256)
    except SingularKernelError as err:
        assert "singular" in str(err)

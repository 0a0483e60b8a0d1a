import math

import numpy as np
import pytest
from scipy.linalg import expm, fractional_matrix_power

from gibbslab import hilbert as hb
from gibbslab import kernels as kr
from gibbslab import model as md
from gibbslab import thermal as th


def spec_for(ham):
    return th.SpectralModel.from_hamiltonian(ham)


def random_ham(n, seed):
    rng = np.random.default_rng(seed)
    space = hb.site_space(n, 2)
    mat = hb.random_hermitian(space.dim, rng, unit_norm=False)
    return space, mat, th.SpectralModel.from_matrix(space, mat)


def test_gibbs_against_expm():
    space, mat, spec = random_ham(2, 41)
    for beta in (0.3, 1.0, 2.7):
        direct = expm(-beta * mat)
        z = np.real(np.trace(direct))
        rho = spec.gibbs(beta)
        rho.validate()
        assert np.allclose(rho.mat, direct / z, atol=1e-12)
        assert rho.log_partition == pytest.approx(math.log(z), rel=1e-12)


def test_log_partition_single_qubit():
    space = hb.site_space(1, 2)
    spec = th.SpectralModel.from_matrix(space, md.PAULI["z"])
    for beta in (0.5, 1.0, 4.0):
        assert spec.log_partition(beta) == pytest.approx(math.log(2 * math.cosh(beta)))
        rho = spec.gibbs(beta)
        want = np.diag([math.exp(-beta), math.exp(beta)]) / (2 * math.cosh(beta))
        assert np.allclose(rho.mat, want)


def test_expectation_matches_trace():
    space, mat, spec = random_ham(2, 43)
    rng = np.random.default_rng(5)
    op = hb.random_hermitian(4, rng)
    rho = spec.gibbs(1.3)
    assert spec.expectation(1.3, op) == pytest.approx(
        float(np.real(np.trace(rho.mat @ op))), abs=1e-12)


def test_evolve_closed_form():
    # under H = Z: X(t) = cos(2t) X - sin(2t) Y
    space = hb.site_space(1, 2)
    spec = th.SpectralModel.from_matrix(space, md.PAULI["z"])
    for t in (0.0, 0.3, 1.7, -2.2):
        got = spec.evolve(md.PAULI["x"], t)
        want = math.cos(2 * t) * md.PAULI["x"] - math.sin(2 * t) * md.PAULI["y"]
        assert np.allclose(got, want, atol=1e-12)


def test_evolve_is_unitary_and_composes():
    space, mat, spec = random_ham(2, 47)
    rng = np.random.default_rng(7)
    op = hb.random_hermitian(4, rng)
    once = spec.evolve(op, 0.8)
    assert hb.operator_norm(once) == pytest.approx(hb.operator_norm(op), abs=1e-12)
    twice = spec.evolve(once, 0.5)
    assert np.allclose(twice, spec.evolve(op, 1.3), atol=1e-12)


def test_symbol_identity_and_gap_linearity():
    space, mat, spec = random_ham(2, 53)
    rng = np.random.default_rng(11)
    op = hb.random_hermitian(4, rng)
    assert np.allclose(spec.apply_symbol(op, lambda om: np.ones_like(om)), op)
    got = spec.apply_symbol(op, lambda om: om)
    assert np.allclose(got, mat @ op - op @ mat, atol=1e-10)


def test_sech_transform_single_qubit_closed_form():
    # H = Z has gaps +-2 on the off-diagonal: L_X = sech(beta) X
    space = hb.site_space(1, 2)
    spec = th.SpectralModel.from_matrix(space, md.PAULI["z"])
    for beta in (0.5, 1.0, 2.0):
        got = spec.sech_transform(md.PAULI["x"], beta)
        assert np.allclose(got, md.PAULI["x"] / math.cosh(beta), atol=1e-12)


def test_sech_transform_is_contraction():
    space, mat, spec = random_ham(3, 59)
    rng = np.random.default_rng(13)
    for _ in range(10):
        op = hb.random_hermitian(space.dim, rng, unit_norm=False)
        filt = spec.sech_transform(op, 1.1)
        assert hb.operator_norm(filt) <= hb.operator_norm(op) + 1e-10


def test_rule_route_matches_symbol_route():
    space, mat, spec = random_ham(2, 61)
    rng = np.random.default_rng(17)
    op = hb.random_hermitian(4, rng)
    for kind, alpha in [("fermi", None), ("odd", None), ("log", None), ("alpha", 0.5)]:
        for beta in (0.5, 1.0, 2.0):
            rule = th.kernel_rule_for(spec, mat, op, kind, beta, alpha=alpha)
            via_rule = spec.apply_rule(op, rule)
            via_symbol = spec.apply_symbol(
                op, lambda om: kr.symbol(kind, om, beta, alpha))
            err = np.max(np.abs(via_rule - via_symbol))
            assert err < 1e-7, (kind, beta, err)


def test_dressed_signs_match_gibbs_weight_ratio():
    # the central sign pairing: O + int g = rho^{-1/2} L_O rho^{1/2}
    space, mat, spec = random_ham(2, 67)
    rng = np.random.default_rng(19)
    op = hb.random_hermitian(4, rng)
    for beta in (0.4, 1.0, 2.3):
        rho = spec.gibbs(beta).mat
        sqrt_rho = fractional_matrix_power(rho, 0.5)
        inv_sqrt = fractional_matrix_power(rho, -0.5)
        filt = spec.sech_transform(op, beta)
        plus = inv_sqrt @ filt @ sqrt_rho
        minus = sqrt_rho @ filt @ inv_sqrt
        assert np.allclose(spec.dressed(op, beta, +1), plus, atol=1e-8)
        assert np.allclose(spec.dressed(op, beta, -1), minus, atol=1e-8)
        assert np.allclose(spec.dressed_exact(op, beta, +1), plus, atol=1e-8)
        assert np.allclose(spec.dressed_exact(op, beta, -1), minus, atol=1e-8)


def test_dressed_rule_route_agrees():
    space, mat, spec = random_ham(2, 71)
    rng = np.random.default_rng(23)
    op = hb.random_hermitian(4, rng)
    beta = 1.0
    rule = th.kernel_rule_for(spec, mat, op, "odd", beta)
    got = spec.dressed(op, beta, +1, rule=rule)
    want = spec.dressed(op, beta, +1)
    assert np.max(np.abs(got - want)) < 1e-7


def test_dressed_average_recovers_smoothed():
    # (dressed(+) + dressed(-)) / 2 = O, and their difference is the integral
    space, mat, spec = random_ham(2, 73)
    rng = np.random.default_rng(29)
    op = hb.random_hermitian(4, rng)
    plus = spec.dressed(op, 1.2, +1)
    minus = spec.dressed(op, 1.2, -1)
    assert np.allclose((plus + minus) / 2, op, atol=1e-12)


def test_localized_sech_transform_support_and_contraction():
    ham = md.tfi_chain(4)
    spec = spec_for(ham)
    op = md.site_observable(ham.space, "z", 0)
    region = ham.lattice.ball([0], 2)
    loc = th.localized_sech_transform(spec, op, 1.0, region)
    # supported on the region: localizing again on it changes nothing
    assert np.allclose(hb.localize(ham.space, loc, region), loc)
    assert hb.operator_norm(loc) <= 1.0 + 1e-10
    full = spec.sech_transform(op.mat, 1.0)
    # the compression is close to the exact filter when the ball is large
    big = th.localized_sech_transform(spec, op, 1.0, ham.lattice.ball([0], 3))
    assert hb.operator_norm(big - full) < 1e-12


def test_localized_dressed_keeps_bare_part():
    ham = md.tfi_chain(4)
    spec = spec_for(ham)
    op = md.site_observable(ham.space, "z", 1)
    region = ham.lattice.ball([1], 1)
    loc = th.localized_dressed(spec, op, 0.8, +1, region)
    integral = loc - op.mat
    assert np.allclose(hb.localize(ham.space, integral, region), integral)
    whole = th.localized_dressed(spec, op, 0.8, +1, list(range(4)))
    assert np.allclose(whole, spec.dressed(op.mat, 0.8, +1), atol=1e-12)


def test_ad_norm_and_delta_t():
    space = hb.site_space(1, 2)
    h = md.PAULI["z"]
    assert th.ad_norm(h, md.PAULI["x"]) == pytest.approx(2.0)
    assert th.ad_norm(h, md.PAULI["z"]) == pytest.approx(0.0, abs=1e-14)
    assert th.default_delta_t(h, md.PAULI["x"], 5.0) == pytest.approx(0.5)
    assert th.default_delta_t(h, md.PAULI["z"], 5.0) == pytest.approx(5.0)


def test_spectral_width_sets_rule_cap():
    ham = md.tfi_chain(4)
    spec = spec_for(ham)
    assert spec.spectral_width == pytest.approx(
        float(spec.energies[-1] - spec.energies[0]))
    op = md.site_observable(ham.space, "x", 0)
    rule = th.kernel_rule_for(spec, ham.matrix, op, "fermi", 1.0)
    base = kr.quadrature_rule("fermi", 1.0)
    assert rule.node_count >= base.node_count


def test_from_matrix_rejects_non_hermitian():
    space = hb.site_space(1, 2)
    with pytest.raises(ValueError):
        th.SpectralModel.from_matrix(space, np.array([[0, 1], [0, 0]], dtype=complex))

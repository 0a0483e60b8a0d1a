import math

import numpy as np
import pytest

from gibbslab import coherence as ch
from gibbslab import hilbert as hb
from gibbslab import kernels as kr
from gibbslab import model as md
from gibbslab import thermal as th

ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def qubit_spec():
    space = hb.site_space(1, 2)
    return th.SpectralModel.from_matrix(space, md.PAULI["z"])


def test_skew_information_single_qubit_closed_form():
    # H = Z, K = X: I_alpha = 1 - (l+^{1-a} l-^a + l-^{1-a} l+^a)
    spec = qubit_spec()
    for beta in (0.4, 1.0, 2.5):
        z = 2.0 * math.cosh(beta)
        lp, lm = math.exp(beta) / z, math.exp(-beta) / z
        for a in ALPHAS:
            want = 1.0 - (lp ** (1 - a) * lm ** a + lm ** (1 - a) * lp ** a)
            got = ch.skew_information(spec, beta, md.PAULI["x"], a)
            assert got == pytest.approx(want, abs=1e-12), (beta, a)


def test_skew_information_vanishes_at_endpoints_and_for_conserved():
    spec = qubit_spec()
    rng = np.random.default_rng(2)
    op = hb.random_hermitian(2, rng)
    assert ch.skew_information(spec, 1.0, op, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert ch.skew_information(spec, 1.0, op, 1.0) == pytest.approx(0.0, abs=1e-12)
    # K commuting with H carries no skew information at any alpha
    for a in ALPHAS:
        assert ch.skew_information(spec, 1.0, md.PAULI["z"], a) == pytest.approx(
            0.0, abs=1e-12)


def test_skew_information_nonnegative_and_peaks_inside():
    ham = md.tfi_chain(3)
    spec = th.SpectralModel.from_hamiltonian(ham)
    op = md.extensive_observable(ham.space, "z")
    vals = [ch.skew_information(spec, 1.0, op, a) for a in ALPHAS]
    assert all(v >= -1e-12 for v in vals)
    assert vals[2] >= vals[1] - 1e-12 or vals[2] >= vals[3] - 1e-12
    # symmetry alpha <-> 1 - alpha
    assert vals[1] == pytest.approx(vals[3], rel=1e-10)


def test_kernel_route_matches_spectral_route():
    ham = md.xxz_chain(4)
    spec = th.SpectralModel.from_hamiltonian(ham)
    op_a = md.site_observable(ham.space, "z", 0)
    op_b = md.site_observable(ham.space, "x", 3)
    for beta in (0.5, 1.0, 2.0):
        for a in ALPHAS:
            direct = ch.skew_correlation(spec, beta, op_a, op_b, a)
            via_symbol = ch.skew_correlation_kernel(spec, beta, op_a, op_b, a)
            assert via_symbol == pytest.approx(direct, abs=1e-10), (beta, a)
    # quadrature route as a third, fully numerical path
    beta, a = 1.0, 0.5
    rule = th.kernel_rule_for(spec, ham.matrix, op_a, "alpha", beta, alpha=a)
    via_rule = ch.skew_correlation_kernel(spec, beta, op_a, op_b, a, rule=rule)
    assert via_rule == pytest.approx(
        ch.skew_correlation(spec, beta, op_a, op_b, a), abs=1e-7)


def test_state_routes_match_gibbs_routes():
    ham = md.tfi_chain(3)
    spec = th.SpectralModel.from_hamiltonian(ham)
    rho = spec.gibbs(1.3).mat
    op_a = md.site_observable(ham.space, "z", 0)
    op_b = md.site_observable(ham.space, "x", 2)
    for a in ALPHAS:
        assert ch.state_skew_correlation(rho, op_a, op_b, a) == pytest.approx(
            ch.skew_correlation(spec, 1.3, op_a, op_b, a), abs=1e-10)
    assert ch.state_fisher_information(rho, op_a) == pytest.approx(
        ch.fisher_information(spec, 1.3, op_a), abs=1e-10)


def test_fisher_equals_variance_on_pure_states():
    rng = np.random.default_rng(5)
    for _ in range(5):
        psi = hb.random_pure(6, rng)
        rho = np.outer(psi, psi.conj())
        op = hb.random_hermitian(6, rng)
        var = (psi.conj() @ (op @ op) @ psi - (psi.conj() @ op @ psi) ** 2)
        assert ch.state_fisher_information(rho, op) == pytest.approx(
            float(np.real(4 * var)), abs=1e-9)


def test_fisher_skips_dead_pairs():
    rng = np.random.default_rng(7)
    rho = hb.random_density(8, rng, rank=2)
    op = hb.random_hermitian(8, rng)
    val = ch.state_fisher_information(rho, op)
    assert math.isfinite(val)
    assert val >= 0.0


def test_fisher_quarter_below_twice_root_skew():
    rng = np.random.default_rng(11)
    for _ in range(20):
        rho = hb.random_density(6, rng, rank=int(rng.integers(1, 7)))
        op = hb.random_hermitian(6, rng)
        fisher = ch.state_fisher_information(rho, op)
        skew_half = ch.state_skew_information(rho, op, 0.5)
        assert fisher / 4.0 <= 2.0 * skew_half + 1e-9


def test_skew_information_is_convex_in_the_state():
    rng = np.random.default_rng(13)
    for _ in range(10):
        rho1 = hb.random_density(4, rng)
        rho2 = hb.random_density(4, rng)
        op = hb.random_hermitian(4, rng)
        p = float(rng.uniform(0.1, 0.9))
        mix = p * rho1 + (1 - p) * rho2
        for a in (0.25, 0.5, 0.9):
            lhs = ch.state_skew_information(mix, op, a)
            rhs = (p * ch.state_skew_information(rho1, op, a)
                   + (1 - p) * ch.state_skew_information(rho2, op, a))
            assert lhs <= rhs + 1e-10


def test_trivial_two_sided_bound():
    rng = np.random.default_rng(17)
    for _ in range(10):
        rho = hb.random_density(4, rng)
        op_a = hb.random_hermitian(4, rng)
        op_b = hb.random_hermitian(4, rng)
        for a in ALPHAS:
            q = ch.state_skew_correlation(rho, op_a, op_b, a)
            assert abs(q) <= kr.TRIVIAL_SKEW_BOUND + 1e-10


def test_skew_additive_on_product_states():
    # I_alpha(rho1 x rho2, K1 + K2) = I_alpha(rho1, K1) + I_alpha(rho2, K2)
    rng = np.random.default_rng(19)
    rho1, rho2 = hb.random_density(2, rng), hb.random_density(2, rng)
    k1, k2 = hb.random_hermitian(2, rng), hb.random_hermitian(2, rng)
    big = np.kron(rho1, rho2)
    k_tot = np.kron(k1, np.eye(2)) + np.kron(np.eye(2), k2)
    for a in (0.25, 0.5, 0.8):
        want = (ch.state_skew_information(rho1, k1, a)
                + ch.state_skew_information(rho2, k2, a))
        assert ch.state_skew_information(big, k_tot, a) == pytest.approx(
            want, abs=1e-10)


def test_alpha_outside_unit_interval_refused():
    spec = qubit_spec()
    with pytest.raises(ValueError):
        ch.skew_information(spec, 1.0, md.PAULI["x"], 1.2)
    with pytest.raises(ValueError):
        ch.state_skew_correlation(np.eye(2) / 2, md.PAULI["x"], md.PAULI["x"],
                                  -0.1)


def test_zero_power_convention_on_singular_states():
    # rank-deficient state at alpha = 0 must still give exactly zero skew
    rho = np.diag([0.7, 0.3, 0.0, 0.0]).astype(complex)
    op = np.kron(md.PAULI["x"], md.PAULI["x"])
    assert ch.state_skew_information(rho, op, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert ch.state_skew_information(rho, op, 1.0) == pytest.approx(0.0, abs=1e-12)
    mid = ch.state_skew_information(rho, op, 0.5)
    assert mid >= 0.0

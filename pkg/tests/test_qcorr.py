import math

import numpy as np
import pytest

from gibbslab import hilbert as hb
from gibbslab import model as md
from gibbslab import qcorr as qc
from gibbslab import thermal as th

BELL = np.zeros(4, dtype=complex)
BELL[0] = BELL[3] = 1 / math.sqrt(2)
ZZ_A = np.kron(md.PAULI["z"], np.eye(2))
ZZ_B = np.kron(np.eye(2), md.PAULI["z"])


def test_correlation_on_known_states():
    rho_bell = np.outer(BELL, BELL.conj())
    assert qc.correlation(rho_bell, ZZ_A, ZZ_B) == pytest.approx(1.0)
    assert qc.correlation(BELL, ZZ_A, ZZ_B) == pytest.approx(1.0)
    product = np.kron(np.diag([0.8, 0.2]), np.diag([0.8, 0.2]))
    assert qc.correlation(product, ZZ_A, ZZ_B) == pytest.approx(0.0, abs=1e-14)
    classical = 0.5 * np.diag([1.0, 0, 0, 0]) + 0.5 * np.diag([0, 0, 0, 1.0])
    assert qc.correlation(classical, ZZ_A, ZZ_B) == pytest.approx(1.0)


def test_joint_eigenbasis_with_degeneracies():
    rng = np.random.default_rng(3)
    u = hb.haar_unitary(8, rng)
    # strong shared degeneracies in both spectra
    a = u @ np.diag([1.0, 1, 1, 1, 2, 2, 2, 2]) @ u.conj().T
    b = u @ np.diag([5.0, 5, 7, 7, 5, 5, 7, 7]) @ u.conj().T
    vecs = qc.joint_eigenbasis(a, b)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(8), atol=1e-12)
    assert qc.offdiagonal_residual(vecs, a) < 1e-10
    assert qc.offdiagonal_residual(vecs, b) < 1e-10


def test_joint_eigenbasis_on_disjoint_supports():
    ham = md.tfi_chain(5)
    spec = th.SpectralModel.from_hamiltonian(ham)
    op_a = md.site_observable(ham.space, "z", 0)
    op_b = md.site_observable(ham.space, "x", 4)
    la = hb.localize(ham.space, spec.sech_transform(op_a.mat, 1.0), [0, 1])
    lb = hb.localize(ham.space, spec.sech_transform(op_b.mat, 1.0), [3, 4])
    vecs = qc.joint_eigenbasis(la, lb)
    assert qc.offdiagonal_residual(vecs, la) < 1e-10
    assert qc.offdiagonal_residual(vecs, lb) < 1e-10


def test_certificate_radii():
    assert qc.certificate_radii(2) == (0, 0)
    assert qc.certificate_radii(3) == (1, 1)
    assert qc.certificate_radii(4) == (1, 1)
    assert qc.certificate_radii(5) == (2, 2)
    assert qc.certificate_radii(7) == (3, 3)
    for dist in range(2, 10):
        ra, rb = qc.certificate_radii(dist)
        assert ra + rb < dist


def test_square_root_ensemble_is_a_decomposition():
    rng = np.random.default_rng(11)
    rho = hb.random_density(8, rng)
    evals, evecs = np.linalg.eigh(rho)
    rho_half = (evecs * np.sqrt(np.clip(evals, 0, None))) @ evecs.conj().T
    basis = hb.haar_unitary(8, rng)
    op_a = hb.random_hermitian(8, rng)
    op_b = hb.random_hermitian(8, rng)
    w, corrs, skipped = qc.square_root_ensemble(rho_half, basis, op_a, op_b)
    assert np.sum(w) + skipped == pytest.approx(1.0, abs=1e-12)
    assert np.all(w > 0)
    # the weighted state average reconstructs rho
    cols = rho_half @ basis
    assert np.allclose(cols @ cols.conj().T, rho, atol=1e-12)


def test_certificate_bound_holds_on_chain():
    ham = md.tfi_chain(6)
    spec = th.SpectralModel.from_hamiltonian(ham)
    for beta in (0.5, 1.0):
        op_a = md.site_observable(ham.space, "z", 0)
        op_b = md.site_observable(ham.space, "x", 5)
        res = qc.certificate(spec, ham.lattice, beta, op_a, op_b)
        assert res.satisfied
        assert res.average <= res.bound + 1e-12
        assert res.bound <= 1.0 + 1e-12
        assert res.basis_residual < 1e-9
        assert res.radius_a == 2 and res.radius_b == 2
        assert res.skipped_weight < 1e-10
        assert res.components <= ham.space.dim


def test_certificate_average_dominates_plain_correlation_bound():
    # the ensemble average can never beat zero but must stay tiny at range
    ham = md.tfi_chain(7)
    spec = th.SpectralModel.from_hamiltonian(ham)
    op_a = md.site_observable(ham.space, "z", 0)
    op_b = md.site_observable(ham.space, "z", 6)
    res = qc.certificate(spec, ham.lattice, 0.5, op_a, op_b)
    assert 0.0 <= res.average < 5e-3


def test_certificate_rejects_overlapping_balls():
    ham = md.tfi_chain(5)
    spec = th.SpectralModel.from_hamiltonian(ham)
    op_a = md.site_observable(ham.space, "z", 1)
    op_b = md.site_observable(ham.space, "x", 3)
    with pytest.raises(ValueError):
        qc.certificate(spec, ham.lattice, 1.0, op_a, op_b,
                       radius_a=2, radius_b=2)


def test_roof_pure_state_has_no_freedom():
    rho = np.outer(BELL, BELL.conj())
    res = qc.minimize_roof(rho, ZZ_A, ZZ_B, seed=1)
    assert res.value == pytest.approx(1.0, abs=1e-9)
    assert res.pure_value == pytest.approx(1.0, abs=1e-9)


def test_roof_kills_classical_correlations():
    # equal mixture of |00> and |11>: classically correlated, roof is zero
    rho = 0.5 * np.diag([1.0, 0, 0, 0]) + 0.5 * np.diag([0, 0, 0, 1.0])
    res = qc.minimize_roof(rho, ZZ_A, ZZ_B, seed=2)
    assert abs(qc.correlation(rho, ZZ_A, ZZ_B)) == pytest.approx(1.0)
    assert res.value < 1e-9


def test_roof_vanishes_on_product_states():
    rng = np.random.default_rng(7)
    rho = np.kron(hb.random_density(2, rng), hb.random_density(2, rng))
    res = qc.minimize_roof(rho, ZZ_A, ZZ_B, seed=3)
    assert res.value < 1e-7


def test_roof_never_exceeds_trivial_ensemble():
    rng = np.random.default_rng(13)
    for seed in range(4):
        rho = hb.random_density(4, rng)
        op_a = np.kron(hb.random_hermitian(2, rng), np.eye(2))
        op_b = np.kron(np.eye(2), hb.random_hermitian(2, rng))
        res = qc.minimize_roof(rho, op_a, op_b, seed=seed)
        assert res.value <= res.trivial_value + 1e-12
        assert res.value <= res.pure_value + 1e-12


def test_roof_ensemble_reconstructs_state():
    rng = np.random.default_rng(17)
    rho = hb.random_density(4, rng, rank=3)
    res = qc.minimize_roof(rho, ZZ_A, ZZ_B, seed=5, mode="pure")
    acc = np.zeros((4, 4), dtype=complex)
    for p, sig in res.ensemble:
        assert p > 0
        assert hb.is_hermitian(sig)
        acc += p * sig
    assert np.allclose(acc, rho, atol=1e-9)


def test_roof_warm_start_never_hurts():
    ham = md.tfi_chain(2)
    spec = th.SpectralModel.from_hamiltonian(ham)
    rho1 = spec.gibbs(0.9).mat
    rho2 = spec.gibbs(1.0).mat
    base = qc.minimize_roof(rho2, ZZ_A, ZZ_B, seed=0, starts=1)
    prev = qc.minimize_roof(rho1, ZZ_A, ZZ_B, seed=0)
    warm = qc.minimize_roof(rho2, ZZ_A, ZZ_B, seed=0, starts=1,
                            warm_frame=prev.frame)
    assert warm.value <= base.value + 1e-10


def test_roof_dimension_cap():
    rho = np.eye(128) / 128.0
    with pytest.raises(ValueError):
        qc.minimize_roof(rho, np.eye(128), np.eye(128))


def test_roof_mode_validation():
    with pytest.raises(ValueError):
        qc.minimize_roof(np.eye(2) / 2, np.eye(2), np.eye(2), mode="bogus")

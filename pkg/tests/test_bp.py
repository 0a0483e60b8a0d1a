"""Tests for the Gibbs decoupling flow and the separating-state pipeline."""

import math

import numpy as np
import pytest

from gibbslab import bp
from gibbslab import hilbert as hb
from gibbslab import kernels as kr
from gibbslab import model as md
from gibbslab.thermal import SpectralModel


def _identity_error(ham, beta, cut, tau_steps, window=None):
    """Trace-norm error of the flow intertwining identity."""
    space = ham.space
    h = bp.cut_matrix(ham, range(cut))
    free = SpectralModel.from_matrix(space, bp.decoupled_matrix(ham, [range(cut)]))
    full = SpectralModel.from_hamiltonian(ham)
    scale = math.exp(free.log_partition(beta) - full.log_partition(beta))
    if window is None:
        flow = bp.flow_operator(space, ham.matrix, h, beta, tau_steps)
    else:
        smalls = bp.localized_flow(space, ham.matrix, [(window, h)], beta,
                                   tau_steps)
        flow = bp.embed_flow(space, [window], smalls)
    approx = scale * (flow @ free.gibbs(beta).mat @ flow.conj().T)
    return hb.trace_norm(full.gibbs(beta).mat - approx)


def test_flow_identity_tau_doubling():
    ham = md.tfi_chain(6)
    errs = {k: _identity_error(ham, 1.0, 3, k) for k in (2, 4, 8)}
    assert errs[4] / errs[2] <= 0.6
    assert errs[8] / errs[4] <= 0.6
    assert errs[8] < 1e-4


def test_flow_generator_is_hermitian():
    ham = md.xxz_chain(5)
    spec = SpectralModel.from_hamiltonian(ham)
    phi = bp.flow_generator(spec, bp.cut_matrix(ham, range(2)), 1.5)
    assert hb.is_hermitian(phi)


def test_full_window_flow_matches_global():
    ham = md.tfi_chain(6)
    space = ham.space
    h = bp.cut_matrix(ham, range(3))
    whole = tuple(range(6))
    smalls = bp.localized_flow(space, ham.matrix, [(whole, h)], 1.0,
                               tau_steps=4)
    local = bp.embed_flow(space, [whole], smalls)
    direct = bp.flow_operator(space, ham.matrix, h, 1.0, tau_steps=4)
    assert np.max(np.abs(local - direct)) <= 1e-10


def test_localized_error_decays_with_window():
    ham = md.tfi_chain(8)
    beta = 1.0
    errs = []
    for ell in (1, 2, 3):
        window = tuple(range(4 - ell, 4 + ell))
        errs.append(_identity_error(ham, beta, 4, 8, window=window))
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] < 0.5 * errs[0]
    growth = kr.OperatorGrowth(prefactor=2.0, velocity=3.0, decay_rate=1.5)
    bc = kr.BoundConstants(beta=beta, growth=growth,
                           g=ham.interaction_strength, k=ham.locality, d0=2)
    for ell, err in zip((1, 2, 3), errs):
        assert err <= kr.window_truncation_rhs(bc, ell)


def test_flow_norm_within_exponential_cap():
    ham = md.xxz_chain(6)
    beta = 2.0
    h = bp.cut_matrix(ham, range(3))
    smalls = bp.localized_flow(ham.space, ham.matrix,
                               [(tuple(range(2, 5)), h)], beta, tau_steps=6)
    cap = math.exp(2.0 * ham.interaction_strength * ham.locality * beta)
    assert bp.flow_norm(smalls) <= cap


def test_golden_thompson_style_ratio():
    for build, beta in ((md.tfi_chain, 1.0), (md.heisenberg_chain, 2.0)):
        ham = build(6)
        free = bp.decoupled_matrix(ham, [range(3)])
        ratio = bp.golden_thompson_ratio(ham.space, ham.matrix, free, beta)
        cap = math.exp(4.0 * ham.interaction_strength * ham.locality * beta)
        assert 1.0 / cap <= ratio <= cap


def test_decoupled_matrix_removes_exactly_the_cut():
    ham = md.tfi_chain(7)
    diff = ham.matrix - bp.decoupled_matrix(ham, [range(3), range(5)])
    expected = bp.cut_matrix(ham, range(3)) + bp.cut_matrix(ham, range(5))
    assert np.max(np.abs(diff - expected)) <= 1e-12


def test_ppt_mixture_basic_chain():
    ham = md.tfi_chain(6)
    res = bp.ppt_mixture(ham, 0.5, 3, buffer=1, tau_steps=8)
    assert res.transpose_deficit <= 1e-12
    assert res.satisfied
    assert 0.0 < res.relative_entropy < 0.01
    assert np.real(np.trace(res.sigma)) == pytest.approx(1.0, abs=1e-10)
    cap = math.exp(2.0 * ham.interaction_strength * ham.locality * 0.5)
    assert res.flow_norm <= cap
    # the dressing must improve on the bare decoupled reference
    spec = SpectralModel.from_hamiltonian(ham)
    blocks = []
    for region in (range(2), range(2, 4), range(4, 6)):
        sub = hb.SiteSpace(2, 2)
        mat = ham.restricted_matrix(ham.terms_within(region), region)
        blocks.append(SpectralModel.from_matrix(sub, mat).gibbs(0.5).mat)
    bare = np.kron(np.kron(blocks[0], blocks[1]), blocks[2])
    s_bare = hb.relative_entropy(spec.gibbs(0.5).mat, bare)
    assert res.relative_entropy < s_bare


def test_ppt_mixture_exercises_transpose_shift():
    res = bp.ppt_mixture(md.xxz_chain(6), 2.0, 3, buffer=1, tau_steps=6)
    assert res.shift > 0.1
    assert res.transpose_deficit <= 1e-12
    assert math.isfinite(res.relative_entropy)


def test_ppt_mixture_mix_weight_restores_support():
    res = bp.ppt_mixture(md.heisenberg_chain(6), 4.0, 3, buffer=1,
                         mix_weight=1e-4, tau_steps=4)
    assert math.isfinite(res.relative_entropy)
    assert res.transpose_deficit <= 1e-12


def test_ppt_mixture_with_constants_derives_buffer_and_rhs():
    ham = md.tfi_chain(6)
    growth = kr.OperatorGrowth(prefactor=2.0, velocity=3.0, decay_rate=1.5)
    bc = kr.BoundConstants(beta=0.5, growth=growth,
                           g=ham.interaction_strength, k=ham.locality, d0=2)
    res = bp.ppt_mixture(ham, 0.5, 3, constants=bc, dist=2.0)
    assert res.buffer == 1
    assert math.isfinite(res.rhs)
    assert res.satisfied
    assert res.mix_weight == 1.0  # the decoupling bound saturates at this size


def test_buffer_width_formula():
    growth = kr.OperatorGrowth(prefactor=2.0, velocity=3.0, decay_rate=1.5)
    bc = kr.BoundConstants(beta=1.0, growth=growth, g=3.0, k=2, d0=2)
    span = 16.0 * math.log(2.0) * bc.xi ** 2
    assert bp.buffer_width(bc, 4.0, 2) == 1
    assert bp.buffer_width(bc, 1.5 * span, 2) == 2


def test_flow_rejects_bad_inputs():
    ham = md.tfi_chain(6)
    with pytest.raises(ValueError):
        bp.flow_operator(ham.space, ham.matrix,
                         bp.cut_matrix(ham, range(3)), 5.0)
    with pytest.raises(ValueError):
        bp.ppt_mixture(ham, 0.5, 3, buffer=2)
    with pytest.raises(ValueError):
        bp.ppt_mixture(ham, 0.5, 0, buffer=1)
    with pytest.raises(ValueError):
        bp.ppt_mixture(ham, 0.5, 3)
    with pytest.raises(ValueError):
        bp.localized_flow(ham.space, ham.matrix,
                          [((0, 1), np.eye(64)), ((1, 2), np.eye(64))], 1.0)

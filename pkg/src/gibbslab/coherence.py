"""Skew correlations, skew information, and quantum Fisher information.

For a state with spectral decomposition ``rho = sum_s lam_s |s><s|`` and
observables ``A``, ``B`` written in that eigenbasis, the alpha-interpolated
skew correlation (``alpha`` in ``[0, 1]``) is

    Q_alpha(A, B) = tr(rho A B) - sum_{s s'} lam_s^{1-alpha} lam_{s'}^alpha
                                            A_{s s'} B_{s' s}

with the convention ``0**0 = 1``.  Setting ``A = B = K`` Hermitian gives the
skew information ``I_alpha(rho, K) >= 0``; the quantum Fisher information is

    F(rho, K) = 2 sum_{s s'} (lam_s - lam_{s'})**2 / (lam_s + lam_{s'})
                             |K_{s s'}|**2

with pairs of vanishing ``lam_s + lam_{s'}`` skipped.

Two independent evaluation routes are kept for ``Q_alpha`` on Gibbs states:
the spectral-power formula above, and the kernel-commutator identity

    Q_alpha(A, B) = tr(rho [G_A, B]),
    G_A = int k_alpha(t) A(t) dt + delta_weight * A,

with ``k_alpha`` the interpolation kernel; its frequency symbol times the
gap matrix reproduces the spectral powers exactly.
"""

from __future__ import annotations

import numpy as np

from . import hilbert as hb
from . import kernels as kr
from . import thermal as th

PAIR_FLOOR = 1e-12


def _as_mat(op) -> np.ndarray:
    return op.mat if isinstance(op, hb.OperatorMatrix) else np.asarray(op)


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1], got %r" % (alpha,))
    return float(alpha)


def _powers(lam: np.ndarray, expo: float) -> np.ndarray:
    """Eigenvalue powers with ``0**0 = 1`` and negative noise clipped."""
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    return lam ** expo


def _wyd_core(lam, a_eig, b_eig, alpha: float) -> float:
    """``Q_alpha`` from weights and eigenbasis matrices."""
    plain = np.sum(lam * np.diag(a_eig @ b_eig))
    left = _powers(lam, 1.0 - alpha)
    right = _powers(lam, alpha)
    cross = np.sum((left[:, None] * a_eig * right[None, :]) * b_eig.T)
    return float(np.real(plain - cross))


def _fisher_core(lam, k_eig) -> float:
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    pair = lam[:, None] + lam[None, :]
    diff = lam[:, None] - lam[None, :]
    keep = pair > PAIR_FLOOR
    ratio = np.zeros_like(pair)
    ratio[keep] = diff[keep] ** 2 / pair[keep]
    return float(2.0 * np.sum(ratio * np.abs(k_eig) ** 2))


# ---------------------------------------------------------------------------
# Gibbs-state interface
# ---------------------------------------------------------------------------

def skew_correlation(spec: th.SpectralModel, beta: float, op_a, op_b,
                     alpha: float) -> float:
    """``Q_alpha(O_A, O_B)`` of the Gibbs state, spectral-power route."""
    alpha = _check_alpha(alpha)
    lam = spec.gibbs_weights(beta)
    return _wyd_core(lam, spec.to_eigenbasis(_as_mat(op_a)),
                     spec.to_eigenbasis(_as_mat(op_b)), alpha)


def skew_correlation_kernel(spec: th.SpectralModel, beta: float, op_a, op_b,
                            alpha: float,
                            rule: kr.QuadratureRule | None = None) -> float:
    """``Q_alpha(O_A, O_B)`` through the kernel-commutator identity."""
    alpha = _check_alpha(alpha)
    mat_a, mat_b = _as_mat(op_a), _as_mat(op_b)
    if rule is None:
        filtered = spec.apply_symbol(
            mat_a, lambda om: kr.alpha_symbol(om, beta, alpha))
    else:
        filtered = spec.apply_rule(mat_a, rule)
    rho = spec.gibbs(beta).mat
    return float(np.real(np.trace(rho @ (filtered @ mat_b - mat_b @ filtered))))


def skew_information(spec: th.SpectralModel, beta: float, op,
                     alpha: float) -> float:
    """``I_alpha(rho_beta, K) = Q_alpha(K, K)`` for Hermitian ``K``."""
    alpha = _check_alpha(alpha)
    lam = spec.gibbs_weights(beta)
    k_eig = spec.to_eigenbasis(_as_mat(op))
    return _wyd_core(lam, k_eig, k_eig, alpha)


def fisher_information(spec: th.SpectralModel, beta: float, op) -> float:
    """Quantum Fisher information of the Gibbs state for Hermitian ``K``."""
    lam = spec.gibbs_weights(beta)
    return _fisher_core(lam, spec.to_eigenbasis(_as_mat(op)))


# ---------------------------------------------------------------------------
# generic-state interface
# ---------------------------------------------------------------------------

def _state_eigs(rho):
    rho = np.asarray(rho, dtype=complex)
    lam, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    return np.clip(lam, 0.0, None), vecs


def state_skew_correlation(rho, op_a, op_b, alpha: float) -> float:
    alpha = _check_alpha(alpha)
    lam, vecs = _state_eigs(rho)
    a_eig = vecs.conj().T @ _as_mat(op_a) @ vecs
    b_eig = vecs.conj().T @ _as_mat(op_b) @ vecs
    return _wyd_core(lam, a_eig, b_eig, alpha)


def state_skew_information(rho, op, alpha: float) -> float:
    return state_skew_correlation(rho, op, op, alpha)


def state_fisher_information(rho, op) -> float:
    lam, vecs = _state_eigs(rho)
    return _fisher_core(lam, vecs.conj().T @ _as_mat(op) @ vecs)

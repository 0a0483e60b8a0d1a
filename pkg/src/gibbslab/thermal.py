"""Spectral machinery for Gibbs states and kernel-filtered observables.

Everything here runs in the energy eigenbasis of a fixed Hamiltonian.  With
``H = V diag(E) V*`` and ``O~ = V* O V``, a Heisenberg-evolved operator has
matrix elements ``O~_{ss'} e^{i (E_s - E_{s'}) t}``, so any kernel integral
``int k(t) O(t) dt`` acts elementwise through the kernel's frequency symbol
evaluated at the gap matrix ``Omega_{ss'} = E_s - E_{s'}``.  Two independent
routes are provided and kept separate on purpose:

* ``apply_symbol``: the closed-form symbol evaluated on the gap matrix;
* ``apply_rule``: numerical time quadrature of ``k(t) O(t)``, organized as
  ``2 Re sum_j c_j u_j u_j*`` with ``u_j = exp(i E t_j)`` so the node sum is
  a single matrix product per chunk.

Dressed observables: with ``L_O`` the sech-filtered operator
(symbol ``sech(beta omega / 2)``) and ``rho`` the Gibbs state,

* ``rho^{+1/2} L_O rho^{-1/2} = O - int g(t) O(t) dt``, elementwise
  multiplier ``1 - tanh(beta Omega / 2) = 2 lam_row / (lam_row + lam_col)``;
* ``rho^{-1/2} L_O rho^{+1/2} = O + int g(t) O(t) dt``, elementwise
  multiplier ``1 + tanh(beta Omega / 2) = 2 lam_col / (lam_row + lam_col)``;

with ``g`` the odd kernel.  ``dressed(O, beta, sign)`` implements
``O + sign * int g(t) O(t) dt``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from . import hilbert as hb
from . import kernels as kr
from .model import Hamiltonian

_RULE_CHUNK = 512


@dataclass
class SpectralModel:
    """Eigendecomposition of a Hamiltonian with kernel-filter operations."""

    space: hb.SiteSpace
    energies: np.ndarray
    vectors: np.ndarray

    @classmethod
    def from_matrix(cls, space: hb.SiteSpace, mat: np.ndarray) -> "SpectralModel":
        if not hb.is_hermitian(mat):
            raise ValueError("hamiltonian matrix must be hermitian")
        energies, vectors = np.linalg.eigh(mat)
        return cls(space, energies, hb.fix_phases(vectors))

    @classmethod
    def from_hamiltonian(cls, ham: Hamiltonian) -> "SpectralModel":
        return cls.from_matrix(ham.space, ham.matrix)

    # -- basic spectral data --------------------------------------------

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    @property
    def spectral_width(self) -> float:
        """Largest gap ``E_max - E_min``; the quadrature oscillation cap."""
        return float(self.energies[-1] - self.energies[0])

    def omega(self) -> np.ndarray:
        """Gap matrix ``Omega_{ss'} = E_s - E_{s'}`` (built on demand)."""
        e = self.energies
        return e[:, None] - e[None, :]

    def to_eigenbasis(self, op) -> np.ndarray:
        op = op.mat if isinstance(op, (hb.OperatorMatrix, hb.DensityMatrix)) else op
        return self.vectors.conj().T @ op @ self.vectors

    def from_eigenbasis(self, mat) -> np.ndarray:
        return self.vectors @ mat @ self.vectors.conj().T

    # -- Gibbs states -----------------------------------------------------

    def log_partition(self, beta: float) -> float:
        return float(logsumexp(-beta * self.energies))

    def gibbs_weights(self, beta: float) -> np.ndarray:
        w = -beta * self.energies
        w = w - np.max(w)
        lam = np.exp(w)
        return lam / lam.sum()

    def gibbs(self, beta: float) -> hb.DensityMatrix:
        lam = self.gibbs_weights(beta)
        mat = (self.vectors * lam) @ self.vectors.conj().T
        return hb.DensityMatrix(self.space, mat, self.log_partition(beta))

    def expectation(self, beta: float, op) -> float:
        op_e = self.to_eigenbasis(op)
        return float(np.real(np.sum(self.gibbs_weights(beta) * np.diag(op_e))))

    # -- Heisenberg evolution and kernel filters ---------------------------

    def evolve(self, op, t: float) -> np.ndarray:
        """Heisenberg evolution ``e^{iHt} O e^{-iHt}``."""
        o_e = self.to_eigenbasis(op)
        u = np.exp(1j * self.energies * t)
        return self.from_eigenbasis((u[:, None] * o_e) * u.conj()[None, :])

    def apply_symbol(self, op, symbol_fn) -> np.ndarray:
        """Elementwise filter: ``V (K(Omega) . O~) V*`` for a symbol function."""
        o_e = self.to_eigenbasis(op)
        return self.from_eigenbasis(np.asarray(symbol_fn(self.omega())) * o_e)

    def rule_symbol_matrix(self, rule: kr.QuadratureRule) -> np.ndarray:
        """Quadrature reconstruction of the symbol on the gap matrix."""
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for lo in range(0, rule.node_count, _RULE_CHUNK):
            t_blk = rule.times[lo:lo + _RULE_CHUNK]
            c_blk = rule.coefficients[lo:lo + _RULE_CHUNK]
            phases = np.exp(1j * np.outer(self.energies, t_blk))
            acc += (phases * c_blk) @ phases.conj().T
        return 2.0 * np.real(acc) + rule.point_mass

    def apply_rule(self, op, rule: kr.QuadratureRule) -> np.ndarray:
        """Kernel integral by time quadrature (independent of the symbol)."""
        o_e = self.to_eigenbasis(op)
        return self.from_eigenbasis(self.rule_symbol_matrix(rule) * o_e)

    # -- named filters ------------------------------------------------------

    def sech_transform(self, op, beta: float) -> np.ndarray:
        """The thermally smoothed observable (symbol ``sech(beta omega/2)``)."""
        return self.apply_symbol(op, lambda om: kr.fermi_symbol(om, beta))

    def dressed(self, op, beta: float, sign: int,
                rule: kr.QuadratureRule | None = None) -> np.ndarray:
        """``O + sign * int g(t) O(t) dt`` with ``g`` the odd kernel.

        ``sign=+1`` equals ``rho^{-1/2} L_O rho^{+1/2}``; ``sign=-1`` equals
        ``rho^{+1/2} L_O rho^{-1/2}``.  With a quadrature rule the integral
        runs through time nodes instead of the closed-form symbol.
        """
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        mat = op.mat if isinstance(op, hb.OperatorMatrix) else np.asarray(op)
        if rule is None:
            integral = self.apply_symbol(mat, lambda om: kr.odd_symbol(om, beta))
        else:
            integral = self.apply_rule(mat, rule)
        return mat + sign * integral

    def dressed_exact(self, op, beta: float, sign: int) -> np.ndarray:
        """The same dressing through Gibbs-weight ratios (route check).

        Elementwise ``2 lam_col / (lam_row + lam_col)`` for ``sign=+1`` and
        ``2 lam_row / (lam_row + lam_col)`` for ``sign=-1``.
        """
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        lam = self.gibbs_weights(beta)
        o_e = self.to_eigenbasis(op)
        pair = lam[:, None] + lam[None, :]
        num = 2.0 * (lam[None, :] if sign == +1 else lam[:, None])
        return self.from_eigenbasis((num / pair) * o_e)


# ---------------------------------------------------------------------------
# localized filters
# ---------------------------------------------------------------------------

def localized_sech_transform(spec: SpectralModel, op, beta: float,
                             region) -> np.ndarray:
    """Smoothed observable compressed onto ``region`` (its reduced twirl).

    Localization is linear and trace-preserving, so localizing the exact
    filtered operator equals filtering with the localized evolution.
    """
    return hb.localize(spec.space, spec.sech_transform(op, beta), region)


def localized_dressed(spec: SpectralModel, op, beta: float, sign: int,
                      region, rule: kr.QuadratureRule | None = None) -> np.ndarray:
    """Dressed observable with only the integral part localized.

    The bare ``O`` keeps its exact (smaller) support; the odd-kernel integral
    is compressed onto ``region``.
    """
    mat = op.mat if isinstance(op, hb.OperatorMatrix) else np.asarray(op)
    dressed_full = spec.dressed(mat, beta, sign, rule=rule)
    return mat + hb.localize(spec.space, dressed_full - mat, region)


# ---------------------------------------------------------------------------
# helper scales
# ---------------------------------------------------------------------------

def ad_norm(ham_matrix, op) -> float:
    """``|[H, O]|``: the energy scale of the observable's motion."""
    h = ham_matrix.matrix if isinstance(ham_matrix, Hamiltonian) else np.asarray(ham_matrix)
    mat = op.mat if isinstance(op, hb.OperatorMatrix) else np.asarray(op)
    return hb.operator_norm(h @ mat - mat @ h)


def default_delta_t(ham_matrix, op, beta: float) -> float:
    """First-panel width for kernel quadrature: ``min(beta, |O|/|[H,O]|)``."""
    mat = op.mat if isinstance(op, hb.OperatorMatrix) else np.asarray(op)
    motion = ad_norm(ham_matrix, op)
    if motion <= 0:
        return beta
    return min(beta, hb.operator_norm(mat) / motion)


def kernel_rule_for(spec: SpectralModel, ham, op, kind: str, beta: float,
                    alpha: float | None = None,
                    eps: float = kr.QUADRATURE_EPS, order: int = 16) -> kr.QuadratureRule:
    """Quadrature rule adapted to one observable on one spectrum."""
    return kr.quadrature_rule(kind, beta, alpha=alpha,
                              delta_t=default_delta_t(ham, op, beta),
                              omega_max=spec.spectral_width,
                              eps=eps, order=order)

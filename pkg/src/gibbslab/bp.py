"""Gibbs-state decoupling flows and the separating-state pipeline.

For a Hamiltonian ``H`` and the sum ``h`` of interaction terms crossing a
cut, the interpolation ``H_tau = H - (1 - tau) h`` obeys the exact identity

    d/dtau e^{-beta H_tau} = phi(tau) e^{-beta H_tau}
                             + e^{-beta H_tau} phi(tau)

with the Hermitian generator

    phi(tau) = -(beta/2) Int F_beta(t) e^{i H_tau t} h e^{-i H_tau t} dt,

where ``F_beta`` is the log-singular kernel with Fourier symbol
``tanh(beta omega/2) / (beta omega/2)``.  The tau-ordered product ``Phi`` of
``exp(dtau phi)`` factors therefore intertwines the coupled and decoupled
Gibbs operators, ``e^{-beta H} = Phi e^{-beta (H - h)} Phi^dag``; a midpoint
discretization converges at second order in the step count.

Localizing each per-cut generator onto a window of sites around its cut
yields an operator that factorizes over disjoint windows.  The pipeline
:func:`ppt_mixture` uses two such windows, one strictly inside each half of
a bipartition, so its output state is positive under partial transpose by
construction and is certified numerically anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert as hb
from . import kernels as kr
from .thermal import SpectralModel

FLOW_BETA_CAP = 4.0


def _check_beta(beta: float):
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta > FLOW_BETA_CAP:
        raise ValueError("decoupling flow capped at beta = %g; the generator "
                         "exponents grow too fast beyond that" % FLOW_BETA_CAP)


def _maybe_real(mat: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(mat):
        scale = float(np.max(np.abs(mat))) or 1.0
        if float(np.max(np.abs(mat.imag))) <= 1e-13 * scale:
            return np.ascontiguousarray(mat.real)
    return mat


def _expm_hermitian(mat: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    return (vecs * np.exp(lam)) @ vecs.conj().T


def cut_terms(ham, region) -> list:
    """Interaction terms crossing the boundary of ``region``."""
    return ham.terms_crossing(region)


def cut_matrix(ham, region) -> np.ndarray:
    return _maybe_real(ham.matrix_of(cut_terms(ham, region)))


def flow_generator(spec: SpectralModel, boundary, beta: float,
                   rule: kr.QuadratureRule | None = None) -> np.ndarray:
    """The Hermitian mixing generator ``phi`` for one interpolation point.

    ``spec`` must diagonalize the interpolated Hamiltonian the generator is
    evaluated at; ``rule`` switches from the spectral symbol to explicit
    time quadrature of the log-singular kernel.
    """
    if rule is None:
        filt = spec.apply_symbol(boundary,
                                 lambda om: kr.log_symbol(om, beta))
    else:
        filt = spec.apply_rule(boundary, rule)
    return _maybe_real(-(beta / 2.0) * filt)


def _tau_midpoints(tau_steps: int) -> np.ndarray:
    if tau_steps < 1:
        raise ValueError("need at least one interpolation step")
    return (np.arange(tau_steps) + 0.5) / tau_steps


def flow_operator(space: hb.SiteSpace, ham_matrix, boundary, beta: float,
                  tau_steps: int = 8) -> np.ndarray:
    """Midpoint product of the full-register decoupling flow (latest left)."""
    _check_beta(beta)
    ham_matrix = _maybe_real(np.asarray(ham_matrix))
    boundary = _maybe_real(np.asarray(boundary))
    dtau = 1.0 / tau_steps
    flow = np.eye(space.dim, dtype=ham_matrix.dtype)
    for tau in _tau_midpoints(tau_steps):
        h_tau = ham_matrix - (1.0 - tau) * boundary
        spec = SpectralModel.from_matrix(space, h_tau)
        phi = flow_generator(spec, boundary, beta)
        flow = _expm_hermitian(dtau * phi) @ flow
    return flow


def localized_flow(space: hb.SiteSpace, ham_matrix, parts, beta: float,
                   tau_steps: int = 8) -> list:
    """Window-restricted decoupling flows, one per cut.

    ``parts`` is a sequence of ``(window_sites, boundary_matrix)`` pairs with
    pairwise disjoint windows.  Each step diagonalizes the shared
    interpolated Hamiltonian once, filters every boundary through it,
    restricts the generator to its window (partial trace over the rest,
    normalized), and multiplies the window-local exponential onto that
    window's running product.  Returns the list of window-local operators.
    """
    _check_beta(beta)
    ham_matrix = _maybe_real(np.asarray(ham_matrix))
    windows = [tuple(sorted(space.check_sites(w))) for w, _ in parts]
    seen = set()
    for w in windows:
        if seen & set(w):
            raise ValueError("flow windows must be disjoint")
        seen |= set(w)
    boundaries = [_maybe_real(np.asarray(b)) for _, b in parts]
    total_boundary = sum(boundaries)
    dtau = 1.0 / tau_steps
    smalls = [np.eye(space.d0 ** len(w)) for w in windows]
    for tau in _tau_midpoints(tau_steps):
        h_tau = ham_matrix - (1.0 - tau) * total_boundary
        spec = SpectralModel.from_matrix(space, h_tau)
        for i, (w, b) in enumerate(zip(windows, boundaries)):
            phi = flow_generator(spec, b, beta)
            phi_small = hb.localize_small(space, phi, w)
            smalls[i] = _expm_hermitian(dtau * phi_small) @ smalls[i]
    return smalls


def embed_flow(space: hb.SiteSpace, windows, smalls) -> np.ndarray:
    """Product of window-local flow operators on the full register."""
    out = None
    for w, small in zip(windows, smalls):
        emb = hb.embed_local(space, small, sorted(w))
        out = emb if out is None else _maybe_real(emb @ out)
    return _maybe_real(out) if out is not None else np.eye(space.dim)


def flow_norm(smalls) -> float:
    """Operator norm of the factorized flow (product over windows)."""
    out = 1.0
    for small in smalls:
        out *= hb.operator_norm(small)
    return float(out)


def decoupled_matrix(ham, regions) -> np.ndarray:
    """``H`` minus every term crossing any of the given cuts, without
    double-counting terms that cross several."""
    removed = []
    seen = set()
    for region in regions:
        for t in ham.terms_crossing(region):
            key = (t.sites, t.label)
            if key not in seen:
                seen.add(key)
                removed.append(t)
    return _maybe_real(ham.matrix - ham.matrix_of(removed))


def golden_thompson_ratio(space: hb.SiteSpace, ham_matrix, decoupled,
                          beta: float) -> float:
    """``tr e^{-beta (H - h)} / tr e^{-beta H}`` via log-partition functions."""
    full = SpectralModel.from_matrix(space, _maybe_real(np.asarray(ham_matrix)))
    free = SpectralModel.from_matrix(space, _maybe_real(np.asarray(decoupled)))
    return math.exp(free.log_partition(beta) - full.log_partition(beta))


# ---------------------------------------------------------------------------
# separating-state pipeline for a chain bipartition
# ---------------------------------------------------------------------------

@dataclass
class MixtureResult:
    """Output of :func:`ppt_mixture` with its certificates."""

    sigma: np.ndarray
    relative_entropy: float
    rhs: float
    transpose_deficit: float
    shift: float
    mix_weight: float
    buffer: int
    cuts: tuple
    flow_norm: float
    satisfied: bool


def buffer_width(constants: kr.BoundConstants, dist: float, locality: int) -> int:
    """Window half-width for a target cut separation: ``max(k - 1,
    ceil(dist / (16 ln d0 xi^2)))``."""
    derived = math.ceil(dist / (16.0 * math.log(constants.d0)
                                * constants.xi ** 2))
    return max(locality - 1, derived)


def ppt_mixture(ham, beta: float, left_size: int, *, constants=None,
                dist: float | None = None, buffer: int | None = None,
                mix_weight: float | None = None, tau_steps: int = 8,
                tol: float = 1e-9) -> MixtureResult:
    """Build a certified positive-partial-transpose approximation of a chain
    Gibbs state across the ``left_size`` bipartition.

    Two decoupling cuts are placed ``buffer`` sites inside each half.  The
    reference state is the product of the three decoupled Gibbs blocks with
    the middle block shifted to the PPT cone; the window-localized flows,
    each supported strictly inside one half, dress it back toward the true
    state without leaving the PPT cone.  The result records the exact
    relative entropy to the true Gibbs state, the bound it is checked
    against (infinite when ``constants`` is omitted), and the partial
    transpose certificate of the output.
    """
    _check_beta(beta)
    space = ham.space
    n = space.n
    if not 0 < left_size < n:
        raise ValueError("bipartition must split the chain")
    if buffer is None:
        if constants is None or dist is None:
            raise ValueError("need either an explicit buffer or constants "
                             "plus a target distance")
        buffer = buffer_width(constants, dist, ham.locality)
    if buffer < ham.locality - 1:
        raise ValueError("buffer below the interaction range")
    if 2 * buffer > left_size or 2 * buffer > n - left_size:
        raise ValueError("buffer %d does not fit inside both halves" % buffer)
    if dist is None:
        dist = 2.0 * buffer
    m1, m2 = left_size - buffer, left_size + buffer
    left = tuple(range(m1))
    mid = tuple(range(m1, m2))
    right = tuple(range(m2, n))
    prefix1, prefix2 = tuple(range(m1)), tuple(range(m2))
    h1, h2 = cut_matrix(ham, prefix1), cut_matrix(ham, prefix2)
    crossing_keys = [{(t.sites, t.label) for t in ham.terms_crossing(p)}
                     for p in (prefix1, prefix2)]
    if crossing_keys[0] & crossing_keys[1]:
        raise ValueError("a term crosses both cuts; enlarge the buffer")

    window1 = tuple(range(m1 - buffer, m1 + buffer))
    window2 = tuple(range(m2 - buffer, m2 + buffer))
    smalls = localized_flow(space, ham.matrix, [(window1, h1), (window2, h2)],
                            beta, tau_steps)

    def block_gibbs(region):
        sub = hb.SiteSpace(len(region), space.d0)
        mat = _maybe_real(ham.restricted_matrix(ham.terms_within(region),
                                                region))
        return SpectralModel.from_matrix(sub, mat).gibbs(beta).mat

    rho_mid = block_gibbs(mid)
    d_half = space.d0 ** buffer
    shift = float(np.clip(
        -np.linalg.eigvalsh(hb.partial_transpose_bipartite(
            rho_mid, d_half, d_half))[0], 0.0, None))
    sigma_mid = (rho_mid + shift * np.eye(rho_mid.shape[0])) \
        / (1.0 + shift * rho_mid.shape[0])

    reference = sigma_mid
    if left:
        reference = np.kron(block_gibbs(left), reference)
    if right:
        reference = np.kron(reference, block_gibbs(right))

    dressing = embed_flow(space, [window1, window2], smalls)
    mixed = dressing @ reference @ dressing.conj().T
    sigma = mixed / float(np.real(np.trace(mixed)))

    d_a, d_b = space.d0 ** left_size, space.d0 ** (n - left_size)
    pt_min = float(np.linalg.eigvalsh(
        hb.partial_transpose_bipartite(sigma, d_a, d_b))[0])
    deficit = max(0.0, -pt_min)

    if mix_weight is None:
        mix_weight = (min(1.0, kr.decoupling_delta(constants, dist))
                      if constants is not None else 0.0)
    dim = space.dim
    sigma_prime = (1.0 - mix_weight) * sigma \
        + mix_weight * np.eye(dim) / dim
    rho = SpectralModel.from_hamiltonian(ham).gibbs(beta)
    rel = hb.relative_entropy(rho.mat, sigma_prime)
    rhs = (kr.chain_mixing_rhs(constants, dim, dist)
           if constants is not None else math.inf)
    return MixtureResult(sigma=sigma_prime, relative_entropy=rel, rhs=rhs,
                         transpose_deficit=deficit, shift=shift,
                         mix_weight=float(mix_weight), buffer=int(buffer),
                         cuts=(m1, m2), flow_norm=flow_norm(smalls),
                         satisfied=bool(rel <= rhs and deficit <= tol))

"""Convex-roof correlation measures on thermal states.

For observables ``O_A``, ``O_B`` on disjoint regions and a state ``rho``, the
connected correlation of one state is

    corr(sigma) = tr(sigma O_A O_B) - tr(sigma O_A) tr(sigma O_B)

and the convex-roof correlation is the infimum of ``sum_m p_m |corr_m|``
over decompositions ``rho = sum_m p_m sigma_m``.  Two complementary tools:

* :func:`certificate` builds one explicit decomposition from the square-root
  unraveling of ``rho`` in a joint eigenbasis of the *localized* thermally
  smoothed observables, and evaluates a rigorous bound on its average in
  terms of the two localization errors and one dressed-commutator norm::

      sum_m p_m |corr_m| <= 3 (delta_A + delta_B) / 2 + |[D_A, D_B]| / 4

  clamped at ``|O_A| |O_B|`` (each component obeys that bound outright).
  Here ``delta_X`` is the operator-norm cost of compressing the smoothed
  observable onto a ball around ``X`` and ``D_A, D_B`` are the two
  half-dressed observables with opposite dressing signs.

* :func:`minimize_roof` is a variational (upper-bound) minimizer over pure
  decompositions ``rho = sum_m b_m b_m*``, parametrized as ``B = sqrt(rho) V``
  with isometric ``V``, optimized by Jacobi-style two-column rotations, with
  an optional greedy merge pass over mixed coarse-grainings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import hilbert as hb
from . import thermal as th

WEIGHT_FLOOR = 1e-14
ROOF_DIM_CAP = 64


# ---------------------------------------------------------------------------
# connected correlations
# ---------------------------------------------------------------------------

def correlation(state, op_a, op_b) -> float:
    """Connected correlation ``<O_A O_B> - <O_A><O_B>`` of one state.

    ``state`` may be a density matrix or a pure-state vector.
    """
    a = op_a.mat if isinstance(op_a, hb.OperatorMatrix) else np.asarray(op_a)
    b = op_b.mat if isinstance(op_b, hb.OperatorMatrix) else np.asarray(op_b)
    state = np.asarray(state)
    if state.ndim == 1:
        va = state.conj() @ (a @ state)
        vb = state.conj() @ (b @ state)
        vab = state.conj() @ (a @ (b @ state))
    else:
        va = np.trace(state @ a)
        vb = np.trace(state @ b)
        vab = np.trace(state @ a @ b)
    return float(np.real(vab - va * vb))


# ---------------------------------------------------------------------------
# joint eigenbasis of commuting observables
# ---------------------------------------------------------------------------

def _cluster_bounds(keys, tol: float) -> list:
    """Split ``0..n`` at indices where any key array jumps by more than tol."""
    n = keys[0].size
    scales = [max(1.0, float(np.max(np.abs(k)))) for k in keys]
    bounds = [0]
    for i in range(1, n):
        if any(abs(k[i] - k[i - 1]) > tol * s for k, s in zip(keys, scales)):
            bounds.append(i)
    bounds.append(n)
    return bounds


def _diagonalize_within(vecs: np.ndarray, bounds: list,
                        target: np.ndarray) -> np.ndarray:
    """Rotate each column cluster so ``target`` is diagonal inside it."""
    out = vecs.copy()
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi - lo < 2:
            continue
        block_vecs = vecs[:, lo:hi]
        block = block_vecs.conj().T @ target @ block_vecs
        block = (block + block.conj().T) / 2.0
        _, rot = np.linalg.eigh(block)
        out[:, lo:hi] = block_vecs @ rot
    return out


def joint_eigenbasis(mat_a: np.ndarray, mat_b: np.ndarray,
                     cluster_tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis diagonalizing two commuting Hermitian matrices.

    Diagonalizes ``A + pi B`` (the irrational mix separates generic joint
    eigenspaces), then re-diagonalizes ``A`` inside each degenerate cluster
    of the mix, and finally ``B`` inside each cluster still degenerate in
    both the mix eigenvalue and the refreshed ``A`` eigenvalue.
    """
    mix = mat_a + math.pi * mat_b
    w, vecs = np.linalg.eigh(mix)
    vecs = _diagonalize_within(vecs, _cluster_bounds([w], cluster_tol), mat_a)
    a_diag = np.real(np.einsum("ji,jk,ki->i", vecs.conj(), mat_a, vecs))
    vecs = _diagonalize_within(vecs, _cluster_bounds([w, a_diag], cluster_tol),
                               mat_b)
    return hb.fix_phases(vecs)


def offdiagonal_residual(vecs: np.ndarray, mat: np.ndarray) -> float:
    t = vecs.conj().T @ mat @ vecs
    return float(np.max(np.abs(t - np.diag(np.diag(t)))))


# ---------------------------------------------------------------------------
# certificate decomposition
# ---------------------------------------------------------------------------

def certificate_radii(dist: int) -> tuple:
    """Ball radii for the two localized observables at region distance ``dist``.

    Both radii are ``max(0, ceil(dist/2 - 1))`` so the balls stay disjoint.
    """
    r = max(0, math.ceil(dist / 2.0 - 1.0))
    return r, r


@dataclass
class CertificateResult:
    """Outcome of the constructive decomposition and its analytic budget."""

    average: float
    bound: float
    bound_raw: float
    delta_a: float
    delta_b: float
    commutator_norm: float
    radius_a: int
    radius_b: int
    components: int
    skipped_weight: float
    basis_residual: float

    @property
    def satisfied(self) -> bool:
        return self.average <= self.bound + 1e-10


def square_root_ensemble(rho_half: np.ndarray, basis: np.ndarray,
                         op_a: np.ndarray, op_b: np.ndarray,
                         weight_floor: float = WEIGHT_FLOOR):
    """Weights and connected correlations of the square-root unraveling.

    Components are ``psi_m = rho^{1/2} |m>`` normalized; ``p_m = <m|rho|m>``.
    Returns ``(weights, correlations, skipped_weight)`` keeping components
    with ``p_m > weight_floor``.
    """
    cols = rho_half @ basis
    weights = np.real(np.einsum("im,im->m", cols.conj(), cols))
    keep = weights > weight_floor
    skipped = float(np.sum(weights[~keep]))
    cols = cols[:, keep]
    w = weights[keep]
    norm_cols = cols / np.sqrt(w)[None, :]
    ea = np.real(np.einsum("im,ij,jm->m", norm_cols.conj(), op_a, norm_cols))
    eb = np.real(np.einsum("im,ij,jm->m", norm_cols.conj(), op_b, norm_cols))
    eab = np.real(np.einsum("im,ij,jm->m", norm_cols.conj(), op_a @ op_b,
                            norm_cols))
    return w, eab - ea * eb, skipped


def certificate(spec: th.SpectralModel, lattice, beta: float,
                op_a: hb.OperatorMatrix, op_b: hb.OperatorMatrix,
                radius_a: int | None = None,
                radius_b: int | None = None) -> CertificateResult:
    """Build the certified decomposition for two disjoint-region observables.

    The decomposition measures ``rho^{1/2}`` in a joint eigenbasis of the
    smoothed observables compressed onto disjoint balls ``A[r_a]``, ``B[r_b]``.
    """
    region_a = sorted(op_a.support)
    region_b = sorted(op_b.support)
    if not region_a or not region_b:
        raise ValueError("observables must carry their support sets")
    dist = lattice.distance(region_a, region_b)
    if radius_a is None or radius_b is None:
        radius_a, radius_b = certificate_radii(dist)
    ball_a = lattice.ball(region_a, radius_a)
    ball_b = lattice.ball(region_b, radius_b)
    if set(ball_a) & set(ball_b):
        raise ValueError("localization balls overlap; shrink the radii")

    smooth_a = spec.sech_transform(op_a.mat, beta)
    smooth_b = spec.sech_transform(op_b.mat, beta)
    local_a = hb.localize(spec.space, smooth_a, ball_a)
    local_b = hb.localize(spec.space, smooth_b, ball_b)
    delta_a = hb.operator_norm(smooth_a - local_a)
    delta_b = hb.operator_norm(smooth_b - local_b)

    basis = joint_eigenbasis(local_a, local_b)
    residual = max(offdiagonal_residual(basis, local_a),
                   offdiagonal_residual(basis, local_b))

    lam = spec.gibbs_weights(beta)
    rho_half = (spec.vectors * np.sqrt(lam)) @ spec.vectors.conj().T
    weights, corrs, skipped = square_root_ensemble(rho_half, basis,
                                                   op_a.mat, op_b.mat)
    average = float(np.sum(weights * np.abs(corrs)))

    dressed_a = spec.dressed(op_a.mat, beta, +1)
    dressed_b = spec.dressed(op_b.mat, beta, -1)
    comm = hb.operator_norm(dressed_a @ dressed_b - dressed_b @ dressed_a)

    bound_raw = 1.5 * (delta_a + delta_b) + comm / 4.0
    clamp = hb.operator_norm(op_a.mat) * hb.operator_norm(op_b.mat)
    return CertificateResult(average=average,
                             bound=min(bound_raw, clamp),
                             bound_raw=bound_raw,
                             delta_a=delta_a, delta_b=delta_b,
                             commutator_norm=comm,
                             radius_a=radius_a, radius_b=radius_b,
                             components=int(weights.size),
                             skipped_weight=skipped,
                             basis_residual=residual)


# ---------------------------------------------------------------------------
# variational roof minimization
# ---------------------------------------------------------------------------

@dataclass
class RoofResult:
    """Variational upper bound on the convex-roof correlation."""

    value: float
    pure_value: float
    trivial_value: float
    frame: np.ndarray
    ensemble: list = field(default_factory=list)
    sweeps: int = 0


def _ensemble_objective(cols: np.ndarray, op_a, op_b) -> float:
    w = np.real(np.einsum("im,im->m", cols.conj(), cols))
    keep = w > WEIGHT_FLOOR
    cols = cols[:, keep]
    w = w[keep]
    nc = cols / np.sqrt(w)[None, :]
    ea = np.real(np.einsum("im,ij,jm->m", nc.conj(), op_a, nc))
    eb = np.real(np.einsum("im,ij,jm->m", nc.conj(), op_b, nc))
    eab = np.real(np.einsum("im,ij,jm->m", nc.conj(), op_a @ op_b, nc))
    return float(np.sum(w * np.abs(eab - ea * eb)))


def _pair_objective(g_a, g_b, g_ab, g_id, theta, phi):
    """Objective restricted to one column pair, from 2x2 Gram blocks."""
    c, s = math.cos(theta), math.sin(theta)
    e = np.exp(1j * phi)
    u = np.array([[c, -s * np.conj(e)], [s * e, c]])
    total = 0.0
    for col in range(2):
        v = u[:, col]
        p = float(np.real(v.conj() @ g_id @ v))
        if p <= WEIGHT_FLOOR:
            continue
        ea = float(np.real(v.conj() @ g_a @ v)) / p
        eb = float(np.real(v.conj() @ g_b @ v)) / p
        eab = float(np.real(v.conj() @ g_ab @ v)) / p
        total += p * abs(eab - ea * eb)
    return total


def _sweep_pairs(cols, mats, rng):
    """One Jacobi sweep over all column pairs; mutates ``cols`` in place."""
    op_a, op_b, op_ab = mats
    m = cols.shape[1]
    proj = {}
    improved = 0.0
    order = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for (i, j) in order:
        pair = cols[:, [i, j]]
        g_id = pair.conj().T @ pair
        if np.real(np.trace(g_id)) < WEIGHT_FLOOR:
            continue
        g_a = pair.conj().T @ (op_a @ pair)
        g_b = pair.conj().T @ (op_b @ pair)
        g_ab = pair.conj().T @ (op_ab @ pair)
        base = _pair_objective(g_a, g_b, g_ab, g_id, 0.0, 0.0)

        best = (base, 0.0, 0.0)
        for theta in np.linspace(0.0, math.pi / 2.0, 7)[1:]:
            for phi in np.linspace(0.0, 2.0 * math.pi, 6, endpoint=False):
                val = _pair_objective(g_a, g_b, g_ab, g_id, theta, phi)
                if val < best[0]:
                    best = (val, theta, phi)
        res = minimize(lambda x: _pair_objective(g_a, g_b, g_ab, g_id, *x),
                       np.array(best[1:]), method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-12,
                                "maxiter": 200})
        if res.fun < min(base, best[0]) - 1e-15:
            theta, phi = res.x
        elif best[0] < base - 1e-15:
            theta, phi = best[1], best[2]
        else:
            continue
        c, s = math.cos(theta), math.sin(theta)
        e = np.exp(1j * phi)
        u = np.array([[c, -s * np.conj(e)], [s * e, c]])
        cols[:, [i, j]] = pair @ u
        improved += base - _pair_objective(g_a, g_b, g_ab, g_id, theta, phi)
    return improved


def _greedy_merge(cols, op_a, op_b):
    """Coarse-grain the pure ensemble into mixed parts while that helps.

    Returns the merged ensemble as ``(weights, densities, value)``.
    """
    w = np.real(np.einsum("im,im->m", cols.conj(), cols))
    keep = w > WEIGHT_FLOOR
    parts = [cols[:, m:m + 1] @ cols[:, m:m + 1].conj().T
             for m in np.nonzero(keep)[0]]
    weights = list(w[keep])

    def part_cost(sig, p):
        if p <= WEIGHT_FLOOR:
            return 0.0
        return p * abs(correlation(sig / p, op_a, op_b))

    costs = [part_cost(sig, p) for sig, p in zip(parts, weights)]
    while len(parts) > 1:
        best_gain, best_pair = 1e-14, None
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                merged = parts[i] + parts[j]
                gain = costs[i] + costs[j] - part_cost(
                    merged, weights[i] + weights[j])
                if gain > best_gain:
                    best_gain, best_pair = gain, (i, j)
        if best_pair is None:
            break
        i, j = best_pair
        parts[i] = parts[i] + parts[j]
        weights[i] = weights[i] + weights[j]
        costs[i] = part_cost(parts[i], weights[i])
        del parts[j], weights[j], costs[j]
    value = float(sum(costs))
    ensemble = [(p, sig / p) for sig, p in zip(parts, weights)]
    return value, ensemble


def minimize_roof(rho: np.ndarray, op_a, op_b, mode: str = "mixed",
                  starts: int = 3, seed: int = 0, max_sweeps: int = 12,
                  tol: float = 1e-10, frame_cap: int = 2 * ROOF_DIM_CAP,
                  warm_frame: np.ndarray | None = None) -> RoofResult:
    """Variational upper bound on the convex-roof correlation of ``rho``.

    ``mode='pure'`` restricts to pure decompositions; ``mode='mixed'`` also
    tries greedy coarse-grainings and the trivial one-part ensemble, and can
    only return a value at most the pure one.  A ``warm_frame`` (the ``frame``
    of a previous result) joins the starting points, which makes the optimum
    monotone along parameter sweeps.
    """
    if mode not in ("pure", "mixed"):
        raise ValueError("mode must be 'pure' or 'mixed'")
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if dim > ROOF_DIM_CAP:
        raise ValueError("roof minimization capped at dimension %d" % ROOF_DIM_CAP)
    op_a = op_a.mat if isinstance(op_a, hb.OperatorMatrix) else np.asarray(op_a)
    op_b = op_b.mat if isinstance(op_b, hb.OperatorMatrix) else np.asarray(op_b)
    mats = (op_a, op_b, op_a @ op_b)

    evals, evecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    keep = evals > 1e-13
    rank = int(np.sum(keep))
    root = evecs[:, keep] * np.sqrt(np.clip(evals[keep], 0.0, None))
    n_cols = min(max(2 * rank, rank + 1), frame_cap)

    rng = np.random.default_rng(seed)
    trivial = abs(correlation(rho, op_a, op_b))

    frames = []
    eye = np.zeros((rank, n_cols), dtype=complex)
    eye[:, :rank] = np.eye(rank)
    frames.append(eye)
    for _ in range(max(0, starts - 1)):
        frames.append(hb.haar_unitary(n_cols, rng)[:rank, :])
    if warm_frame is not None:
        wf = np.asarray(warm_frame, dtype=complex)
        if wf.shape[0] == rank:
            frames.append(wf)

    best_val, best_cols, best_sweeps = math.inf, None, 0
    for frame in frames:
        cols = root @ frame
        sweeps = 0
        for sweeps in range(1, max_sweeps + 1):
            gain = _sweep_pairs(cols, mats, rng)
            if gain < tol:
                break
        val = _ensemble_objective(cols, op_a, op_b)
        if val < best_val:
            best_val, best_cols, best_sweeps = val, cols, sweeps

    pure_value = best_val
    w = np.real(np.einsum("im,im->m", best_cols.conj(), best_cols))
    frame_out = np.linalg.pinv(root) @ best_cols
    ensemble = [(float(p), best_cols[:, m:m + 1] @ best_cols[:, m:m + 1].conj().T / p)
                for m, p in enumerate(w) if p > WEIGHT_FLOOR]

    value = pure_value
    if mode == "mixed":
        merged_value, merged_ensemble = _greedy_merge(best_cols, op_a, op_b)
        if merged_value < value:
            value, ensemble = merged_value, merged_ensemble
        if trivial < value:
            value, ensemble = trivial, [(1.0, rho)]
    return RoofResult(value=value, pure_value=pure_value,
                      trivial_value=trivial, frame=frame_out,
                      ensemble=ensemble, sweeps=best_sweeps)

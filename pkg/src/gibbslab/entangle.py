"""Bipartite entanglement measures and PPT diagnostics.

All bipartite functions act on a density matrix over a ``d_a x d_b`` tensor
split (subsystem A is the first factor).  Entropic quantities are in nats.

The centerpiece is :func:`ppt_relative_entropy`: the exact minimization of
``S(rho || sigma)`` over PPT states ``sigma`` by a projected-gradient method
(Dykstra's algorithm projects onto the intersection of the density-matrix
set and the PPT cone), together with a rigorous optimality certificate from
convexity: for the gradient ``G`` at the current iterate,

    f(sigma) - f* <= tr(G sigma) - max(lmin(G), lmin(G^{T_A}))

because every feasible point is both a density matrix and the partial
transpose of one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert as hb

GRADIENT_FLOOR = 1e-14
SOLVER_DIM_CAP = 16


def _hermitize(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    return (mat + mat.conj().T) / 2.0


# ---------------------------------------------------------------------------
# partial-transpose diagnostics
# ---------------------------------------------------------------------------

def transpose_deficit(rho, d_a: int, d_b: int) -> float:
    """``max(0, -lmin(rho^{T_A}))``: how far the state is from PPT."""
    pt = hb.partial_transpose_bipartite(rho, d_a, d_b)
    return float(max(0.0, -np.linalg.eigvalsh(_hermitize(pt))[0]))


def negativity_excess(rho, d_a: int, d_b: int) -> float:
    """``|rho^{T_A}|_1 - 1``: twice the sum of negative transpose eigenvalues."""
    pt = hb.partial_transpose_bipartite(rho, d_a, d_b)
    return float(np.sum(np.abs(np.linalg.eigvalsh(_hermitize(pt)))) - 1.0)


def log_negativity(rho, d_a: int, d_b: int) -> float:
    """``ln |rho^{T_A}|_1`` in nats."""
    return math.log1p(negativity_excess(rho, d_a, d_b))


def is_ppt(rho, d_a: int, d_b: int, tol: float = 1e-12) -> bool:
    return transpose_deficit(rho, d_a, d_b) <= tol


# ---------------------------------------------------------------------------
# reference states and pure/two-qubit measures
# ---------------------------------------------------------------------------

def maximally_entangled_pair() -> np.ndarray:
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / math.sqrt(2.0)
    return np.outer(psi, psi.conj())


def werner_state(p: float) -> np.ndarray:
    """``p`` times the maximally entangled pair plus white noise; PPT iff
    ``p <= 1/3``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    return p * maximally_entangled_pair() + (1.0 - p) * np.eye(4) / 4.0


def entanglement_entropy(psi, d_a: int, d_b: int) -> float:
    """Entropy of entanglement of a pure state vector, in nats."""
    psi = np.asarray(psi, dtype=complex).reshape(d_a, d_b)
    sq = np.linalg.svd(psi, compute_uv=False) ** 2
    sq = sq[sq > hb.EIGENVALUE_FLOOR]
    return float(-np.sum(sq * np.log(sq)))


def concurrence_two_qubit(rho) -> float:
    """Spin-flip concurrence of a two-qubit state."""
    rho = _hermitize(rho)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a two-qubit state")
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    flipped = yy @ rho.conj() @ yy
    lam_r, vecs = np.linalg.eigh(rho)
    lam_r = np.clip(lam_r, 0.0, None)
    # zero out spectral noise before the square root amplifies it
    lam_r[lam_r < 1e-13 * max(lam_r[-1], 1e-300)] = 0.0
    root = (vecs * np.sqrt(lam_r)) @ vecs.conj().T
    lam = np.clip(np.linalg.eigvalsh(_hermitize(root @ flipped @ root)),
                  0.0, None)
    lam[lam < 1e-13 * max(lam[-1], 1e-300)] = 0.0
    lam = np.sort(np.sqrt(lam))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log(1.0 - x)


def formation_entanglement_two_qubit(rho) -> float:
    """Entanglement of formation of a two-qubit state, in nats."""
    c = concurrence_two_qubit(rho)
    return _binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


# ---------------------------------------------------------------------------
# covariance scale of a bipartite state
# ---------------------------------------------------------------------------

def _sign_operator(mat) -> np.ndarray:
    """Unit-operator-norm Hermitian maximizing ``tr(M O)`` for Hermitian M."""
    lam, vecs = np.linalg.eigh(_hermitize(mat))
    return (vecs * np.sign(lam)) @ vecs.conj().T


def covariance_scale(rho, d_a: int, d_b: int, rounds: int = 20,
                     starts: int = 6, seed: int = 0) -> float:
    """Largest connected correlation over unit-norm observable pairs (lower
    estimate).

    Alternating maximization: for fixed ``O_B`` the optimal ``O_A`` is the
    sign operator of ``tr_B(Delta (I x O_B))`` and symmetrically, which
    increases the objective monotonically.  Several starts (including a
    maximally mixed-direction one) guard against poor local maxima; the
    result is a lower bound on the true supremum and is flagged as such by
    callers that use it in inequalities.
    """
    rho = _hermitize(rho)
    rho_a = np.trace(rho.reshape(d_a, d_b, d_a, d_b), axis1=1, axis2=3)
    rho_b = np.trace(rho.reshape(d_a, d_b, d_a, d_b), axis1=0, axis2=2)
    delta_flat = rho - np.kron(rho_a, rho_b)
    delta = delta_flat.reshape(d_a, d_b, d_a, d_b)

    def partial_a(op_b):
        return np.einsum("ajbk,kj->ab", delta, op_b)

    def partial_b(op_a):
        return np.einsum("ijkl,ki->jl", delta, op_a)

    rng = np.random.default_rng(seed)
    best = 0.0
    seeds_b = [np.eye(d_b) - 2.0 * np.diag(np.arange(d_b) % 2)]
    for _ in range(max(1, starts - 1)):
        seeds_b.append(_sign_operator(hb.random_hermitian(d_b, rng)))
    for op_b in seeds_b:
        val = 0.0
        for _ in range(rounds):
            op_a = _sign_operator(partial_a(op_b))
            op_b = _sign_operator(partial_b(op_a))
            new = abs(float(np.real(np.trace(
                delta_flat @ np.kron(op_a, op_b)))))
            if new <= val + 1e-14:
                val = max(val, new)
                break
            val = new
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# exact relative entropy of entanglement over PPT states
# ---------------------------------------------------------------------------

def _project_density(mat) -> np.ndarray:
    """Frobenius projection onto unit-trace positive matrices."""
    lam, vecs = np.linalg.eigh(_hermitize(mat))
    # Euclidean projection of the spectrum onto the probability simplex
    srt = np.sort(lam)[::-1]
    css = np.cumsum(srt) - 1.0
    idx = np.arange(1, lam.size + 1)
    k = np.max(np.nonzero(srt - css / idx > 0)[0]) + 1
    tau = css[k - 1] / k
    new = np.clip(lam - tau, 0.0, None)
    return (vecs * new) @ vecs.conj().T


def _project_ppt_cone(mat, d_a: int, d_b: int) -> np.ndarray:
    """Frobenius projection onto matrices with positive partial transpose."""
    pt = hb.partial_transpose_bipartite(_hermitize(mat), d_a, d_b)
    lam, vecs = np.linalg.eigh(_hermitize(pt))
    clipped = (vecs * np.clip(lam, 0.0, None)) @ vecs.conj().T
    return hb.partial_transpose_bipartite(clipped, d_a, d_b)


def project_ppt_density(mat, d_a: int, d_b: int, sweeps: int = 60,
                        tol: float = 1e-12) -> np.ndarray:
    """Dykstra projection onto PPT density matrices."""
    x = _hermitize(mat)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(sweeps):
        y = _project_density(x + p)
        p = x + p - y
        x = _project_ppt_cone(y + q, d_a, d_b)
        q = y + q - x
        lam_min = float(np.linalg.eigvalsh(_hermitize(x))[0])
        trace_err = abs(float(np.real(np.trace(x))) - 1.0)
        if lam_min >= -tol and trace_err <= tol:
            pt_min = float(np.linalg.eigvalsh(_hermitize(
                hb.partial_transpose_bipartite(x, d_a, d_b)))[0])
            if pt_min >= -tol:
                break
    return _hermitize(x)


@dataclass
class RelativeEntropyResult:
    """Certified minimization of ``S(rho || sigma)`` over PPT ``sigma``."""

    value: float
    gap: float
    sigma: np.ndarray
    iterations: int
    converged: bool


def _floored_objective(rho, sigma, base: float, floor: float) -> float:
    lam, vecs = np.linalg.eigh(_hermitize(sigma))
    lam = np.clip(lam, floor, None)
    weights = np.real(np.einsum("ji,jk,ki->i", vecs.conj(), rho, vecs))
    return base - float(np.sum(weights * np.log(lam)))


def _objective_gradient(rho, sigma, floor: float) -> np.ndarray:
    """Gradient of ``-tr(rho ln sigma)`` via the log divided-difference."""
    lam, vecs = np.linalg.eigh(_hermitize(sigma))
    lam = np.clip(lam, floor, None)
    logs = np.log(lam)
    diff = lam[:, None] - lam[None, :]
    close = np.abs(diff) < 1e-14 * np.maximum(lam[:, None], lam[None, :])
    dd = np.where(close, 1.0 / np.maximum(lam[:, None], floor),
                  (logs[:, None] - logs[None, :]) / np.where(close, 1.0, diff))
    rho_e = vecs.conj().T @ rho @ vecs
    return _hermitize(vecs @ (-dd * rho_e) @ vecs.conj().T)


def ppt_relative_entropy(rho, d_a: int, d_b: int, tol: float = 1e-6,
                         max_iter: int = 20000,
                         floor: float = GRADIENT_FLOOR,
                         dim_cap: int = SOLVER_DIM_CAP) -> RelativeEntropyResult:
    """Minimize ``S(rho || sigma)`` over PPT states with a duality-gap stop.

    Projected gradient descent with backtracking line search; each iterate is
    re-projected onto the PPT density set by Dykstra's algorithm.  The
    returned ``gap`` bounds ``value - optimum`` from above; ``converged``
    records whether it reached ``tol``.
    """
    dim = d_a * d_b
    rho = _hermitize(rho)
    if rho.shape != (dim, dim):
        raise ValueError("state shape %r does not match %d x %d"
                         % (rho.shape, d_a, d_b))
    if dim > dim_cap:
        raise ValueError("solver capped at total dimension %d" % dim_cap)
    lam_rho = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    lam_pos = lam_rho[lam_rho > hb.EIGENVALUE_FLOOR]
    base = float(np.sum(lam_pos * np.log(lam_pos)))

    sigma = project_ppt_density(0.95 * rho + 0.05 * np.eye(dim) / dim, d_a, d_b)
    f_cur = _floored_objective(rho, sigma, base, floor)
    step = 1.0
    gap = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = _objective_gradient(rho, sigma, floor)
        lin = float(np.real(np.trace(grad @ sigma)))
        pt_grad = hb.partial_transpose_bipartite(grad, d_a, d_b)
        lower = max(float(np.linalg.eigvalsh(grad)[0]),
                    float(np.linalg.eigvalsh(_hermitize(pt_grad))[0]))
        gap = lin - lower
        if gap <= tol:
            return RelativeEntropyResult(max(0.0, f_cur), gap, sigma,
                                         iterations, True)
        moved = False
        while step >= 1e-13:
            cand = project_ppt_density(sigma - step * grad, d_a, d_b)
            f_cand = _floored_objective(rho, cand, base, floor)
            decrease = float(np.real(np.trace(grad @ (sigma - cand))))
            if f_cand <= f_cur - 1e-4 * max(decrease, 0.0) and f_cand < f_cur:
                sigma, f_cur = cand, f_cand
                step = min(step * 1.5, 1e3)
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    return RelativeEntropyResult(max(0.0, f_cur), gap, sigma, iterations,
                                 gap <= tol)

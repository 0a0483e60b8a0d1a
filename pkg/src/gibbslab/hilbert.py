"""Dense Hilbert-space utilities for small uniform spin lattices.

All operators are dense complex matrices on ``n`` sites with uniform local
dimension ``d0``.  Basis convention: site 0 is the leftmost tensor factor
(most significant digit), so a computational basis index decomposes as
``index = sum_i s_i * d0**(n-1-i)``.  Embedding ``sigma_z`` on site 0 of two
qubits therefore yields ``diag(1, 1, -1, -1)``.

Entropic quantities use the natural logarithm throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Eigenvalues below this floor are treated as exact zeros in entropies and
# related spectral quantities.
EIGENVALUE_FLOOR = 1e-12

# Default cap on the total Hilbert-space size: n * log2(d0) <= 14.
MAX_DIM_EXPONENT = 14

_HERMITIAN_TOL = 1e-10


class SupportViolation(Exception):
    """Relative entropy is infinite: supp(rho) is not inside supp(sigma)."""


@dataclass(frozen=True)
class SiteSpace:
    """A register of ``n`` sites with uniform local dimension ``d0``."""

    n: int
    d0: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one site")
        if self.d0 < 2:
            raise ValueError("local dimension must be at least 2")

    @property
    def dim(self) -> int:
        return self.d0 ** self.n

    @property
    def sites(self) -> range:
        return range(self.n)

    def subspace(self, sites) -> "SiteSpace":
        return SiteSpace(len(list(sites)), self.d0)

    def check_sites(self, sites) -> list:
        sites = list(sites)
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate sites: %r" % (sites,))
        for i in sites:
            if not (0 <= i < self.n):
                raise ValueError("site %r outside 0..%d" % (i, self.n - 1))
        return sites


def site_space(n: int, d0: int = 2, max_exponent: float = MAX_DIM_EXPONENT) -> SiteSpace:
    """Build a :class:`SiteSpace`, enforcing the total-dimension budget.

    Raises ``ValueError`` when ``n * log2(d0)`` exceeds ``max_exponent``.
    """
    if n * math.log2(d0) > max_exponent + 1e-9:
        raise ValueError(
            "space of %d sites with d0=%d exceeds the dimension budget "
            "2**%s" % (n, d0, max_exponent)
        )
    return SiteSpace(n, d0)


@dataclass
class OperatorMatrix:
    """A dense operator together with its support bookkeeping."""

    space: SiteSpace
    mat: np.ndarray
    support: frozenset = field(default_factory=frozenset)
    hermitian: bool = False

    def validate(self, tol: float = _HERMITIAN_TOL) -> "OperatorMatrix":
        d = self.space.dim
        if self.mat.shape != (d, d):
            raise ValueError("matrix shape %r does not match dim %d" % (self.mat.shape, d))
        if self.hermitian and not is_hermitian(self.mat, tol):
            raise ValueError("matrix flagged hermitian is not hermitian within %g" % tol)
        if not self.support <= set(self.space.sites):
            raise ValueError("support outside the site register")
        return self

    @property
    def norm(self) -> float:
        return operator_norm(self.mat)


@dataclass
class DensityMatrix:
    """A unit-trace positive-semidefinite operator, with optional ``ln Z``.

    ``log_partition`` carries the normalization of a Gibbs state so that the
    unnormalized ``exp(-beta H)`` never has to be materialized.
    """

    space: SiteSpace
    mat: np.ndarray
    log_partition: float | None = None

    def validate(self, tol: float = 1e-9) -> "DensityMatrix":
        d = self.space.dim
        if self.mat.shape != (d, d):
            raise ValueError("matrix shape %r does not match dim %d" % (self.mat.shape, d))
        if not is_hermitian(self.mat, tol):
            raise ValueError("density matrix is not hermitian within %g" % tol)
        tr = float(np.real(np.trace(self.mat)))
        if abs(tr - 1.0) > tol:
            raise ValueError("trace %.3e is not 1 within %g" % (tr, tol))
        lo = float(np.linalg.eigvalsh(self.mat)[0])
        if lo < -tol:
            raise ValueError("negative eigenvalue %.3e below tolerance" % lo)
        return self


def _as_array(x) -> np.ndarray:
    if isinstance(x, (OperatorMatrix, DensityMatrix)):
        return x.mat
    return np.asarray(x)


def is_hermitian(mat, tol: float = _HERMITIAN_TOL) -> bool:
    mat = _as_array(mat)
    scale = max(1.0, float(np.max(np.abs(mat))))
    return float(np.max(np.abs(mat - mat.conj().T))) <= tol * scale


def _grouped_to_canonical(space: SiteSpace, order) -> np.ndarray:
    """Index map ``a`` with ``a[grouped] = canonical`` for a site reordering.

    ``order`` lists site labels in the grouped tensor order (leftmost first).
    """
    n, d0 = space.n, space.d0
    a = np.zeros(space.dim, dtype=np.int64)
    for pos, site in enumerate(order):
        digit = (np.arange(space.dim) // d0 ** (n - 1 - pos)) % d0
        a += digit * d0 ** (n - 1 - site)
    return a


def embed_local(space: SiteSpace, local, sites) -> np.ndarray:
    """Embed an operator acting on ``sites`` into the full register.

    The local matrix is indexed with the listed sites as consecutive tensor
    factors in the given order; the result uses the canonical site order.
    """
    sites = space.check_sites(sites)
    local = np.asarray(local, dtype=complex)
    d_loc = space.d0 ** len(sites)
    if local.shape != (d_loc, d_loc):
        raise ValueError("local matrix shape %r does not match %d sites" % (local.shape, len(sites)))
    rest = [i for i in range(space.n) if i not in set(sites)]
    grouped = np.kron(local, np.eye(space.d0 ** len(rest)))
    a = _grouped_to_canonical(space, sites + rest)
    out = np.zeros_like(grouped)
    out[np.ix_(a, a)] = grouped
    return out


def partial_trace(space: SiteSpace, mat, keep) -> np.ndarray:
    """Trace out every site not in ``keep``.

    The reduced matrix uses the kept sites in ascending order.
    """
    keep = sorted(space.check_sites(keep))
    mat = _as_array(mat)
    rest = [i for i in range(space.n) if i not in set(keep)]
    if not rest:
        return mat.copy()
    a = _grouped_to_canonical(space, keep + rest)
    dk = space.d0 ** len(keep)
    dr = space.d0 ** len(rest)
    grouped = mat[np.ix_(a, a)].reshape(dk, dr, dk, dr)
    return np.einsum("arbr->ab", grouped)


def localize(space: SiteSpace, mat, region) -> np.ndarray:
    """Best product approximation supported on ``region``.

    Returns ``tr_rest(mat)/dim_rest`` re-embedded on the full register; equals
    the Haar twirl of ``mat`` over unitaries acting outside ``region``.
    """
    region = sorted(space.check_sites(region))
    small = localize_small(space, mat, region)
    return embed_local(space, small, region)


def localize_small(space: SiteSpace, mat, region) -> np.ndarray:
    """Like :func:`localize` but returns the matrix on ``region`` only."""
    region = sorted(space.check_sites(region))
    n_rest = space.n - len(region)
    return partial_trace(space, mat, region) / (space.d0 ** n_rest)


def partial_transpose(space: SiteSpace, mat, sites) -> np.ndarray:
    """Transpose the tensor factors of ``sites`` only."""
    sites = space.check_sites(sites)
    mat = _as_array(mat)
    n, d0 = space.n, space.d0
    tensor = mat.reshape((d0,) * (2 * n))
    axes = list(range(2 * n))
    for i in sites:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return tensor.transpose(axes).reshape(space.dim, space.dim)


def partial_transpose_bipartite(mat, d_a: int, d_b: int) -> np.ndarray:
    """Partial transpose on the first factor of a ``d_a x d_b`` split."""
    mat = _as_array(mat)
    if mat.shape != (d_a * d_b, d_a * d_b):
        raise ValueError("shape %r does not match %d x %d split" % (mat.shape, d_a, d_b))
    t = mat.reshape(d_a, d_b, d_a, d_b)
    return t.transpose(2, 1, 0, 3).reshape(d_a * d_b, d_a * d_b)


def operator_norm(mat) -> float:
    """Largest singular value; uses the Hermitian fast path when it applies."""
    mat = _as_array(mat)
    if is_hermitian(mat):
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    sq = mat.conj().T @ mat
    top = float(np.max(np.linalg.eigvalsh((sq + sq.conj().T) / 2.0)))
    return math.sqrt(max(top, 0.0))


def trace_norm(mat) -> float:
    mat = _as_array(mat)
    if is_hermitian(mat):
        return float(np.sum(np.abs(np.linalg.eigvalsh(mat))))
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def frobenius_norm(mat) -> float:
    return float(np.linalg.norm(_as_array(mat)))


def schatten_norm(mat, p) -> float:
    if p == 1:
        return trace_norm(mat)
    if p == 2:
        return frobenius_norm(mat)
    if p in ("inf", np.inf, math.inf):
        return operator_norm(mat)
    raise ValueError("supported Schatten orders: 1, 2, inf")


def commutator(a, b) -> np.ndarray:
    a, b = _as_array(a), _as_array(b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = _as_array(a), _as_array(b)
    return a @ b + b @ a


def expectation(rho, op) -> float | complex:
    val = complex(np.trace(_as_array(rho) @ _as_array(op)))
    if abs(val.imag) < 1e-10 * max(1.0, abs(val.real)):
        return val.real
    return val


def von_neumann_entropy(rho, floor: float = EIGENVALUE_FLOOR) -> float:
    """Entropy ``-tr(rho ln rho)`` with eigenvalues below ``floor`` dropped."""
    lam = np.linalg.eigvalsh(_as_array(rho))
    lam = lam[lam > floor]
    return float(-np.sum(lam * np.log(lam)))


def relative_entropy(rho, sigma, floor: float = EIGENVALUE_FLOOR) -> float:
    """``S(rho || sigma) = tr rho (ln rho - ln sigma)`` in nats.

    Returns ``math.inf`` when ``rho`` has weight outside the support of
    ``sigma`` (support violation), which is distinct from any numeric error.
    """
    rho = _as_array(rho)
    sigma = _as_array(sigma)
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > floor]
    ent = float(np.sum(lam * np.log(lam)))
    svals, svecs = np.linalg.eigh(sigma)
    weights = np.real(np.einsum("ij,jk,ki->i", svecs.conj().T, rho, svecs))
    weights = np.clip(weights, 0.0, None)
    dead = svals <= floor
    if np.any(weights[dead] > math.sqrt(floor)):
        return math.inf
    live = ~dead
    cross = float(np.sum(weights[live] * np.log(svals[live])))
    return ent - cross


def mutual_information(space: SiteSpace, rho, region_a, region_b,
                       floor: float = EIGENVALUE_FLOOR) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` for disjoint regions."""
    region_a = sorted(space.check_sites(region_a))
    region_b = sorted(space.check_sites(region_b))
    if set(region_a) & set(region_b):
        raise ValueError("regions overlap")
    rho_ab = partial_trace(space, rho, region_a + region_b)
    rho_a = partial_trace(space, rho, region_a)
    rho_b = partial_trace(space, rho, region_b)
    return (von_neumann_entropy(rho_a, floor) + von_neumann_entropy(rho_b, floor)
            - von_neumann_entropy(rho_ab, floor))


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Deterministic eigenvector phases: largest-magnitude entry real positive.

    Ties on magnitude resolve to the smallest row index.
    """
    vecs = np.array(vecs, copy=True)
    idx = np.argmax(np.abs(vecs) - 1e-18 * np.arange(vecs.shape[0])[:, None], axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(lead) > 0, lead / np.abs(np.where(np.abs(lead) > 0, lead, 1.0)), 1.0)
    return vecs / phases


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, unit_norm: bool = True) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = (m + m.conj().T) / 2.0
    if unit_norm:
        m = m / operator_norm(m)
    return m


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Wishart-distributed density matrix of the given rank."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)

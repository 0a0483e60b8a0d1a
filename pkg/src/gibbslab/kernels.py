"""Integral kernels, frequency symbols, quadrature rules, and bound constants.

Every thermal filtering operation used here has two faces:

* a time-domain kernel ``k(t)`` whose operator integral
  ``int k(t) O(t) dt`` is approximated by quadrature, and
* a frequency-domain symbol ``K(omega)`` applied elementwise to operator
  matrix elements between energy eigenstates with gap ``omega``.

All kernels satisfy ``k(-t) = conj(k(t))``, so their symbols are real and the
two-sided integral reduces to ``2 Re int_0^T k(t) e^{i omega t} dt`` plus, for
the interpolation kernel, an explicit point mass at ``t = 0``.

The kernel table (``beta`` the inverse temperature):

========  =============================================  =========================
name      k(t)                                           K(omega)
========  =============================================  =========================
fermi     ``1 / (beta cosh(pi t / beta))``               ``sech(beta omega / 2)``
odd       ``-i / (beta sinh(pi t / beta))``              ``tanh(beta omega / 2)``
log       ``(2/(beta pi)) ln coth(pi |t| / (2 beta))``   ``tanh(y)/y, y=beta omega/2``
alpha     geometric series kernel (below)                ``(1-e^{a b w})/(1-e^{b w})``
========  =============================================  =========================

The ``alpha`` kernel in closed form, for ``a = alpha`` in ``[0, 1]``,
``s = sign(t)``, ``z = exp(-2 pi |t| / beta)`` and ``w = z e^{-2 pi i a s}``::

    k(t) = (-i s / beta) (w - z) / ((1 - z)(1 - w))

Its distributional part is ``delta_weight(alpha) * delta(t)`` with weight
``0`` at ``alpha = 0``, ``1`` at ``alpha = 1`` and ``1/2`` strictly inside;
the smooth part above integrates (as a principal value) to the symbol minus
that weight.

The module also evaluates the analytic constants of the decay bounds from an
operator-growth (Lieb-Robinson) envelope ``C exp(mu (v t - r))`` and the model
data ``(g, k, d0, D, gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

QUADRATURE_EPS = 1e-10
KERNEL_KINDS = ("fermi", "odd", "log", "alpha")


# ---------------------------------------------------------------------------
# time-domain kernels
# ---------------------------------------------------------------------------

def fermi_kernel(t, beta: float):
    """Smoothing kernel ``1/(beta cosh(pi t/beta))``; even, unit integral."""
    t = np.asarray(t, dtype=float)
    return 1.0 / (beta * np.cosh(np.pi * t / beta))


def odd_kernel(t, beta: float):
    """Hilbert-type kernel ``-i/(beta sinh(pi t/beta))``; singular at 0."""
    t = np.asarray(t, dtype=float)
    return -1j / (beta * np.sinh(np.pi * t / beta))


def log_kernel(t, beta: float):
    """Even kernel with log singularity at 0 and unit integral."""
    t = np.asarray(t, dtype=float)
    x = np.pi * np.abs(t) / beta
    e = np.exp(-x)
    return (2.0 / (beta * np.pi)) * (np.log1p(e) - np.log1p(-e))


def alpha_kernel(t, beta: float, alpha: float):
    """Smooth part of the interpolation kernel; see the module docstring.

    The exact point mass ``delta_weight(alpha) * delta(t)`` is not included.
    ``t = 0`` is a non-removable singularity (principal value); quadrature
    rules never place a node there.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1], got %r" % (alpha,))
    t = np.asarray(t, dtype=float)
    if alpha in (0.0, 1.0):
        return np.zeros_like(t, dtype=complex)
    s = np.sign(t)
    a = 2.0 * np.pi * np.abs(t) / beta
    z = np.exp(-a)
    one_minus_z = -np.expm1(-a)
    theta = -2.0 * np.pi * alpha * s
    # e^{i theta} - 1 without cancellation
    em1 = -2.0 * np.sin(theta / 2.0) ** 2 + 1j * np.sin(theta)
    w = z * (1.0 + em1)
    return (-1j * s / beta) * z * em1 / (one_minus_z * (1.0 - w))


def alpha_delta_weight(alpha: float) -> float:
    """Weight of the ``t = 0`` point mass of the interpolation kernel."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1], got %r" % (alpha,))
    if alpha == 0.0:
        return 0.0
    if alpha == 1.0:
        return 1.0
    return 0.5


def alpha_kernel_envelope(t, beta: float):
    """Analytic envelope ``(2/beta) z/(1-z)`` dominating ``|alpha_kernel|``."""
    t = np.asarray(t, dtype=float)
    a = 2.0 * np.pi * np.abs(t) / beta
    return (2.0 / beta) * np.exp(-a) / (-np.expm1(-a))


# ---------------------------------------------------------------------------
# frequency-domain symbols
# ---------------------------------------------------------------------------

def fermi_symbol(omega, beta: float):
    """``sech(beta omega / 2)``, overflow-safe."""
    y = np.abs(np.asarray(omega, dtype=float)) * beta / 2.0
    e = np.exp(-y)
    return 2.0 * e / (1.0 + e * e)


def odd_symbol(omega, beta: float):
    """``tanh(beta omega / 2)``."""
    return np.tanh(np.asarray(omega, dtype=float) * beta / 2.0)


def log_symbol(omega, beta: float):
    """``tanh(y)/y`` with ``y = beta omega / 2``; 1 at ``omega = 0``."""
    y = np.asarray(omega, dtype=float) * beta / 2.0
    small = np.abs(y) < 1e-8
    safe = np.where(small, 1.0, y)
    return np.where(small, 1.0 - y * y / 3.0, np.tanh(safe) / safe)


def alpha_symbol(omega, beta: float, alpha: float):
    """``(1 - e^{alpha beta omega}) / (1 - e^{beta omega})``; ``alpha`` at 0."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1], got %r" % (alpha,))
    x = np.asarray(omega, dtype=float) * beta
    out = np.empty_like(x)
    small = np.abs(x) < 1e-7
    out[small] = alpha * (1.0 + (alpha - 1.0) * x[small] / 2.0)
    pos = (x >= 0) & ~small
    # multiply through by e^{-x}: (e^{-x} - e^{-(1-alpha) x}) / (e^{-x} - 1)
    xp = x[pos]
    out[pos] = (np.exp(-xp) - np.exp(-(1.0 - alpha) * xp)) / np.expm1(-xp)
    neg = (x < 0) & ~small
    xn = x[neg]
    out[neg] = np.expm1(alpha * xn) / np.expm1(xn)
    return out


def symbol(kind: str, omega, beta: float, alpha: float | None = None):
    """Dispatch a symbol by kernel name."""
    if kind == "fermi":
        return fermi_symbol(omega, beta)
    if kind == "odd":
        return odd_symbol(omega, beta)
    if kind == "log":
        return log_symbol(omega, beta)
    if kind == "alpha":
        if alpha is None:
            raise ValueError("alpha kernel needs an alpha value")
        return alpha_symbol(omega, beta, alpha)
    raise ValueError("unknown kernel %r; have %s" % (kind, KERNEL_KINDS))


def kernel_value(kind: str, t, beta: float, alpha: float | None = None):
    if kind == "fermi":
        return fermi_kernel(t, beta)
    if kind == "odd":
        return odd_kernel(t, beta)
    if kind == "log":
        return log_kernel(t, beta)
    if kind == "alpha":
        if alpha is None:
            raise ValueError("alpha kernel needs an alpha value")
        return alpha_kernel(t, beta, alpha)
    raise ValueError("unknown kernel %r; have %s" % (kind, KERNEL_KINDS))


def delta_weight(kind: str, alpha: float | None = None) -> float:
    if kind == "alpha":
        if alpha is None:
            raise ValueError("alpha kernel needs an alpha value")
        return alpha_delta_weight(alpha)
    return 0.0


# ---------------------------------------------------------------------------
# quadrature rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Positive-time nodes with kernel-weighted coefficients.

    The two-sided kernel integral is reconstructed as::

        int_{-T}^{T} k(t) O(t) dt ~ sum_j 2 Re( c_j e^{i Omega t_j} ) . O~
                                     + point_mass * O~   (elementwise)

    where ``c_j = w_j k(t_j)`` and ``O~`` is the operator in the eigenbasis.
    """

    times: np.ndarray
    coefficients: np.ndarray
    point_mass: float
    t_max: float

    @property
    def node_count(self) -> int:
        return int(self.times.size)

    def symbol_estimate(self, omega):
        """Scalar reconstruction of the symbol at the given frequencies."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        phases = np.exp(1j * np.outer(omega, self.times))
        vals = 2.0 * np.real(phases @ self.coefficients) + self.point_mass
        return vals if vals.size > 1 else float(vals[0])


def horizon(beta: float, eps: float = QUADRATURE_EPS) -> float:
    """Integration cutoff: all kernels decay like ``exp(-pi t / beta)``."""
    return (beta / np.pi) * math.log(1.0 / eps) + beta


def _panel_edges(beta: float, delta_t: float | None, t_max: float,
                 omega_max: float, order: int, grade_head: bool) -> np.ndarray:
    """Panel boundaries on ``(0, t_max]``.

    Geometric doubling away from the origin resolves the kernel scale; an
    oscillation cap keeps ``panel width * omega_max <= order`` so the phase
    ``e^{i omega t}`` stays resolvable; geometric grading toward 0 (for the
    log-singular kernel) shrinks the first panels by 2**-40.
    """
    head = min(beta if delta_t is None else min(delta_t, beta), t_max)
    edges = [0.0]
    if grade_head:
        levels = 40
        edges += [head * 2.0 ** (-k) for k in range(levels, 0, -1)]
    edges.append(head)
    t = head
    while t < t_max:
        t = min(2.0 * t, t_max)
        edges.append(t)
    edges = np.array(edges)
    if omega_max > 0:
        h_max = order / omega_max
        refined = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            pieces = max(1, int(math.ceil((b - a) / h_max)))
            refined.extend(np.linspace(a, b, pieces + 1)[1:])
        edges = np.array(refined)
    return edges


def quadrature_rule(kind: str, beta: float, *, alpha: float | None = None,
                    delta_t: float | None = None, omega_max: float = 0.0,
                    eps: float = QUADRATURE_EPS, order: int = 16) -> QuadratureRule:
    """Composite Gauss-Legendre rule for one kernel.

    Parameters
    ----------
    kind : one of ``fermi``, ``odd``, ``log``, ``alpha``.
    beta : inverse temperature.
    alpha : interpolation parameter, required for the ``alpha`` kernel.
    delta_t : first panel width near 0, typically ``min(beta, |O|/|[H, O]|)``
        so the paired integrand is resolved where the kernel is largest.
    omega_max : largest spectral gap the rule must resolve; 0 disables the cap.
    eps : tail truncation target; sets the horizon.
    order : Gauss-Legendre order per panel.
    """
    if kind not in KERNEL_KINDS:
        raise ValueError("unknown kernel %r; have %s" % (kind, KERNEL_KINDS))
    t_max = horizon(beta, eps)
    edges = _panel_edges(beta, delta_t, t_max, omega_max, order,
                         grade_head=(kind == "log"))
    x, w = _gauss_legendre(order)
    mid = (edges[1:] + edges[:-1]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    times = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    coeff = weights * kernel_value(kind, times, beta, alpha)
    return QuadratureRule(times, np.asarray(coeff, dtype=complex),
                          delta_weight(kind, alpha), t_max)


# ---------------------------------------------------------------------------
# decay-bound constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorGrowth:
    """Commutator-growth envelope ``|[O_X(t), O_Y]| <= C e^{mu (v t - r)}``."""

    prefactor: float
    velocity: float
    decay_rate: float

    def __post_init__(self):
        if self.prefactor <= 0 or self.velocity <= 0 or self.decay_rate <= 0:
            raise ValueError("growth envelope parameters must be positive")

    def envelope(self, t, r):
        return self.prefactor * np.exp(self.decay_rate *
                                       (self.velocity * np.abs(t) - r))


@dataclass(frozen=True)
class BoundConstants:
    """All inverse-temperature-dependent constants of the decay bounds.

    Built from an operator-growth envelope, the interaction data ``g``
    (max summed term norm per site) and ``k`` (term size), the local
    dimension ``d0``, the lattice dimension ``ndim`` and growth constant
    ``gamma``.
    """

    beta: float
    growth: OperatorGrowth
    g: float
    k: int
    d0: int
    ndim: int = 1
    gamma: float = 3.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    # -- length scales ------------------------------------------------------

    @property
    def xi(self) -> float:
        """Decay length of the pair-correlation bounds."""
        mu, v = self.growth.decay_rate, self.growth.velocity
        return (4.0 / mu) * (1.0 + v * self.beta / np.pi)

    @property
    def xi_skew(self) -> float:
        """Decay length of the skew-correlation bounds."""
        mu, v = self.growth.decay_rate, self.growth.velocity
        return (2.0 + v * self.beta / np.pi) / mu

    # -- prefactors ---------------------------------------------------------

    @property
    def c_pair_main(self) -> float:
        c, v = self.growth.prefactor, self.growth.velocity
        return math.exp(2.0 / self.xi) * (12.0 / np.pi + 6.0 * c / (v * self.beta))

    @property
    def c_pair_log(self) -> float:
        c, v = self.growth.prefactor, self.growth.velocity
        base = math.exp(2.0 / self.xi) * ((12.0 + 3.0 * c) / np.pi
                                          + 3.0 * c / (v * self.beta))
        return base * (3.0 + math.log(1.0 + 2.0 * self.g * self.beta))

    @property
    def c_pair(self) -> float:
        """Prefactor of the pair-correlation clustering bound."""
        return self.c_pair_main + self.c_pair_log

    @property
    def c_skew(self) -> float:
        """Prefactor of the skew-correlation clustering bound."""
        c, v = self.growth.prefactor, self.growth.velocity
        return (12.0 + 2.0 * c) / np.pi + 4.0 * c / (v * self.beta)

    @property
    def c_skew_extensive(self) -> float:
        """Prefactor of the extensive skew-information bound."""
        mu = self.growth.decay_rate
        d = self.ndim
        return self.c_skew * ((mu / 2.0) ** d
                              + self.gamma * math.exp(mu / 2.0) * math.factorial(d))

    @property
    def c_window(self) -> float:
        """Prefactor of the window-truncation bound for mixing operators."""
        c, v = self.growth.prefactor, self.growth.velocity
        ce = c * math.exp(self.growth.decay_rate * self.k)
        term = (5.0 + 2.0 * ce) / np.pi ** 2 + 2.0 * ce / (np.pi * v * self.beta)
        return 1280.0 * term ** 2

    @property
    def c_chain(self) -> float:
        """Prefactor of the one-dimensional entanglement clustering bound."""
        return 20.0 * math.sqrt(self.c_window + 16.0 * self.d0 ** 4 * self.c_pair)


# -- bound right-hand sides --------------------------------------------------

def pair_correlation_rhs(bc: BoundConstants, boundary_a: int, boundary_b: int,
                         sites_ab: int, dist: float) -> float:
    """Clustering bound for convex-roof pair correlations at distance ``dist``."""
    return (bc.c_pair * (boundary_a + boundary_b)
            * (1.0 + math.log(sites_ab)) * math.exp(-dist / bc.xi))


def skew_clustering_rhs(bc: BoundConstants, boundary_a: int, boundary_b: int,
                        dist: float) -> float:
    """Clustering bound for skew correlations at distance ``dist``."""
    return bc.c_skew * min(boundary_a, boundary_b) * math.exp(-dist / bc.xi_skew)


def skew_extensive_rhs(bc: BoundConstants, n_sites: int) -> float:
    """System-size bound on the skew information of an extensive observable."""
    return bc.c_skew_extensive * bc.xi_skew ** bc.ndim * n_sites


def fisher_extensive_rhs(bc: BoundConstants, n_sites: int) -> float:
    """System-size bound on the quantum Fisher information (8x the skew one)."""
    return 8.0 * skew_extensive_rhs(bc, n_sites)


def chain_mixing_rhs(bc: BoundConstants, dim_ab: int, dist: float) -> float:
    """One-dimensional bound on the relative entropy to a separating state."""
    expo = (-dist / (16.0 * math.log(bc.d0) * bc.xi ** 2)
            + 7.0 * bc.g * bc.k * bc.beta)
    return bc.c_chain * math.log(dim_ab) * math.exp(expo)


def window_truncation_rhs(bc: BoundConstants, ell: int) -> float:
    """Error bound for restricting the mixing generator to a 2*ell window."""
    return bc.c_window * math.exp(-2.0 * ell / bc.xi
                                  + 14.0 * bc.g * bc.k * bc.beta)


def localization_error_rhs(bc: BoundConstants, boundary_x: int, r: float) -> float:
    """Error bound for localizing a smoothed observable on an r-ball."""
    c, v = bc.growth.prefactor, bc.growth.velocity
    coef = ((8.0 / np.pi) * (1.0 + bc.xi / (2.0 * r))
            + 4.0 * c * (1.0 / np.pi + 1.0 / (v * bc.beta)))
    return boundary_x * coef * math.exp(-2.0 * r / bc.xi)


def certificate_delta_rhs(bc: BoundConstants, boundary_x: int, r: float) -> float:
    """Simplified localization error entering the certificate budget."""
    c, v = bc.growth.prefactor, bc.growth.velocity
    return ((8.0 / np.pi + 4.0 * c / (v * bc.beta)) * boundary_x
            * math.exp(-2.0 * r / bc.xi))


def dressed_norm_rhs(beta: float, norm_o: float, norm_ad: float) -> float:
    """Norm bound for half-dressed observables."""
    return norm_o * math.log1p(beta * norm_ad / norm_o) + 2.0 * norm_o


def commutator_closed_rhs(bc: BoundConstants, boundary_a: int, boundary_b: int,
                          dist: float, ad_a: float, ad_b: float) -> float:
    """Closed-form bound on the dressed-commutator norm at distance ``dist``."""
    c, v = bc.growth.prefactor, bc.growth.velocity
    coef = ((8.0 / np.pi) * (1.0 + bc.xi / (dist - 2.0))
            + 4.0 * c * (1.0 / np.pi + 1.0 / (v * bc.beta)))
    weight = (boundary_a * (2.0 + math.log1p(bc.beta * ad_b))
              + boundary_b * (2.0 + math.log1p(bc.beta * ad_a)))
    return 3.0 * math.exp(2.0 / bc.xi) * coef * math.exp(-dist / bc.xi) * weight


def decoupling_delta(bc: BoundConstants, dist: float) -> float:
    """Trace-distance scale of the decoupled thermal approximation."""
    expo = (-dist / (8.0 * math.log(bc.d0) * bc.xi ** 2)
            + 14.0 * bc.g * bc.k * bc.beta)
    return (bc.c_window + 16.0 * bc.d0 ** 4 * bc.c_pair) * math.exp(expo)


def sandwich_delta(bc: BoundConstants, dist: float, ell: int) -> float:
    """Residual error scale after the window-truncated mixing sandwich."""
    return 16.0 * bc.c_pair * math.exp(-dist / bc.xi
                                       + 2.0 * ell * math.log(bc.d0))


def ppt_relative_rhs(dim_ab: int, delta_bar: float, form: str = "log") -> float:
    """Relative entropy of entanglement bound from a PPT state at distance
    ``delta_bar`` (trace-norm scale); ``log`` form requires ``delta_bar <= 1/e``.
    """
    if delta_bar <= 0:
        return 0.0
    if form == "log":
        if delta_bar > 1.0 / math.e:
            raise ValueError("log form needs delta_bar <= 1/e")
        return 4.0 * dim_ab * delta_bar * math.log(1.0 / delta_bar)
    if form == "sqrt":
        return 4.0 * dim_ab * math.sqrt(delta_bar)
    raise ValueError("form must be 'log' or 'sqrt'")


def negativity_rhs(eps: float, d_min: int, dim_ab: int) -> float:
    """Logarithmic-negativity-style bound ``|rho^{T_A}|_1 - 1 <= 8 eps d_min D``."""
    return 8.0 * eps * d_min * dim_ab

def qc_bound_rhs(norm_a: float, norm_b: float, eof: float) -> float:
    """Convex-roof correlation bound from the entanglement of formation."""
    return 2.0 * norm_a * norm_b * math.sqrt(eof)


TRIVIAL_SKEW_BOUND = 2.0
TRIVIAL_REGIME_CONSTANT = 12.0 / (math.e * np.pi)

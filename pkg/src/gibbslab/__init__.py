"""Exact-diagonalization laboratory for thermal correlation and entanglement bounds.

The package studies Gibbs states of short-ranged spin Hamiltonians on small
lattices: it measures bipartite correlation and entanglement quantities,
evaluates the analytic decay bounds that should dominate them, and checks the
two against each other point by point.
"""

__version__ = "0.1.0"

__all__ = [
    "hilbert",
    "model",
    "thermal",
    "kernels",
    "qcorr",
    "coherence",
    "entangle",
    "bp",
    "lr",
    "cli",
]

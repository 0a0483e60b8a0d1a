"""Lattices, short-ranged spin Hamiltonians, and their geometric constants.

A :class:`Lattice` is a finite graph of sites; distances are graph distances.
A :class:`Hamiltonian` is a sum of few-site terms on a lattice, kept both as
a term list (for surgery: restricting to a region, collecting the terms that
cross a cut) and as a dense matrix.

Geometric quantities used by the decay bounds:

* ``boundary(X)``: sites of ``X`` at distance 1 from the complement.
* ``ball(X, r)``: all sites within distance ``r`` of ``X``.
* ``growth_constant``: the smallest ``gamma >= 1`` with both
  ``|boundary(ball(i, r))| <= gamma * r**(D-1)`` and
  ``|ball(i, r)| <= gamma * r**D`` for every site ``i`` and radius ``r >= 1``.
* ``zeta(s, xi) = max_i sum_j d_ij**s * exp(-d_ij / xi)`` with the convention
  ``0**0 = 1``, together with its closed-form upper estimate
  ``1 + gamma * exp(1/xi) * xi**(s+D) * (s+D)!``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import hilbert as hb

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Lattice:
    """A finite site graph with precomputed graph distances."""

    n: int
    edges: tuple
    ndim: int = 1

    def __post_init__(self):
        for (a, b) in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n and a != b):
                raise ValueError("bad edge (%r, %r)" % (a, b))

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs graph distances (unreachable pairs get a large finite value)."""
        big = self.n + 1
        d = np.full((self.n, self.n), big, dtype=np.int64)
        np.fill_diagonal(d, 0)
        for (a, b) in self.edges:
            d[a, b] = d[b, a] = 1
        for k in range(self.n):
            d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
        return d

    def distance(self, region_a, region_b) -> int:
        ra = np.asarray(sorted(set(region_a)), dtype=np.int64)
        rb = np.asarray(sorted(set(region_b)), dtype=np.int64)
        if ra.size == 0 or rb.size == 0:
            raise ValueError("regions must be nonempty")
        return int(self.distances[np.ix_(ra, rb)].min())

    def ball(self, region, r: int) -> list:
        """All sites within graph distance ``r`` of ``region``."""
        region = sorted(set(region))
        d_to = self.distances[:, region].min(axis=1)
        return [int(i) for i in np.nonzero(d_to <= r)[0]]

    def boundary(self, region) -> list:
        """Sites of ``region`` at distance exactly 1 from its complement."""
        inside = set(region)
        comp = [i for i in range(self.n) if i not in inside]
        if not comp:
            return []
        d_to_comp = self.distances[:, comp].min(axis=1)
        return [i for i in sorted(inside) if d_to_comp[i] == 1]

    @cached_property
    def growth_constant(self) -> float:
        """Smallest ``gamma >= 1`` bounding both ball sizes and their surfaces."""
        gamma = 1.0
        r_max = max(1, int(self.distances[self.distances <= self.n].max()))
        for i in range(self.n):
            for r in range(1, r_max + 1):
                ball = self.ball([i], r)
                gamma = max(gamma, len(self.boundary(ball)) / r ** (self.ndim - 1))
                gamma = max(gamma, len(ball) / r ** self.ndim)
        return gamma

    def zeta(self, s: float, xi: float) -> float:
        """``max_i sum_j d_ij**s exp(-d_ij/xi)`` with ``0**0 = 1``."""
        d = self.distances.astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            pw = np.where(d == 0, 1.0 if s == 0 else 0.0, d ** s)
        return float(np.max(np.sum(pw * np.exp(-d / xi), axis=1)))

    def zeta_estimate(self, s: int, xi: float) -> float:
        """Closed-form upper estimate for :meth:`zeta` at integer ``s >= 0``."""
        if s < 0 or s != int(s):
            raise ValueError("closed form requires integer s >= 0")
        k = int(s) + self.ndim
        return 1.0 + self.growth_constant * math.exp(1.0 / xi) * xi ** k * math.factorial(k)


def chain(n: int, periodic: bool = False) -> Lattice:
    edges = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        edges.append((n - 1, 0))
    return Lattice(n, tuple(edges), ndim=1)


@dataclass(frozen=True)
class Term:
    """One few-site interaction: a local matrix on an ordered site tuple."""

    sites: tuple
    local: np.ndarray
    label: str = ""

    @cached_property
    def norm(self) -> float:
        return hb.operator_norm(self.local)


@dataclass
class Hamiltonian:
    """A sum of few-site terms plus naming metadata for reproducible records."""

    space: hb.SiteSpace
    lattice: Lattice
    terms: list
    name: str = "custom"
    params: dict = field(default_factory=dict)

    @cached_property
    def matrix(self) -> np.ndarray:
        h = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for t in self.terms:
            h += hb.embed_local(self.space, t.local, list(t.sites))
        return h

    @cached_property
    def interaction_strength(self) -> float:
        """``g = max_i sum over terms touching i of the term norm``."""
        per_site = np.zeros(self.space.n)
        for t in self.terms:
            for i in t.sites:
                per_site[i] += t.norm
        return float(per_site.max())

    @property
    def locality(self) -> int:
        """``k``: the largest number of sites any single term acts on."""
        return max(len(t.sites) for t in self.terms)

    def terms_within(self, region) -> list:
        inside = set(region)
        return [t for t in self.terms if set(t.sites) <= inside]

    def terms_crossing(self, region) -> list:
        """Terms with support both inside and outside ``region``."""
        inside = set(region)
        return [t for t in self.terms
                if (set(t.sites) & inside) and not (set(t.sites) <= inside)]

    def matrix_of(self, terms) -> np.ndarray:
        h = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for t in terms:
            h += hb.embed_local(self.space, t.local, list(t.sites))
        return h

    def restricted_matrix(self, terms, region) -> np.ndarray:
        """Matrix of ``terms`` on the register of ``region`` only (sorted order)."""
        region = sorted(set(region))
        pos = {site: j for j, site in enumerate(region)}
        sub = hb.SiteSpace(len(region), self.space.d0)
        h = np.zeros((sub.dim, sub.dim), dtype=complex)
        for t in terms:
            if not set(t.sites) <= set(region):
                raise ValueError("term %r leaves the region" % (t.label,))
            h += hb.embed_local(sub, t.local, [pos[s] for s in t.sites])
        return h

    @cached_property
    def model_hash(self) -> str:
        """Short stable digest of the model description (not of float noise)."""
        desc = {
            "name": self.name,
            "n": self.space.n,
            "d0": self.space.d0,
            "edges": sorted(tuple(sorted(e)) for e in self.lattice.edges),
            "params": {k: self.params[k] for k in sorted(self.params)},
        }
        blob = json.dumps(desc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def two_site(a: str, b: str) -> np.ndarray:
    return np.kron(PAULI[a], PAULI[b])


def tfi_chain(n: int, coupling: float = 1.0, field_x: float = 1.0,
              periodic: bool = False) -> Hamiltonian:
    """Transverse-field Ising chain ``-J sum Z_i Z_{i+1} - h sum X_i``."""
    lat = chain(n, periodic)
    space = hb.site_space(n, 2)
    terms = [Term((a, b), -coupling * two_site("z", "z"), "zz[%d,%d]" % (a, b))
             for (a, b) in lat.edges]
    terms += [Term((i,), -field_x * PAULI["x"], "x[%d]" % i) for i in range(n)]
    return Hamiltonian(space, lat, terms, name="tfi_chain",
                       params={"coupling": coupling, "field_x": field_x,
                               "periodic": periodic})


def xxz_chain(n: int, coupling: float = 1.0, anisotropy: float = 0.5,
              field_z: float = 0.0, periodic: bool = False) -> Hamiltonian:
    """XXZ chain ``J sum (X X + Y Y + Delta Z Z) + hz sum Z``."""
    lat = chain(n, periodic)
    space = hb.site_space(n, 2)
    terms = []
    for (a, b) in lat.edges:
        local = coupling * (two_site("x", "x") + two_site("y", "y")
                            + anisotropy * two_site("z", "z"))
        terms.append(Term((a, b), local, "xxz[%d,%d]" % (a, b)))
    if field_z:
        terms += [Term((i,), field_z * PAULI["z"], "z[%d]" % i) for i in range(n)]
    return Hamiltonian(space, lat, terms, name="xxz_chain",
                       params={"coupling": coupling, "anisotropy": anisotropy,
                               "field_z": field_z, "periodic": periodic})


def heisenberg_chain(n: int, coupling: float = 1.0, periodic: bool = False) -> Hamiltonian:
    return xxz_chain(n, coupling=coupling, anisotropy=1.0, periodic=periodic)


MODEL_BUILDERS = {
    "tfi_chain": tfi_chain,
    "xxz_chain": xxz_chain,
    "heisenberg_chain": heisenberg_chain,
}


def build_model(name: str, n: int, **params) -> Hamiltonian:
    if name not in MODEL_BUILDERS:
        raise ValueError("unknown model %r; have %s" % (name, sorted(MODEL_BUILDERS)))
    return MODEL_BUILDERS[name](n, **params)


def site_observable(space: hb.SiteSpace, which: str, site: int) -> hb.OperatorMatrix:
    """A single-site Pauli observable embedded in the full register."""
    if which not in ("x", "y", "z"):
        raise ValueError("observable must be one of x, y, z")
    mat = hb.embed_local(space, PAULI[which], [site])
    return hb.OperatorMatrix(space, mat, frozenset([site]), hermitian=True)


def region_observable(space: hb.SiteSpace, which: str, region) -> hb.OperatorMatrix:
    """Normalized sum ``(1/|X|) sum_{i in X} P_i`` so the norm stays <= 1."""
    region = sorted(set(region))
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for i in region:
        mat += hb.embed_local(space, PAULI[which], [i])
    mat /= len(region)
    return hb.OperatorMatrix(space, mat, frozenset(region), hermitian=True)


def extensive_observable(space: hb.SiteSpace, which: str,
                         region=None) -> hb.OperatorMatrix:
    """Unnormalized sum ``sum_{i in X} P_i`` (norm grows with ``|X|``)."""
    region = sorted(set(space.sites if region is None else region))
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for i in region:
        mat += hb.embed_local(space, PAULI[which], [i])
    return hb.OperatorMatrix(space, mat, frozenset(region), hermitian=True)

import math

import numpy as np
import pytest

from gibbslab import hilbert as hb
from gibbslab import model as md


def test_chain_distances_open_and_periodic():
    lat = md.chain(5)
    assert lat.distances[0, 4] == 4
    assert lat.distances[2, 2] == 0
    ring = md.chain(5, periodic=True)
    assert ring.distances[0, 4] == 1
    assert ring.distances[0, 2] == 2


def test_region_distance_and_ball():
    lat = md.chain(8)
    assert lat.distance([0, 1], [5, 6]) == 4
    assert lat.ball([3], 2) == [1, 2, 3, 4, 5]
    assert lat.ball([0], 1) == [0, 1]
    assert lat.ball([2, 5], 1) == [1, 2, 3, 4, 5, 6]


def test_boundary():
    lat = md.chain(8)
    assert lat.boundary([2, 3, 4]) == [2, 4]
    assert lat.boundary([0, 1, 2]) == [2]
    assert lat.boundary(range(8)) == []
    assert lat.boundary([3]) == [3]


def test_growth_constant_chain():
    # Interval volumes force 3: |ball(i,1)| = 3 in the bulk; surfaces give 2.
    assert md.chain(9).growth_constant == pytest.approx(3.0)
    assert md.chain(9, periodic=True).growth_constant == pytest.approx(3.0)


def test_zeta_matches_direct_sum_and_estimate():
    lat = md.chain(10)
    for s in (0, 1, 2):
        for xi in (0.5, 1.0, 2.0):
            # direct evaluation at the middle site dominated by construction
            best = 0.0
            for i in range(10):
                tot = 0.0
                for j in range(10):
                    d = abs(i - j)
                    pw = 1.0 if (d == 0 and s == 0) else float(d) ** s
                    tot += pw * math.exp(-d / xi)
                best = max(best, tot)
            assert lat.zeta(s, xi) == pytest.approx(best)
            assert lat.zeta(s, xi) <= lat.zeta_estimate(s, xi) + 1e-12


def test_tfi_matrix_small():
    ham = md.tfi_chain(2, coupling=1.0, field_x=1.0)
    z, x = md.PAULI["z"], md.PAULI["x"]
    want = (-np.kron(z, z) - np.kron(x, np.eye(2)) - np.kron(np.eye(2), x))
    assert np.allclose(ham.matrix, want)
    assert hb.is_hermitian(ham.matrix)


def test_interaction_strength_and_locality():
    # Bulk site of the TFI chain touches two coupling terms and one field term.
    ham = md.tfi_chain(6, coupling=1.0, field_x=1.0)
    assert ham.interaction_strength == pytest.approx(3.0)
    assert ham.locality == 2
    ham2 = md.tfi_chain(6, coupling=2.0, field_x=0.5)
    assert ham2.interaction_strength == pytest.approx(4.5)
    # XXZ two-site norm: eigenvalues of XX+YY+0.5 ZZ are {0.5, 0.5, -2.5, 1.5}.
    ham3 = md.xxz_chain(6, coupling=1.0, anisotropy=0.5)
    assert ham3.interaction_strength == pytest.approx(5.0)


def test_terms_within_and_crossing():
    ham = md.tfi_chain(6)
    region = [0, 1, 2]
    inside = ham.terms_within(region)
    crossing = ham.terms_crossing(region)
    labels = {t.label for t in crossing}
    assert labels == {"zz[2,3]"}
    all_touch = {t.label for t in inside} | labels
    assert "zz[0,1]" in {t.label for t in inside}
    assert "x[3]" not in all_touch
    # Partition identity: within(A) + within(complement) + crossing(A) = all.
    comp = [3, 4, 5]
    n_total = len(ham.terms)
    assert len(inside) + len(ham.terms_within(comp)) + len(crossing) == n_total


def test_restricted_matrix_consistency():
    ham = md.tfi_chain(5)
    region = [1, 2, 3]
    sub = ham.restricted_matrix(ham.terms_within(region), region)
    # Embedding the restricted matrix back must reproduce the summed terms.
    full = ham.matrix_of(ham.terms_within(region))
    assert np.allclose(hb.embed_local(ham.space, sub, region), full)


def test_model_hash_stability_and_sensitivity():
    a = md.tfi_chain(6, coupling=1.0, field_x=1.0)
    b = md.tfi_chain(6, coupling=1.0, field_x=1.0)
    c = md.tfi_chain(6, coupling=1.0, field_x=1.1)
    d = md.xxz_chain(6)
    assert a.model_hash == b.model_hash
    assert len(a.model_hash) == 12
    assert a.model_hash != c.model_hash
    assert a.model_hash != d.model_hash


def test_build_model_dispatch():
    ham = md.build_model("xxz_chain", 4, anisotropy=1.0)
    assert ham.name == "xxz_chain"
    heis = md.build_model("heisenberg_chain", 4)
    assert np.allclose(ham.matrix, heis.matrix)
    with pytest.raises(ValueError):
        md.build_model("nope", 4)


def test_site_and_region_observables():
    space = hb.site_space(3, 2)
    op = md.site_observable(space, "z", 0)
    assert np.allclose(op.mat, np.diag([1, 1, 1, 1, -1, -1, -1, -1]))
    assert op.support == frozenset([0])
    tot = md.region_observable(space, "z", [0, 1, 2])
    assert hb.operator_norm(tot.mat) == pytest.approx(1.0)
    assert tot.support == frozenset([0, 1, 2])
    with pytest.raises(ValueError):
        md.site_observable(space, "q", 0)

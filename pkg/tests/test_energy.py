import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffharm.errors import EmptySet, HypothesisViolated, NegativeValue, NotOnSphere, ZeroFunction
from ffharm.energy import (
    additive_energy, dyadic_terms, energy_bound_ratio, extension_ratio, extension_sweep,
    l4_energy_identity, l4_exponent, l4_regime_bound, normalize_and_decompose, right_angle_triples,
    subspace_witness_ratio,
)
from ffharm.ffcore import make_field
from ffharm.fourier import FunctionTable, indicator_transform
from ffharm.lattice import PointSet, Sphere, space, variety_mask

F3, F5, F7 = make_field(3), make_field(5), make_field(7)


def brute_energy(points, q):
    pts = [tuple(p) for p in points]
    n = 0
    for a, b, c in itertools.product(pts, repeat=3):
        dd = tuple((x + y - z) % q for x, y, z in zip(a, b, c))
        n += dd in set(pts)
    return n


def brute_rat(points, q):
    pts = [tuple(p) for p in points]
    return sum(
        1 for a, b, d in itertools.product(pts, repeat=3)
        if sum((bi - di) * (ai - di) for ai, bi, di in zip(a, b, d)) % q == 0
    )


def test_energy_examples():
    sp = space(F5, 2)
    assert additive_energy(PointSet.from_points(sp, [(1, 1)])).energy == 1
    full = additive_energy(PointSet.full(space(F3, 2)), ["naive", "pairsums", "fourier"])
    assert full.energy == 3 ** 6 and full.methods_agree
    two = additive_energy(PointSet.from_points(space(F7, 1), [(0,), (1,)]), ["naive", "pairsums", "fourier"])
    assert two.energy == 6 and two.methods_agree
    with pytest.raises(EmptySet):
        additive_energy(PointSet(sp, np.zeros(sp.size, bool)))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (3, 3)]), st.integers(1, 12), st.integers(0, 2**31))
def test_energy_methods_agree_with_brute_force(qd, n, seed):
    q, d = qd
    sp = space(make_field(q), d)
    A = PointSet.from_indices(sp, np.random.default_rng(seed).choice(sp.size, min(n, sp.size), replace=False))
    rep = additive_energy(A, ["naive", "pairsums", "fourier"])
    assert rep.methods_agree
    assert rep.energy == brute_energy(A.points(), q)
    assert rep.trivial_bounds_ok


def test_right_angle_triples():
    sp = space(F5, 2)
    assert right_angle_triples(PointSet.from_points(sp, [(2, 3)])) == 1
    A = PointSet.from_points(sp, [(0, 0), (1, 0), (0, 1)])
    assert right_angle_triples(A) == brute_rat(A.points(), 5)
    S = PointSet(space(F3, 3), space(F3, 3).norms == 1)
    assert right_angle_triples(S) == brute_rat(S.points(), 3)
    assert additive_energy(S).energy <= right_angle_triples(S)


@pytest.mark.parametrize("f,j", [(F3, 1), (F7, 1), (F7, 2), (make_field(11), 3)])
def test_energy_majorized_on_spheres(f, j):
    sp = space(f, 3)
    S = np.flatnonzero(sp.norms == j)
    rng = np.random.default_rng(f.q)
    for _ in range(5):
        A = PointSet.from_indices(sp, rng.choice(S, size=max(1, S.size // 2), replace=False))
        rep = energy_bound_ratio(A, j)
        assert rep.energy <= rep.rat_triples


def test_energy_bound_ratio_gate():
    sp = space(F3, 3)
    S1 = PointSet(sp, sp.norms == 1)
    rep = energy_bound_ratio(S1, 1)
    assert rep.energy == brute_energy(S1.points(), 3) and rep.ratio < 8
    with pytest.raises(HypothesisViolated):
        energy_bound_ratio(PointSet(sp, sp.norms == 2), 2)  # 2 is a nonsquare mod 3
    with pytest.raises(NotOnSphere):
        energy_bound_ratio(S1, 2)
    one = energy_bound_ratio(PointSet.from_indices(sp, S1.indices[:1]), 1)
    assert one.energy == 1 and one.ratio <= 1


def test_l4_identity():
    sp = space(F3, 3)
    one = PointSet.from_indices(sp, np.flatnonzero(sp.norms == 1)[:1])
    r = l4_energy_identity(one, 1)
    assert r.rhs == pytest.approx(27 ** 0.25 / 6) and r.rel_error < 1e-9
    assert l4_energy_identity(PointSet(sp, sp.norms == 1), 1).rel_error < 1e-6
    sp7 = space(F7, 3)
    S = np.flatnonzero(sp7.norms == 1)
    A = PointSet.from_indices(sp7, np.random.default_rng(0).choice(S, 40, replace=False))
    assert l4_energy_identity(A, 1).rel_error < 1e-6
    # centred sphere
    B = PointSet(sp7, variety_mask(sp7, Sphere(3, (1, 2, 0))))
    assert l4_energy_identity(B, 3, center=(1, 2, 0)).rel_error < 1e-6


def test_l4_regimes_increase():
    q, d = 7, 3
    regimes = [l4_regime_bound(n, q, d)[0] for n in (1, 7, 60, 300)]
    assert regimes == sorted(regimes) and regimes[0] == 1
    assert l4_exponent(3) == Fraction(12, 7)


def test_dyadic_decomposition():
    sp = space(F7, 3)
    n = int((sp.norms == 1).sum())
    dec = normalize_and_decompose(sp, 1, np.ones(n))
    assert len(dec.levels) == 1
    vals = np.where(np.arange(n) % 2, 1.0, 0.5)
    dec = normalize_and_decompose(sp, 1, vals)
    assert len(dec.levels) == 2
    rng = np.random.default_rng(2)
    f = rng.random(n) + 1e-3
    dec = normalize_and_decompose(sp, 1, f)
    g = dec.reconstruction()
    assert np.all(g <= dec.values) and np.all(dec.values < 2 * g)
    assert sum(dec.values ** float(dec.exponent)) == pytest.approx(1.0)
    assert dec.sizes_ok() and dec.disjoint()
    terms = dyadic_terms(sp, 1, dec)
    assert terms.total <= 2 * (terms.head + terms.tail) + 1e-9  # f < 2g pointwise
    with pytest.raises(NegativeValue):
        normalize_and_decompose(sp, 1, -f)
    with pytest.raises(ZeroFunction):
        normalize_and_decompose(sp, 1, np.zeros(n))


def test_extension_ratio_constant_closed_form():
    sp = space(F5, 3)
    S = PointSet(sp, sp.norms == 2)
    tab = FunctionTable.on_variety(sp, Sphere(2))
    r = extension_ratio(tab, 3, 3)
    expect = float(np.sum(np.abs(indicator_transform(S)) ** 3)) ** (1 / 3) / len(S)
    assert r.ratio == pytest.approx(expect)


def test_subspace_witness_closed_form():
    # f = 1_H for an affine line H in S_1 of F_5^3:
    # ratio = (|H|/|V|)^{1-1/p} q^{(d-k)/r}
    sp = space(F5, 3)
    nV = int((sp.norms == 1).sum())
    d, k, q = 3, 1, 5
    for p, r in [(Fraction(2), Fraction(4)), (Fraction(3, 2), Fraction(6)), (Fraction(12, 7), Fraction(4))]:
        rec = subspace_witness_ratio(sp, 1, p, r)
        expect = (q / nV) ** (1 - 1 / float(p)) * q ** ((d - k) / float(r))
        assert rec.ratio == pytest.approx(expect)


def test_extension_sweep_bounded():
    sp = space(F7, 3)
    recs = extension_sweep(sp, 1, Fraction(12, 7), 4, trials=5, seed=1, gate="square_radius")
    assert recs and max(r.ratio for r in recs) < 16
    with pytest.raises(HypothesisViolated):
        extension_sweep(space(F5, 3), 1, Fraction(12, 7), 4, exploratory=False, gate="square_radius")

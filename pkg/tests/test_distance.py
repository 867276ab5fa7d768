import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffharm.distance import (
    coverage_experiment, coverage_threshold, distance_sets, loai0_check, mu3, restriction_norms,
    second_moment_check, sphere_fourier_decay, sphere_pair_grid, sphere_pair_identity,
)
from ffharm.errors import EmptySet, HypothesisViolated, InvalidParams, ZeroRadius
from ffharm.ffcore import make_field
from ffharm.fourier import sphere_transforms
from ffharm.lattice import PointSet, space

F3, F5 = make_field(3), make_field(5)


def brute_mu3(points, q):
    out = [0] * q
    for x, y, z in itertools.product(points, repeat=3):
        out[sum((a + b + c) ** 2 for a, b, c in zip(x, y, z)) % q] += 1
    return out


def test_mu3_singleton_origin():
    sp = space(F5, 2)
    t = mu3(PointSet.from_points(sp, [(0, 0)]))
    assert list(t.counts) == [1, 0, 0, 0, 0] and t.mass_ok


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (3, 3)]), st.integers(1, 10), st.integers(0, 2**31))
def test_mu3_methods_match_brute_force(qd, n, seed):
    q, d = qd
    sp = space(make_field(q), d)
    A = PointSet.from_indices(sp, np.random.default_rng(seed).choice(sp.size, min(n, sp.size), replace=False))
    expect = brute_mu3(A.points(), q)
    for method in ("naive", "convolution", "fourier_identity"):
        t = mu3(A, method)
        assert list(t.counts) == expect and t.mass_ok
    assert mu3(A).support() == {t for t, c in enumerate(expect) if c}


def test_mu3_errors():
    sp = space(F3, 2)
    with pytest.raises(EmptySet):
        mu3(PointSet(sp, np.zeros(9, bool)))
    with pytest.raises(InvalidParams):
        mu3(PointSet.full(sp), "fft")


def test_distance_sets():
    sp = space(F5, 2)
    d2, d3 = distance_sets(PointSet.from_points(sp, [(1, 2)]))
    assert d2 == {0} and d3 == {(9 + 36) % 5}
    d2, _ = distance_sets(PointSet.full(space(F3, 2)))
    assert d2 == {0, 1, 2}
    rng = np.random.default_rng(0)
    A = PointSet.from_indices(sp, rng.choice(25, 6, replace=False))
    pts = A.points()
    brute = {sum((a - b) ** 2 for a, b in zip(x, y)) % 5 for x in pts for y in pts}
    assert distance_sets(A)[0] == brute


def test_pair_identity_examples():
    sp = space(F3, 1)
    r = sphere_pair_identity(sp, 0, 0)
    assert r.lhs == pytest.approx(5) and r.rhs == pytest.approx(5)
    sp = space(F5, 2)
    m, v = sp.index((1, 0)), sp.index((1, 1))
    r = sphere_pair_identity(sp, m, v)
    assert r.rhs == -5 and r.error < 1e-9
    assert sphere_pair_grid(sp) < 1e-9
    rng = np.random.default_rng(0)
    S = sphere_transforms(sp)
    for m, v in rng.integers(0, 25, size=(20, 2)):
        assert sphere_pair_identity(sp, int(m), int(v), S).error < 1e-6


def test_sphere_decay():
    sp = space(F3, 3)
    S = sphere_transforms(sp)
    d1 = sphere_fourier_decay(sp, 1, S)
    brute = max(abs(S[1, x]) for x in range(1, 27))
    assert d1.max_nonzero == pytest.approx(brute) and d1.ratio == pytest.approx(brute / 3)
    d0 = sphere_fourier_decay(sp, 0, S)
    assert d0.max_nonzero > 0
    for q in (3, 5, 7):
        for d in (2, 3):
            sp = space(make_field(q), d)
            S = sphere_transforms(sp)
            assert all(sphere_fourier_decay(sp, t, S).ratio <= 3 for t in range(1, q))


def test_large_set_checks():
    sp = space(F3, 4)
    full = loai0_check(PointSet.full(sp))
    assert full.first and full.second
    m0 = mu3(PointSet.full(sp), "convolution")[0]
    assert 9 * (81**3 - m0) ** 2 >= 81**6
    with pytest.raises(HypothesisViolated):
        loai0_check(PointSet.from_indices(sp, range(26)))
    rng = np.random.default_rng(1)
    for _ in range(10):
        A = PointSet.from_indices(sp, rng.choice(81, math.ceil(3 * 3**2), replace=False))
        c = loai0_check(A)
        assert c.first and c.second


def test_restriction_norms():
    sp = space(F3, 4)
    r = restriction_norms(PointSet.full(sp), 1)
    assert r.l2 < 1e-9 and r.l3 < 1e-9
    A = PointSet.from_indices(sp, np.random.default_rng(0).choice(81, 40, replace=False))
    r = restriction_norms(A, 1)
    assert r.l3_bound == pytest.approx(40 ** (7 / 9)) and r.l3_ratio > 0
    with pytest.raises(ZeroRadius):
        restriction_norms(A, 0)
    sp9 = space(make_field(3, 2), 3)
    B = PointSet.from_indices(sp9, np.random.default_rng(0).choice(sp9.size, 9, replace=False))
    r = restriction_norms(B, 1)
    assert r.l3_bound is None and any("exploratory" in f for f in r.flags)


def test_second_moment():
    sp = space(F3, 4)
    rec = second_moment_check(PointSet.full(sp))
    assert rec.delta3 == 3 and rec.cs_lower_bound <= 3 and rec.cs_ok
    A = PointSet.from_indices(sp, np.random.default_rng(4).choice(81, 27, replace=False))
    rec = second_moment_check(A)
    assert rec.cs_ok and rec.cs_lower_bound <= rec.delta3
    # integer form of Cauchy-Schwarz
    assert rec.sum_nonzero**2 <= rec.delta3_nonzero * rec.second_moment


def test_coverage():
    assert coverage_threshold(3, 4) == 14
    rows = coverage_experiment(F3, 4, [1, 14, 81], trials=10, seed=0)
    assert rows[0].mean_delta3_over_q == pytest.approx(1 / 3)
    assert rows[-1].full_coverage_fraction == 1.0
    again = coverage_experiment(F3, 4, [1, 14, 81], trials=10, seed=0)
    assert [r.to_row() for r in rows] == [r.to_row() for r in again]
    with pytest.raises(HypothesisViolated):
        coverage_experiment(F3, 3, [5], 2, 0)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ffharm.errors import BadExponent, DimensionMismatch, EmptyVariety, InvalidParams
from ffharm.ffcore import make_field
from ffharm.fourier import (
    COUNTING, SURFACE, FunctionTable, extension_inverse, forward, forward_array, forward_direct,
    indicator_transform, inverse, inverse_array, lp_norm,
)
from ffharm.lattice import PointSet, Sphere, space, variety_mask

F3, F5 = make_field(3), make_field(5)


def test_delta_and_constant():
    sp = space(F3, 2)
    delta = np.zeros(sp.size)
    delta[0] = 1
    assert np.allclose(forward(FunctionTable(sp, delta)).values, 1)
    expect = np.zeros(sp.size)
    expect[0] = sp.size
    assert np.allclose(forward(FunctionTable(sp, np.ones(sp.size))).values, expect)
    assert np.allclose(inverse(FunctionTable(sp, expect)).values, 1)
    assert np.allclose(inverse(FunctionTable(sp, np.ones(sp.size))).values, delta)


def test_sphere_transform_at_zero():
    sp = space(F3, 3)
    assert math.isclose(indicator_transform(PointSet(sp, sp.norms == 1))[0].real, 6)


@pytest.mark.parametrize("pk,d", [((3, 1), 2), ((5, 1), 2), ((3, 2), 2), ((7, 1), 1), ((3, 1), 3)])
def test_axis_transform_matches_double_sum(pk, d):
    sp = space(make_field(*pk), d)
    g = np.random.default_rng(1).normal(size=sp.size) + 1j
    assert np.max(np.abs(forward_array(sp, g) - forward_direct(sp, g))) < 1e-9


def test_round_trip_random_q5():
    sp = space(F5, 2)
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = rng.normal(size=sp.size) + 1j * rng.normal(size=sp.size)
        assert np.max(np.abs(inverse_array(sp, forward_array(sp, g)) - g)) < 1e-9


def test_extension_examples():
    sp = space(F3, 3)
    ones = FunctionTable.on_variety(sp, Sphere(1))
    ext = extension_inverse(ones)
    assert abs(ext.values[0] - 1) < 1e-12
    # (1 dsigma)^v(m) = S^(-m) / |S|
    S = indicator_transform(PointSet(sp, sp.norms == 1))
    neg = sp.neg(np.arange(sp.size))
    assert np.allclose(ext.values, S[neg] / 6)
    point = FunctionTable.on_variety(sp, Sphere(1), values=np.eye(1, 6, 2).ravel())
    assert np.allclose(np.abs(extension_inverse(point).values), 1 / 6)


def test_extension_of_full_space_table_needs_variety():
    sp = space(F3, 2)
    with pytest.raises(InvalidParams):
        extension_inverse(FunctionTable(sp, np.ones(sp.size)))
    line = space(F3, 1)  # S_2 is empty in F_3^1
    with pytest.raises(EmptyVariety):
        extension_inverse(FunctionTable(line, np.ones(3)), Sphere(2))


def test_lp_norms():
    sp = space(F5, 2)
    one = FunctionTable.on_variety(sp, Sphere(1))
    for p in (1, 2, 3.5, np.inf):
        assert math.isclose(lp_norm(one, p), 1.0)
    delta = FunctionTable(sp, np.eye(1, sp.size, 0).ravel(), COUNTING)
    assert lp_norm(delta, 2) == 1
    n = int((sp.norms == 1).sum())
    vals = np.zeros(n)
    vals[:3] = 1
    A = FunctionTable.on_variety(sp, Sphere(1), vals)
    for p in (1, 2, 4):
        assert math.isclose(lp_norm(A, p), (3 / n) ** (1 / p))
    with pytest.raises(BadExponent):
        lp_norm(A, 0.5)


def test_table_shape_checked():
    with pytest.raises(DimensionMismatch):
        FunctionTable(space(F3, 2), np.ones(4))


def test_json_round_trip():
    sp = space(F5, 2)
    t = FunctionTable.on_variety(sp, Sphere(2), np.arange(int((sp.norms == 2).sum())) + 0.5j)
    back = FunctionTable.from_json(t.to_json())
    assert back.measure == SURFACE and np.allclose(back.values, t.values)
    full = FunctionTable(sp, np.arange(sp.size, dtype=float))
    assert np.allclose(FunctionTable.from_json(full.to_json()).values, full.values)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (3, 3), (7, 2)]), st.integers(0, 2**31))
def test_plancherel(qd, seed):
    sp = space(make_field(qd[0]), qd[1])
    g = np.random.default_rng(seed).normal(size=(sp.size, 2)) @ np.array([1, 1j])
    gh = forward_array(sp, g)
    lhs, rhs = np.sum(np.abs(gh) ** 2), sp.size * np.sum(np.abs(g) ** 2)
    assert abs(lhs - rhs) <= 1e-9 * rhs

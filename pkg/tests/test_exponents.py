import json
from fractions import Fraction

import pytest

from ffharm.errors import BadExponent, BadTheta, InvalidParams
from ffharm.exponents import (
    INF, RADIUS_CLASSES, catalog, catalog_json, conjugate, dump_catalog, interpolate, l4_gate,
    necessary_r, recover_theta,
)


def test_worked_interpolation():
    assert interpolate(1, INF, Fraction(8, 5), 4, Fraction(8, 9)) == (Fraction(3, 2), Fraction(9, 2))


def test_endpoints():
    pts = [(Fraction(8, 5), Fraction(4)), (Fraction(1), INF), (Fraction(2), Fraction(3)), (INF, INF)]
    for (p0, r0) in pts:
        for (p1, r1) in pts:
            assert interpolate(p0, r0, p1, r1, 0) == (p0, r0)
            assert interpolate(p0, r0, p1, r1, 1) == (p1, r1)


def test_theta_recovered():
    for th in (Fraction(1, 3), Fraction(8, 9), Fraction(1, 2)):
        _, r = interpolate(Fraction(8, 5), 4, 1, INF, th)
        assert recover_theta(4, INF, r) == th
    with pytest.raises(InvalidParams):
        recover_theta(4, 4, 4)


def test_errors():
    with pytest.raises(BadTheta):
        interpolate(1, 2, 2, 4, Fraction(3, 2))
    with pytest.raises(BadExponent):
        interpolate(Fraction(1, 2), 2, 2, 4, Fraction(1, 2))


def test_conjugate():
    assert conjugate(2) == 2 and conjugate(1) == INF and conjugate(INF) == 1
    assert conjugate(Fraction(12, 7)) == Fraction(12, 5)


def test_necessary_r():
    assert necessary_r(3, 2, 1) == 4
    assert necessary_r(3, 1, 1) == INF
    assert necessary_r(5, INF, 0) == Fraction(5, 2)
    # nonincreasing in p on a grid
    for d in (3, 4, 5, 7):
        for k in range(d - 1):
            vals = [necessary_r(d, Fraction(n, 8), k) for n in range(9, 64)]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            assert all(v >= Fraction(2 * d, d - 1) for v in vals)


def test_catalog_examples():
    rec = catalog(3, 3, "square")
    assert rec.achieved_p() == Fraction(12, 7)
    assert rec.conjectured_p() == Fraction(8, 5)
    assert rec.necessary_r(2, 1) == 4
    assert catalog(4, 1, "square").conjectured_r() == 3
    assert catalog(3, 1, "square").achieved_p() is None
    assert l4_gate(3, 7, "square") is not None and l4_gate(3, 5, "square") is None


def test_conjectures_never_weaker():
    for d in range(2, 21):
        for qc in (1, 3):
            for rc in RADIUS_CLASSES:
                assert catalog(d, qc, rc).consistent()
    for k in range(1, 6):
        for d in (4 * k - 1, 4 * k + 1):
            assert Fraction(4 * d + 4, 3 * d + 1) < Fraction(4 * d, 3 * d - 2)


def test_dual_pairs_and_json(tmp_path):
    e = catalog(3, 3, "square").achieved[-1]
    assert e.dual == (Fraction(4, 3), Fraction(12, 5))
    path = tmp_path / "cat.json"
    dump_catalog(path, max_d=6)
    data = json.loads(path.read_text())
    assert data == catalog_json(6)
    assert len(data) == 5 * 2 * len(RADIUS_CLASSES)


def test_catalog_rejects_bad_keys():
    with pytest.raises(InvalidParams):
        catalog(1, 3, "square")
    with pytest.raises(InvalidParams):
        catalog(3, 2, "square")
    with pytest.raises(InvalidParams):
        catalog(3, 3, "cube")

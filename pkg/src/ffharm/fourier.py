"""Fourier transforms on F_q^d with the counting / normalized / surface measures.

Conventions::

    forward:    g^(x)        = sum_m g(m) chi(-x.m)
    inverse:    f^v(m)       = q^-d sum_x f(x) chi(m.x)
    extension:  (f dsigma)^v(m) = |V|^-1 sum_{x in V} f(x) chi(m.x)

Both full-space transforms are computed axis by axis: chi(x.m) factors over
coordinates, so one q x q kernel applied along each of the d axes gives the
whole transform in O(d q^(d+1)) operations.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import BadExponent, DimensionMismatch, EmptyVariety, InvalidParams
from .ffcore import Field
from .lattice import PointSet, Space, VarietySpec, space, spec_from_json, spec_to_json, variety_mask

COUNTING = "counting"
NORMALIZED = "normalized"
SURFACE = "surface"
MEASURES = (COUNTING, NORMALIZED, SURFACE)


@functools.lru_cache(maxsize=None)
def kernel(f: Field) -> np.ndarray:
    """K[x, m] = chi(x*m) for x, m in F_q."""
    k = f.chi_table[f.mul_table]
    k.setflags(write=False)
    return k


def _axis_transform(values: np.ndarray, sp: Space, K: np.ndarray) -> np.ndarray:
    if sp.dim == 0:
        return values.astype(complex)
    a = np.asarray(values, dtype=complex).reshape((sp.q,) * sp.dim)
    for ax in range(sp.dim):
        a = np.moveaxis(np.tensordot(K, a, axes=([1], [ax])), 0, ax)
    return a.reshape(sp.size)


def forward_array(sp: Space, values: np.ndarray) -> np.ndarray:
    return _axis_transform(values, sp, kernel(sp.field).conj())


def inverse_array(sp: Space, values: np.ndarray) -> np.ndarray:
    return _axis_transform(values, sp, kernel(sp.field)) / sp.size


def forward_direct(sp: Space, values: np.ndarray) -> np.ndarray:
    """Naive double sum; O(q^{2d}), for cross-checking only."""
    idx = np.arange(sp.size)
    dots = sp.dot(idx[:, None], idx[None, :])
    return sp.field.chi_table[sp.field.neg_table[dots]] @ np.asarray(values, dtype=complex)


def indicator_transform(A: PointSet) -> np.ndarray:
    """A^(x) = sum_{m in A} chi(-x.m) for every x."""
    return forward_array(A.space, A.mask.astype(float))


@dataclass
class FunctionTable:
    """Complex function on F_q^d (``support is None``) or on a variety.

    Variety-supported tables keep ``indices`` (sorted point indices of V) and
    one value per point of V.
    """

    space: Space
    values: np.ndarray
    measure: str = COUNTING
    support: VarietySpec | None = None
    indices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise InvalidParams(f"unknown measure {self.measure!r}")
        self.values = np.asarray(self.values, dtype=complex)
        if self.indices is None:
            if self.values.shape != (self.space.size,):
                raise DimensionMismatch("full-space table needs q^d values")
        elif self.values.shape != self.indices.shape:
            raise DimensionMismatch("one value per support point expected")

    @classmethod
    def on_variety(cls, sp: Space, spec: VarietySpec, values=None, measure: str = SURFACE) -> FunctionTable:
        idx = np.flatnonzero(variety_mask(sp, spec))
        vals = np.ones(idx.size, dtype=complex) if values is None else values
        return cls(sp, vals, measure, spec, idx)

    @classmethod
    def from_pointset(cls, A: PointSet, V: PointSet | None = None, spec: VarietySpec | None = None) -> FunctionTable:
        """Indicator of A; on V with surface measure when V is given."""
        if V is None:
            return cls(A.space, A.mask.astype(complex))
        idx = V.indices
        return cls(A.space, A.mask[idx].astype(complex), SURFACE, spec, idx)

    @property
    def full_space(self) -> bool:
        return self.indices is None

    @property
    def support_size(self) -> int:
        return self.space.size if self.indices is None else int(self.indices.size)

    def dense(self) -> np.ndarray:
        if self.indices is None:
            return self.values
        out = np.zeros(self.space.size, dtype=complex)
        out[self.indices] = self.values
        return out

    def weight(self) -> float:
        if self.measure == COUNTING:
            return 1.0
        if self.measure == NORMALIZED:
            return 1.0 / self.space.size
        n = self.support_size
        if n == 0:
            raise EmptyVariety("surface measure on an empty variety")
        return 1.0 / n

    def to_json(self) -> dict[str, Any]:
        idx = np.arange(self.space.size) if self.indices is None else self.indices
        return {
            "field": self.space.field.to_json(),
            "dim": self.space.dim,
            "support": "full" if self.support is None else spec_to_json(self.support),
            "measure": self.measure,
            "values": [[int(i), float(v.real), float(v.imag)] for i, v in zip(idx, self.values)],
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> FunctionTable:
        f = Field.from_json(obj["field"])
        sp = space(f, int(obj["dim"]))
        measure = obj.get("measure", COUNTING)
        support = obj.get("support", "full")
        vals = {int(i): complex(re, im) for i, re, im in obj["values"]}
        if support == "full":
            dense = np.zeros(sp.size, dtype=complex)
            for i, v in vals.items():
                dense[i] = v
            return cls(sp, dense, measure)
        spec = spec_from_json(support)
        idx = np.flatnonzero(variety_mask(sp, spec))
        stray = set(vals) - set(idx.tolist())
        if stray:
            raise InvalidParams(f"values at {sorted(stray)[:5]} lie outside the variety")
        return cls(sp, np.array([vals.get(int(i), 0) for i in idx], dtype=complex), measure, spec, idx)


def forward(g: FunctionTable) -> FunctionTable:
    if not g.full_space:
        raise InvalidParams("forward transform needs a full-space table")
    return FunctionTable(g.space, forward_array(g.space, g.values), NORMALIZED)


def inverse(f: FunctionTable) -> FunctionTable:
    if not f.full_space:
        raise InvalidParams("inverse transform needs a full-space table")
    return FunctionTable(f.space, inverse_array(f.space, f.values), COUNTING)


def extension_inverse(f: FunctionTable, V: VarietySpec | None = None) -> FunctionTable:
    """(f dsigma)^v on the whole space, counting measure."""
    if f.full_space:
        if V is None:
            raise InvalidParams("need a variety for a full-space table")
        mask = variety_mask(f.space, V)
        f = FunctionTable(f.space, f.values[mask], SURFACE, V, np.flatnonzero(mask))
    n = f.support_size
    if n == 0:
        raise EmptyVariety("(f dsigma)^v on an empty variety")
    vals = inverse_array(f.space, f.dense()) * (f.space.size / n)
    return FunctionTable(f.space, vals, COUNTING)


def _check_exponent(p) -> None:
    if p != np.inf and not (p >= 1):
        raise BadExponent(f"exponent {p} outside [1, inf]")


def weighted_lp(values: np.ndarray, weight: float, p) -> float:
    _check_exponent(p)
    a = np.abs(values)
    if p == np.inf:
        return float(a.max()) if a.size else 0.0
    p = float(p) if isinstance(p, Fraction) else p
    return float((weight * np.sum(a**p)) ** (1.0 / p))


def lp_norm(f: FunctionTable, p) -> float:
    """(sum w(x)|f(x)|^p)^(1/p) under the table's measure; p may be np.inf."""
    return weighted_lp(f.values, f.weight(), p)


def sphere_transforms(sp: Space) -> np.ndarray:
    """Row t holds S_t^ for every frequency, shape (q, q^d)."""
    return np.stack([forward_array(sp, (sp.norms == t).astype(float)) for t in range(sp.q)])


__all__ = [
    "FunctionTable", "forward", "inverse", "extension_inverse", "lp_norm", "weighted_lp",
    "forward_array", "inverse_array", "forward_direct", "indicator_transform",
    "sphere_transforms", "kernel", "COUNTING", "NORMALIZED", "SURFACE",
]

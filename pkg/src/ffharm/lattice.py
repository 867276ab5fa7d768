"""Points of F_q^d, the quadratic form, varieties, and isotropic-subspace search.

A point is addressed by its integer index ``sum_j x_j * q**j`` (first
coordinate least significant).  :class:`Space` precomputes the coordinate
table for all ``q**d`` indices, so point arithmetic over whole index arrays
is vectorised through the field's lookup tables.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Sequence, Union

import numpy as np

from .errors import CapExceeded, DimensionMismatch, IndexOutOfRange, InvalidParams
from .ffcore import Field, radius_class

DEFAULT_POINT_CAP = 2**22
EXHAUSTIVE_CAP = 2**18
RESTART_BUDGET = 10_000

Point = tuple[int, ...]


def field_reduce_add(f: Field, terms: np.ndarray) -> np.ndarray:
    """Field-sum along the last axis of an element array."""
    out = terms[..., 0]
    for j in range(1, terms.shape[-1]):
        out = f.add_table[out, terms[..., j]]
    return out


class Space:
    """F_q^d with its canonical point <-> index bijection."""

    def __init__(self, field: Field, dim: int, point_cap: int = DEFAULT_POINT_CAP):
        if dim < 0:
            raise DimensionMismatch(f"negative dimension {dim}")
        self.field = field
        self.dim = dim
        self.q = field.q
        self.size = self.q**dim
        if self.size > point_cap:
            raise CapExceeded(f"q^d = {self.size} exceeds the point cap {point_cap}")
        self.weights = self.q ** np.arange(dim, dtype=np.int64)
        idx = np.arange(self.size, dtype=np.int64)
        self.coords = np.stack([(idx // w) % self.q for w in self.weights], axis=1) if dim else np.zeros((1, 0), np.int64)
        self.coords.setflags(write=False)

    def __repr__(self) -> str:
        return f"Space(F_{self.q}^{self.dim})"

    # -- bijection ------------------------------------------------------------
    def index(self, x: Sequence[int]) -> int:
        if len(x) != self.dim:
            raise DimensionMismatch(f"point {tuple(x)} is not in dimension {self.dim}")
        for c in x:
            if not 0 <= c < self.q:
                raise IndexOutOfRange(f"coordinate {c} outside F_{self.q}")
        return int(np.dot(np.asarray(x, dtype=np.int64), self.weights))

    def point(self, i: int) -> Point:
        if not 0 <= i < self.size:
            raise IndexOutOfRange(f"index {i} outside [0, {self.size})")
        return tuple(int(c) for c in self.coords[i])

    def index_array(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords, dtype=np.int64) @ self.weights

    # -- vectorised arithmetic on index arrays -----------------------------
    def add(self, i, j) -> np.ndarray:
        return self.index_array(self.field.add_table[self.coords[i], self.coords[j]])

    def neg(self, i) -> np.ndarray:
        return self.index_array(self.field.neg_table[self.coords[i]])

    def sub(self, i, j) -> np.ndarray:
        f = self.field
        return self.index_array(f.add_table[self.coords[i], f.neg_table[self.coords[j]]])

    def scale(self, s, i) -> np.ndarray:
        s = np.asarray(s)[..., None]
        return self.index_array(self.field.mul_table[s, self.coords[i]])

    def dot(self, i, j) -> np.ndarray:
        f = self.field
        return field_reduce_add(f, f.mul_table[self.coords[i], self.coords[j]])

    @functools.cached_property
    def norms(self) -> np.ndarray:
        """||x|| = x_1^2 + ... + x_d^2 for every index."""
        if self.dim == 0:
            return np.zeros(1, dtype=np.int64)
        n = field_reduce_add(self.field, self.field.sq_table[self.coords])
        n.setflags(write=False)
        return n

    def norm(self, x: Sequence[int]) -> int:
        return int(self.norms[self.index(x)])


@functools.lru_cache(maxsize=64)
def space(field: Field, dim: int) -> Space:
    return Space(field, dim)


def point_index(f: Field, x: Sequence[int]) -> int:
    return space(f, len(x)).index(x)


def index_point(f: Field, d: int, i: int) -> Point:
    return space(f, d).point(i)


def quad_norm(f: Field, x: Sequence[int]) -> int:
    return space(f, len(x)).norm(x)


def dot(f: Field, x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise DimensionMismatch(f"dot of dimensions {len(x)} and {len(y)}")
    return int(field_reduce_add(f, f.mul_table[np.asarray(x), np.asarray(y)][None, :])[0]) if len(x) else 0


# -- point sets ---------------------------------------------------------------

class PointSet:
    """A subset of F_q^d as a dense boolean mask over point indices."""

    def __init__(self, sp: Space, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (sp.size,):
            raise DimensionMismatch(f"mask of length {mask.shape} for {sp}")
        self.space = sp
        self.mask = mask
        self.mask.setflags(write=False)

    @classmethod
    def from_indices(cls, sp: Space, indices: Iterable[int]) -> PointSet:
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= sp.size):
            raise IndexOutOfRange("point index outside the space")
        mask = np.zeros(sp.size, dtype=bool)
        mask[idx] = True
        return cls(sp, mask)

    @classmethod
    def from_points(cls, sp: Space, points: Iterable[Sequence[int]]) -> PointSet:
        return cls.from_indices(sp, [sp.index(x) for x in points])

    @classmethod
    def full(cls, sp: Space) -> PointSet:
        return cls(sp, np.ones(sp.size, dtype=bool))

    @property
    def field(self) -> Field:
        return self.space.field

    @property
    def dim(self) -> int:
        return self.space.dim

    @functools.cached_property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def points(self) -> list[Point]:
        return [self.space.point(int(i)) for i in self.indices]

    def __len__(self) -> int:
        return int(np.count_nonzero(self.mask))

    def __contains__(self, x) -> bool:
        i = x if isinstance(x, (int, np.integer)) else self.space.index(x)
        return bool(self.mask[i])

    def __or__(self, other: PointSet) -> PointSet:
        return PointSet(self.space, self.mask | other.mask)

    def __and__(self, other: PointSet) -> PointSet:
        return PointSet(self.space, self.mask & other.mask)

    def __sub__(self, other: PointSet) -> PointSet:
        return PointSet(self.space, self.mask & ~other.mask)

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSet) and self.space is other.space and bool(np.array_equal(self.mask, other.mask))

    def __repr__(self) -> str:
        return f"PointSet({self.space}, |A|={len(self)})"

    def to_json(self) -> dict[str, Any]:
        return {"field": self.field.to_json(), "dim": self.dim, "indices": [int(i) for i in self.indices]}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> PointSet:
        f = Field.from_json(obj["field"])
        return cls.from_indices(space(f, int(obj["dim"])), obj["indices"])


# -- varieties ----------------------------------------------------------------

@dataclass(frozen=True)
class Sphere:
    j: int
    center: Point | None = None  # None means the origin


@dataclass(frozen=True)
class ParaboloidTranslate:
    beta: int = 0


@dataclass(frozen=True)
class Cone:
    n: int


@dataclass(frozen=True)
class Hyperplane:
    a: Point
    c: int

    def __post_init__(self):
        if not any(self.a):
            raise InvalidParams("hyperplane normal must be nonzero")


@dataclass(frozen=True)
class AffineSubspace:
    basis: tuple[Point, ...]
    offset: Point


VarietySpec = Union[Sphere, ParaboloidTranslate, Cone, Hyperplane, AffineSubspace]

_KINDS = {
    "sphere": Sphere,
    "paraboloid": ParaboloidTranslate,
    "cone": Cone,
    "hyperplane": Hyperplane,
    "affine_subspace": AffineSubspace,
}


def spec_to_json(spec: VarietySpec) -> dict[str, Any]:
    if isinstance(spec, Sphere):
        return {"kind": "sphere", "j": spec.j, "center": list(spec.center) if spec.center is not None else None}
    if isinstance(spec, ParaboloidTranslate):
        return {"kind": "paraboloid", "beta": spec.beta}
    if isinstance(spec, Cone):
        return {"kind": "cone", "n": spec.n}
    if isinstance(spec, Hyperplane):
        return {"kind": "hyperplane", "a": list(spec.a), "c": spec.c}
    if isinstance(spec, AffineSubspace):
        return {"kind": "affine_subspace", "basis": [list(v) for v in spec.basis], "offset": list(spec.offset)}
    raise InvalidParams(f"not a variety spec: {spec!r}")


def spec_from_json(obj: dict[str, Any]) -> VarietySpec:
    kind = obj.get("kind")
    if kind == "sphere":
        c = obj.get("center")
        return Sphere(int(obj["j"]), tuple(c) if c is not None else None)
    if kind == "paraboloid":
        return ParaboloidTranslate(int(obj.get("beta", 0)))
    if kind == "cone":
        return Cone(int(obj["n"]))
    if kind == "hyperplane":
        return Hyperplane(tuple(obj["a"]), int(obj["c"]))
    if kind == "affine_subspace":
        return AffineSubspace(tuple(tuple(v) for v in obj["basis"]), tuple(obj["offset"]))
    raise InvalidParams(f"unknown variety kind {kind!r}; expected one of {sorted(_KINDS)}")


def _point_array(sp: Space, x: Sequence[int]) -> np.ndarray:
    if len(x) != sp.dim:
        raise DimensionMismatch(f"point {tuple(x)} is not in dimension {sp.dim}")
    return np.asarray(x, dtype=np.int64)


def variety_mask(sp: Space, spec: VarietySpec) -> np.ndarray:
    f = sp.field
    c = sp.coords
    if isinstance(spec, Sphere):
        if spec.center is None or not any(spec.center):
            return sp.norms == spec.j
        ctr = _point_array(sp, spec.center)
        diff = f.add_table[c, f.neg_table[ctr][None, :]]
        return field_reduce_add(f, f.sq_table[diff]) == spec.j
    if isinstance(spec, ParaboloidTranslate):
        # x_d + beta = x_1^2 + ... + x_{d-1}^2
        if sp.dim < 2:
            raise DimensionMismatch("paraboloid needs d >= 2")
        lhs = f.add_table[c[:, -1], spec.beta]
        rhs = field_reduce_add(f, f.sq_table[c[:, :-1]])
        return lhs == rhs
    if isinstance(spec, Cone):
        # m_n^2 = m_1^2 + ... + m_{n-1}^2
        if spec.n != sp.dim or sp.dim < 2:
            raise DimensionMismatch(f"cone C_{spec.n} in dimension {sp.dim}")
        return f.sq_table[c[:, -1]] == field_reduce_add(f, f.sq_table[c[:, :-1]])
    if isinstance(spec, Hyperplane):
        a = _point_array(sp, spec.a)
        return field_reduce_add(f, f.mul_table[c, a[None, :]]) == spec.c
    if isinstance(spec, AffineSubspace):
        pts = affine_span(sp, spec.basis, spec.offset)
        mask = np.zeros(sp.size, dtype=bool)
        mask[pts] = True
        return mask
    raise InvalidParams(f"not a variety spec: {spec!r}")


def enumerate_variety(sp: Space, spec: VarietySpec) -> PointSet:
    return PointSet(sp, variety_mask(sp, spec))


def variety_sizes(sp: Space) -> dict[int, int]:
    """|S_j| for every j in F_q."""
    counts = np.bincount(sp.norms, minlength=sp.q)
    return {j: int(counts[j]) for j in range(sp.q)}


def sphere_size_window(sp: Space, j: int) -> tuple[float, float]:
    """Empirical window q^{d-1} +- 2 q^{(d-1)/2} for nonzero radius."""
    mid = sp.q ** (sp.dim - 1)
    half = 2 * sp.q ** ((sp.dim - 1) / 2)
    return mid - half, mid + half


# -- linear algebra over F_q ------------------------------------------------

def rank(f: Field, vectors: Sequence[Sequence[int]]) -> int:
    """Rank over F_q by Gaussian elimination."""
    rows = [list(v) for v in vectors]
    if not rows:
        return 0
    n = len(rows[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = f.inv(rows[r][col])
        rows[r] = [f.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                s = rows[i][col]
                rows[i] = [f.sub(x, f.mul(s, y)) for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def span_indices(sp: Space, basis: Sequence[Sequence[int]]) -> np.ndarray:
    """Indices of every point in the linear span of ``basis``."""
    out = np.zeros(1, dtype=np.int64)
    for v in basis:
        vi = sp.index(v)
        multiples = sp.scale(np.arange(sp.q), np.full(sp.q, vi))
        out = np.unique(sp.add(out[:, None], multiples[None, :]).ravel())
    return out


def affine_span(sp: Space, basis: Sequence[Sequence[int]], offset: Sequence[int]) -> np.ndarray:
    lin = span_indices(sp, basis)
    return np.unique(sp.add(lin, np.full_like(lin, sp.index(offset))))


@dataclass(frozen=True)
class SubspaceBasis:
    vectors: tuple[Point, ...]
    ambient_dim: int

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def to_json(self) -> dict[str, Any]:
        return {"vectors": [list(v) for v in self.vectors], "ambient_dim": self.ambient_dim}


def is_totally_isotropic(f: Field, vectors: Sequence[Sequence[int]]) -> bool:
    return all(dot(f, u, v) == 0 for u in vectors for v in vectors)


def _constructive_isotropic(f: Field, n: int, m: int) -> list[Point] | None:
    q = f.q
    i = f.sqrt(f.neg(1))
    vecs: list[Point] = []
    if i is not None:
        # pairs (e_{2k-1} + i e_{2k}) when -1 is a square
        for k in range(n // 2):
            v = [0] * n
            v[2 * k], v[2 * k + 1] = 1, i
            vecs.append(tuple(v))
    else:
        # blocks of four: (a, b, 1, 0), (-b, a, 0, 1) with a^2 + b^2 = -1
        a, b = next(
            (a, b) for a in range(q) for b in range(q)
            if f.add(f.mul(a, a), f.mul(b, b)) == f.neg(1)
        )
        for k in range(n // 4):
            v1, v2 = [0] * n, [0] * n
            v1[4 * k:4 * k + 4] = [a, b, 1, 0]
            v2[4 * k:4 * k + 4] = [f.neg(b), a, 0, 1]
            vecs += [tuple(v1), tuple(v2)]
    return vecs[:m] if len(vecs) >= m else None


def _greedy_isotropic(
    sp: Space,
    candidates: np.ndarray,
    m: int,
    rng: np.random.Generator,
    restarts: int,
    start: Sequence[int] = (),
) -> list[int]:
    """Grow a totally isotropic set from ``candidates`` (isotropic vector indices).

    Every maximal totally isotropic subspace has the same dimension, so a
    greedy pass over an exhaustive candidate list already reaches the
    maximum; restarts only matter when candidates are sampled.
    """
    best: list[int] = list(start)
    for _ in range(max(1, restarts)):
        chosen = list(start)
        pool = rng.permutation(candidates)
        for c in pool:
            if len(chosen) >= m:
                break
            if chosen and np.any(sp.dot(np.array(chosen), np.full(len(chosen), c)) != 0):
                continue
            vecs = [sp.point(int(i)) for i in chosen] + [sp.point(int(c))]
            if rank(sp.field, vecs) == len(vecs):
                chosen.append(int(c))
        if len(chosen) > len(best):
            best = chosen
        if len(best) >= m:
            break
    return best


def isotropic_subspace(
    f: Field, n: int, m: int, seed: int = 0, restarts: int = RESTART_BUDGET
) -> SubspaceBasis | None:
    """Find m independent vectors in F_q^n with v_i . v_j = 0 for all i, j; None if not found."""
    if m > n:
        raise DimensionMismatch(f"cannot fit dimension {m} inside F_q^{n}")
    if m == 0:
        return SubspaceBasis((), n)
    vecs = _constructive_isotropic(f, n, m)
    if vecs is not None:
        return SubspaceBasis(tuple(vecs), n)
    rng = np.random.default_rng(seed)
    if f.q**n <= EXHAUSTIVE_CAP:
        sp = space(f, n)
        cand = np.flatnonzero(sp.norms == 0)
        cand = cand[cand != 0]
        chosen = _greedy_isotropic(sp, cand, m, rng, restarts=1)
    else:
        chosen = _sampled_isotropic(f, n, m, rng, restarts)
        if chosen is None:
            return None
        return SubspaceBasis(tuple(chosen), n)
    if len(chosen) < m:
        return None
    return SubspaceBasis(tuple(sp.point(i) for i in chosen), n)


def _sampled_isotropic(f: Field, n: int, m: int, rng: np.random.Generator, restarts: int) -> list[Point] | None:
    q = f.q
    for _ in range(restarts):
        chosen: list[Point] = []
        for _ in range(64 * m):
            v = tuple(int(x) for x in rng.integers(0, q, size=n))
            if not any(v):
                continue
            trial = chosen + [v]
            if is_totally_isotropic(f, trial) and rank(f, trial) == len(trial):
                chosen = trial
                if len(chosen) == m:
                    return chosen
    return None


@dataclass(frozen=True)
class SphereSubspace:
    """Largest affine subspace found inside S_j."""

    offset: Point | None
    basis: tuple[Point, ...]
    radius_class: str
    claimed_dim: int
    exhaustive: bool

    @property
    def dim(self) -> int:
        return len(self.basis) if self.offset is not None else -1

    @property
    def matches_claim(self) -> bool:
        return self.dim == self.claimed_dim

    def spec(self) -> AffineSubspace:
        if self.offset is None:
            raise InvalidParams("empty sphere has no subspace")
        return AffineSubspace(self.basis, self.offset)


def cited_subspace_dim(d: int) -> int:
    """Dimension of a maximal affine subspace in a sphere as cited: (d-1)/2 odd d, (d-2)/2 even d."""
    return (d - 1) // 2 if d % 2 else (d - 2) // 2


def subspace_in_sphere(sp: Space, j: int, seed: int = 0, max_offsets: int = 16) -> SphereSubspace:
    """Search for the largest affine subspace contained in S_j (centred at the origin).

    x + span(V) lies in S_j iff ||x|| = j, V is totally isotropic and every
    v in V is orthogonal to x; so for each offset x we grow a totally
    isotropic subspace of x^perp.
    """
    f = sp.field
    cls = radius_class(f, j)
    claimed = cited_subspace_dim(sp.dim)
    members = np.flatnonzero(sp.norms == j)
    if members.size == 0:
        return SphereSubspace(None, (), cls, claimed, True)
    exhaustive = sp.size <= EXHAUSTIVE_CAP
    rng = np.random.default_rng(seed)
    iso = np.flatnonzero(sp.norms == 0)
    iso = iso[iso != 0]
    offsets = members if members.size <= max_offsets else rng.choice(members, size=max_offsets, replace=False)
    best_off, best = int(offsets[0]), []
    for x in offsets:
        cand = iso[sp.dot(iso, np.full(iso.size, x)) == 0]
        chosen = _greedy_isotropic(sp, cand, sp.dim, rng, restarts=1)
        if len(chosen) > len(best):
            best_off, best = int(x), chosen
    return SphereSubspace(sp.point(best_off), tuple(sp.point(i) for i in best), cls, claimed, exhaustive)


def all_affine_lines_in(sp: Space, mask: np.ndarray) -> list[tuple[int, int]]:
    """Exhaustive list of (offset, direction) affine lines fully inside ``mask`` (small spaces only)."""
    out = []
    q = sp.q
    members = np.flatnonzero(mask)
    dirs = np.arange(1, sp.size)
    for x in members:
        for v in dirs:
            line = sp.add(np.full(q, x), sp.scale(np.arange(q), np.full(q, v)))
            if mask[line].all():
                out.append((int(x), int(v)))
    return out


def hyperplane_normals(sp: Space) -> list[tuple[Point, int]]:
    """One representative (a, c) per affine hyperplane, first nonzero coordinate of a equal to 1."""
    out = []
    for a in itertools.product(range(sp.q), repeat=sp.dim):
        nz = next((x for x in a if x), None)
        if nz == 1:
            out.extend((a, c) for c in range(sp.q))
    return out


__all__ = [
    "Space", "space", "PointSet", "Point", "Sphere", "ParaboloidTranslate", "Cone",
    "Hyperplane", "AffineSubspace", "VarietySpec", "SubspaceBasis", "SphereSubspace",
    "point_index", "index_point", "quad_norm", "dot", "enumerate_variety", "variety_mask",
    "variety_sizes", "sphere_size_window", "isotropic_subspace", "subspace_in_sphere",
    "rank", "span_indices", "affine_span", "is_totally_isotropic", "spec_to_json",
    "spec_from_json", "cited_subspace_dim", "all_affine_lines_in", "hyperplane_normals",
    "field_reduce_add",
]

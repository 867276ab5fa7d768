"""Point-hyperplane incidences over F_q^d and the cone-lifting machinery.

Hyperplanes are pairs ``(a, c)`` meaning ``a . x = c`` with ``a != 0``.
The universal bound is checked in exact integers as

    (q I - |P||Pi|)^2 <= q^(d+1) |P||Pi|

which is the squared form of |I - |P||Pi|/q| <= q^((d-1)/2) sqrt(|P||Pi|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import (
    DimensionMismatch, HypothesisViolated, InvalidCover, InvalidParams, NotOnSphere,
    Uncoverable, ZeroRadius,
)
from .ffcore import Field
from .fourier import forward_array
from .lattice import (
    Cone, ParaboloidTranslate, PointSet, Space, Sphere, VarietySpec, field_reduce_add,
    isotropic_subspace, space, span_indices, variety_mask,
)

NEW_BOUND_CEILING = 8.0
CONE_RATIO_CEILING = 4.0


class HyperplaneSet:
    """Hyperplanes a.x = c in F_q^d, stored as a normal array and an offset array."""

    def __init__(self, sp: Space, normals, offsets, dedup: bool = True):
        normals = np.asarray(normals, dtype=np.int64).reshape(-1, sp.dim)
        offsets = np.asarray(offsets, dtype=np.int64).reshape(-1)
        if normals.shape[0] != offsets.shape[0]:
            raise DimensionMismatch("one offset per normal expected")
        if normals.size and not normals.any(axis=1).all():
            raise InvalidParams("hyperplane normal must be nonzero")
        if dedup and normals.shape[0]:
            normals, offsets = _projective_unique(sp.field, normals, offsets)
        self.space = sp
        self.normals = normals
        self.offsets = offsets
        self.deduplicated = dedup

    @classmethod
    def from_pairs(cls, sp: Space, pairs: Sequence[tuple[Sequence[int], int]], dedup: bool = True) -> HyperplaneSet:
        if not pairs:
            return cls(sp, np.zeros((0, sp.dim)), np.zeros(0), dedup)
        return cls(sp, [a for a, _ in pairs], [c for _, c in pairs], dedup)

    @classmethod
    def random(cls, sp: Space, n: int, rng: np.random.Generator) -> HyperplaneSet:
        """n distinct random hyperplanes (fewer if the space has fewer)."""
        normals = rng.integers(0, sp.q, size=(4 * n + 8, sp.dim))
        normals = normals[normals.any(axis=1)]
        offsets = rng.integers(0, sp.q, size=normals.shape[0])
        hs = cls(sp, normals, offsets)
        keep = rng.permutation(len(hs))[:n]
        return cls(sp, hs.normals[np.sort(keep)], hs.offsets[np.sort(keep)], dedup=False)

    def __len__(self) -> int:
        return int(self.offsets.shape[0])

    def pairs(self) -> list[tuple[tuple[int, ...], int]]:
        return [(tuple(int(x) for x in a), int(c)) for a, c in zip(self.normals, self.offsets)]

    def translate(self, shift: Sequence[int]) -> HyperplaneSet:
        """Image of every plane under x -> x + shift: a.x = c + a.shift."""
        f = self.space.field
        s = np.asarray(shift, dtype=np.int64)
        a_s = field_reduce_add(f, f.mul_table[self.normals, s[None, :]]) if len(self) else self.offsets
        return HyperplaneSet(self.space, self.normals, f.add_table[self.offsets, a_s], dedup=False)


def _projective_unique(f: Field, normals: np.ndarray, offsets: np.ndarray):
    # scale (a, c) so the first nonzero coordinate of a is 1, then drop repeats
    first = normals[np.arange(normals.shape[0]), (normals != 0).argmax(axis=1)]
    s = f.inv_table[first]
    a = f.mul_table[s[:, None], normals]
    c = f.mul_table[s, offsets]
    rows = np.concatenate([a, c[:, None]], axis=1)
    _, keep = np.unique(rows, axis=0, return_index=True)
    keep = np.sort(keep)
    return a[keep], c[keep]


def incidence_matrix(P: PointSet | np.ndarray, planes: HyperplaneSet, chunk: int = 1 << 22) -> np.ndarray:
    """Boolean (|P|, |Pi|) matrix of p . a == c."""
    sp = planes.space
    f = sp.field
    idx = P.indices if isinstance(P, PointSet) else np.asarray(P)
    out = np.zeros((idx.size, len(planes)), dtype=bool)
    if idx.size == 0 or len(planes) == 0:
        return out
    pc = sp.coords[idx]
    step = max(1, chunk // max(1, len(planes) * sp.dim))
    for s in range(0, idx.size, step):
        dots = field_reduce_add(f, f.mul_table[pc[s:s + step, None, :], planes.normals[None, :, :]])
        out[s:s + step] = dots == planes.offsets[None, :]
    return out


@dataclass
class IncidenceReport:
    q: int
    p: int
    k: int
    d: int
    n_points: int
    n_planes: int
    incidences: int
    t: int | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def main_term(self) -> Fraction:
        return Fraction(self.n_points * self.n_planes, self.q)

    @property
    def gap(self) -> Fraction:
        return abs(self.incidences - self.main_term)

    @property
    def universal_bound(self) -> float:
        return self.q ** ((self.d - 1) / 2) * math.sqrt(self.n_points * self.n_planes)

    @property
    def universal_ok(self) -> bool:
        lhs = (self.q * self.incidences - self.n_points * self.n_planes) ** 2
        return lhs <= self.q ** (self.d + 1) * self.n_points * self.n_planes

    @property
    def universal_ratio(self) -> float:
        b = self.universal_bound
        return float(self.gap) / b if b else 0.0

    @property
    def new_bound_terms(self) -> tuple[float, float, float] | None:
        if self.t is None:
            return None
        t, q, d = self.t, self.q, self.d
        P, Pi = self.n_points, self.n_planes
        return (
            float(t),
            math.sqrt(t) * q ** ((d - 2) / 2) * math.sqrt(P * Pi),
            math.sqrt(t) * q ** ((d - 3) / 4) * math.sqrt(P) * Pi,
        )

    @property
    def new_bound(self) -> float | None:
        terms = self.new_bound_terms
        return None if terms is None else terms[1] + terms[2]

    @property
    def new_ratio(self) -> float | None:
        b = self.new_bound
        if b is None:
            return None
        return float(self.gap) / b if b else 0.0

    def to_row(self) -> dict[str, Any]:
        nb = self.new_bound
        nr = self.new_ratio
        return {
            "q": self.q, "p": self.p, "k": self.k, "d": self.d,
            "n_points": self.n_points, "n_planes": self.n_planes, "incidences": self.incidences,
            "gap": f"{float(self.gap):.6f}", "universal_bound": f"{self.universal_bound:.6f}",
            "universal_ok": self.universal_ok, "universal_ratio": f"{self.universal_ratio:.6f}",
            "t": "" if self.t is None else self.t,
            "new_bound": "" if nb is None else f"{nb:.6f}",
            "new_ratio": "" if nr is None else f"{nr:.6f}",
            "flags": ";".join(self.flags),
        }


def count_incidences(P: PointSet, planes: HyperplaneSet, t: int | None = None) -> IncidenceReport:
    if P.space is not planes.space:
        if P.dim != planes.space.dim or P.field is not planes.space.field:
            raise DimensionMismatch("points and hyperplanes live in different spaces")
    f = P.field
    I = int(incidence_matrix(P, planes).sum())
    return IncidenceReport(f.q, f.p, f.k, P.dim, len(P), len(planes), I, t)


# -- extremal configurations --------------------------------------------------

def extremal_hypothesis(q: int, d: int) -> str | None:
    """None when a totally isotropic (d-1)/2-space of F_q^{d-1} is guaranteed, else the failed condition."""
    if d < 3 or d % 2 == 0:
        return f"d = {d} must be odd and >= 3"
    if q % 4 == 1 or d % 4 == 1:
        return None
    return f"q = {q} is 3 mod 4 and d - 1 = {d - 1} is not divisible by 4"


def extremal_instance(f: Field, d: int, lam: int = 1, seed: int = 0) -> tuple[PointSet, HyperplaneSet]:
    """P = A x {lam}, Pi = {a.x' + lam x_d = lam^2 : a in A} for a totally isotropic A."""
    if lam == 0:
        raise InvalidParams("lambda must be nonzero")
    why = extremal_hypothesis(f.q, d)
    if why is not None:
        raise HypothesisViolated(why)
    m = (d - 1) // 2
    basis = isotropic_subspace(f, d - 1, m, seed=seed)
    if basis is None:
        raise HypothesisViolated(f"no {m}-dim totally isotropic subspace found in F_{f.q}^{d - 1}")
    sub = space(f, d - 1)
    A = sub.coords[span_indices(sub, basis.vectors)]
    sp = space(f, d)
    pts = np.concatenate([A, np.full((A.shape[0], 1), lam)], axis=1)
    P = PointSet.from_indices(sp, sp.index_array(pts))
    normals = np.concatenate([A, np.full((A.shape[0], 1), lam)], axis=1)
    planes = HyperplaneSet(sp, normals, np.full(A.shape[0], f.mul(lam, lam)))
    return P, planes


# -- lifting to the cone ------------------------------------------------------

@dataclass
class LiftResult:
    """Lifted configuration in F_q^{d+1}, expressed in coordinates where the target is C_{d+1}."""

    kind: str
    q: int
    points: np.ndarray        # (|P'|, d+1) distinct lifted points, lambda in F_q
    duals: np.ndarray         # (|Pi'|, d+1) multiset s * w for s != 0
    base_points: np.ndarray   # (|P|, d+1) lift with lambda = 1
    base_duals: np.ndarray    # (|Pi|, d+1) w for s = 1
    n_points: int
    n_planes: int
    incidences: int
    cone_fraction: float
    equivalence_ok: bool
    lifted_count: int         # #{(x in P' as a set, w) : x.w = 0}

    @property
    def claimed_sizes(self) -> tuple[int, int]:
        """Sizes as stated in the construction: q|P| and q|Pi|."""
        return self.q * self.n_points, self.q * self.n_planes

    @property
    def actual_sizes(self) -> tuple[int, int]:
        return int(self.points.shape[0]), int(self.duals.shape[0])

    @property
    def lifted_identity_ok(self) -> bool:
        # origin meets every plane once; each lambda != 0 reproduces I
        return self.lifted_count == self.n_planes * (self.n_points > 0) + (self.q - 1) * self.incidences


def _dot_rows(f: Field, X: np.ndarray, W: np.ndarray) -> np.ndarray:
    return field_reduce_add(f, f.mul_table[X[:, None, :], W[None, :, :]])


def lift_to_cone(
    P: PointSet,
    planes: HyperplaneSet,
    u: int | None = None,
    kind: str = "sphere",
    beta: int = 0,
) -> LiftResult:
    """Lift points on S_{u^2} (or on P_beta) and hyperplanes to F_q^{d+1}.

    Sphere: p -> (lam p, lam u), (a, c) -> s (a, -c/u); the lifted points lie on
    C_{d+1}.  Paraboloid: after moving P_beta onto P_0, p -> (lam p, lam) lies
    on x_{d+1} x_d = x_1^2 + ... + x_{d-1}^2, which becomes C_{d+1} under
    y_d = (x_{d+1} - x_d)/2, y_{d+1} = (x_{d+1} + x_d)/2; the duals get the
    inverse-transpose map so dot products are unchanged.
    """
    sp = P.space
    f = sp.field
    d = sp.dim
    q = f.q
    X = sp.coords[P.indices]
    A, C = planes.normals, planes.offsets
    incidences = int(incidence_matrix(P, planes).sum())

    if kind == "sphere":
        if u is None or u == 0:
            raise ZeroRadius("sphere lift needs u != 0")
        r = f.mul(u, u)
        if np.any(sp.norms[P.indices] != r):
            raise NotOnSphere(f"some points are not on the sphere of radius {r}")
        base = np.concatenate([X, np.full((X.shape[0], 1), u)], axis=1)
        last = f.neg_table[f.mul_table[f.inv(u), C]]
        w = np.concatenate([A, last[:, None]], axis=1)
    elif kind == "paraboloid":
        on = variety_mask(sp, ParaboloidTranslate(beta))[P.indices]
        if not on.all():
            raise NotOnSphere(f"some points are not on the paraboloid translate beta={beta}")
        shift = np.zeros(d, dtype=np.int64)
        shift[-1] = beta
        X = f.add_table[X, shift[None, :]]
        C = planes.translate(shift).offsets
        x = np.concatenate([X, np.ones((X.shape[0], 1), dtype=np.int64)], axis=1)
        wx = np.concatenate([A, f.neg_table[C][:, None]], axis=1)
        half = f.inv(2)
        base = x.copy()
        base[:, d - 1] = f.mul_table[half, f.add_table[x[:, d], f.neg_table[x[:, d - 1]]]]
        base[:, d] = f.mul_table[half, f.add_table[x[:, d], x[:, d - 1]]]
        w = wx.copy()
        w[:, d - 1] = f.add_table[wx[:, d], f.neg_table[wx[:, d - 1]]]
        w[:, d] = f.add_table[wx[:, d - 1], wx[:, d]]
    else:
        raise InvalidParams(f"unknown lift kind {kind!r}")

    lam = np.arange(q)
    lifted = f.mul_table[lam[:, None, None], base[None, :, :]].reshape(-1, d + 1)
    lifted = np.unique(lifted, axis=0)
    s = np.arange(1, q)
    duals = f.mul_table[s[:, None, None], w[None, :, :]].reshape(-1, d + 1)

    up = space(f, d + 1)
    cone = variety_mask(up, Cone(d + 1))
    cone_fraction = float(cone[up.index_array(lifted)].mean()) if lifted.size else 1.0

    incident = incidence_matrix(P, planes)
    lifted_zero = _dot_rows(f, base, w) == 0
    equivalence_ok = bool(np.array_equal(incident, lifted_zero))
    lifted_count = int((_dot_rows(f, lifted, w) == 0).sum()) if lifted.size and w.size else 0

    return LiftResult(
        kind, q, lifted, duals, base, w, len(P), len(planes), incidences,
        cone_fraction, equivalence_ok, lifted_count,
    )


# -- cone restriction ---------------------------------------------------------

def cone_hypothesis(q: int, n: int) -> str | None:
    problems = []
    if n % 4:
        problems.append(f"n = {n} is not 0 mod 4")
    if q % 4 != 3:
        problems.append(f"q = {q} is not 3 mod 4")
    return "; ".join(problems) or None


@dataclass
class ConeRatio:
    n_points: int
    numerator: float
    denominator: float
    flags: list[str]

    @property
    def ratio(self) -> float:
        return self.numerator / self.denominator


def cone_l2_ratio(G: PointSet, exploratory: bool = False, cone_mask: np.ndarray | None = None) -> ConeRatio:
    """||G^||_{L^2(C_n, dsigma)} / (|G|^{1/2} + |G| / q^{n/4})."""
    sp = G.space
    n, q = sp.dim, sp.q
    why = cone_hypothesis(q, n)
    if why and not exploratory:
        raise HypothesisViolated(why)
    if len(G) == 0:
        raise InvalidParams("G must be nonempty")
    cone = variety_mask(sp, Cone(n)) if cone_mask is None else cone_mask
    Ghat = forward_array(sp, G.mask.astype(float))
    num = math.sqrt(float(np.mean(np.abs(Ghat[cone]) ** 2)))
    den = math.sqrt(len(G)) + len(G) / q ** (n / 4)
    return ConeRatio(len(G), num, den, [why] if why else [])


# -- covers and the new incidence bound ----------------------------------------

@dataclass
class SquareRadiusCover:
    """Partition of a point set into pieces on square-radius spheres or paraboloid translates."""

    space: Space
    pieces: list[tuple[VarietySpec, PointSet]]
    heuristic: bool = False

    @property
    def t(self) -> int:
        return len(self.pieces)

    def union(self) -> PointSet:
        mask = np.zeros(self.space.size, dtype=bool)
        for _, piece in self.pieces:
            mask |= piece.mask
        return PointSet(self.space, mask)

    def validate(self) -> None:
        f = self.space.field
        seen = np.zeros(self.space.size, dtype=bool)
        for spec, piece in self.pieces:
            if isinstance(spec, Sphere):
                if spec.j == 0 or f.eta_table[spec.j] != 1:
                    raise InvalidCover(f"sphere radius {spec.j} is not a nonzero square")
            elif not isinstance(spec, ParaboloidTranslate):
                raise InvalidCover(f"cover pieces must be spheres or paraboloid translates, got {spec!r}")
            if not variety_mask(self.space, spec)[piece.indices].all():
                raise InvalidCover(f"piece is not contained in {spec!r}")
            if (seen & piece.mask).any():
                raise InvalidCover("cover pieces overlap")
            seen |= piece.mask


def theorem_hypothesis(q: int, d: int) -> str | None:
    problems = []
    if d % 4 != 3:
        problems.append(f"d = {d} is not 3 mod 4")
    if q % 4 != 3:
        problems.append(f"q = {q} is not 3 mod 4")
    return "; ".join(problems) or None


def new_incidence_check(cover: SquareRadiusCover, planes: HyperplaneSet, exploratory: bool = False) -> IncidenceReport:
    sp = cover.space
    why = theorem_hypothesis(sp.q, sp.dim)
    if why and not exploratory:
        raise HypothesisViolated(why)
    cover.validate()
    rep = count_incidences(cover.union(), planes, t=cover.t)
    if why:
        rep.flags.append("exploratory:" + why)
    if cover.heuristic:
        rep.flags.append("t_upper_bound")
    return rep


def greedy_square_cover(
    P: PointSet, centers: Sequence[Sequence[int]] | None = None, allow_paraboloid: bool = True
) -> SquareRadiusCover:
    """Greedy cover by square-radius spheres around candidate centers (and paraboloid translates).

    t is an upper bound on the minimum; candidates default to the points of P plus the origin.
    """
    sp = P.space
    f = sp.field
    if centers is None:
        cidx = np.unique(np.concatenate([[0], P.indices]))
    else:
        if not len(centers):
            raise InvalidParams("candidate center list is empty")
        cidx = np.array([sp.index(c) for c in centers])
    good = (f.eta_table == 1)
    uncovered = P.mask.copy()
    pieces: list[tuple[VarietySpec, PointSet]] = []
    beta_all = None
    if allow_paraboloid and sp.dim >= 2:
        c = sp.coords
        beta_all = f.add_table[field_reduce_add(f, f.sq_table[c[:, :-1]]), f.neg_table[c[:, -1]]]
    while uncovered.any():
        live = np.flatnonzero(uncovered)
        best = (0, None, None)
        for ci in cidx:
            r = sp.norms[sp.sub(live, np.full(live.size, ci))]
            counts = np.bincount(r, minlength=sp.q) * good
            j = int(counts.argmax())
            if counts[j] > best[0]:
                best = (int(counts[j]), Sphere(j, sp.point(int(ci))), r == j)
        if beta_all is not None:
            counts = np.bincount(beta_all[live], minlength=sp.q)
            b = int(counts.argmax())
            if counts[b] > best[0]:
                best = (int(counts[b]), ParaboloidTranslate(b), beta_all[live] == b)
        if best[1] is None:
            raise Uncoverable(f"point {sp.point(int(live[0]))} has no square-radius sphere among the candidates")
        mask = np.zeros(sp.size, dtype=bool)
        mask[live[best[2]]] = True
        spec = best[1]
        if isinstance(spec, Sphere) and not any(spec.center):
            spec = Sphere(spec.j)
        pieces.append((spec, PointSet(sp, mask)))
        uncovered &= ~mask
    return SquareRadiusCover(sp, pieces, heuristic=True)


__all__ = [
    "HyperplaneSet", "IncidenceReport", "LiftResult", "ConeRatio", "SquareRadiusCover",
    "count_incidences", "incidence_matrix", "extremal_instance", "extremal_hypothesis",
    "lift_to_cone", "cone_l2_ratio", "cone_hypothesis", "new_incidence_check",
    "theorem_hypothesis", "greedy_square_cover", "NEW_BOUND_CEILING", "CONE_RATIO_CEILING",
]

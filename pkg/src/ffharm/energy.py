"""Additive energy, right-angle triples, the L^4 / energy identity and extension ratios."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import EmptySet, HypothesisViolated, InvalidParams, NegativeValue, NotOnSphere, ZeroFunction
from .fourier import FunctionTable, SURFACE, extension_inverse, indicator_transform, inverse_array, lp_norm, weighted_lp
from .lattice import PointSet, Space, Sphere, affine_span, subspace_in_sphere, variety_mask

ENERGY_RATIO_CEILING = 8.0
EXTENSION_RATIO_CEILING = 16.0
DEFAULT_CUTOFF_CONSTANT = 8


def _require_nonempty(A: PointSet) -> None:
    if len(A) == 0:
        raise EmptySet("additive energy of the empty set")


def energy_naive(A: PointSet) -> int:
    """O(|A|^3): for every (a, b, c) test whether a + b - c lies in A."""
    sp = A.space
    idx = A.indices
    ab = sp.add(idx[:, None], idx[None, :]).ravel()
    total = 0
    for c in idx:
        total += int(A.mask[sp.sub(ab, np.full(ab.size, c))].sum())
    return total


def energy_pairsums(A: PointSet) -> int:
    sp = A.space
    idx = A.indices
    sums = sp.add(idx[:, None], idx[None, :]).ravel()
    counts = np.bincount(sums, minlength=sp.size).astype(object)
    return int(sum(int(c) * int(c) for c in counts[counts != 0]))


def round_to_int(x: float, what: str, tol: float = 0.1) -> int:
    n = int(round(x))
    if abs(x - n) > tol:
        raise ArithmeticError(f"{what} = {x!r} is not within {tol} of an integer")
    return n


def energy_fourier(A: PointSet) -> int:
    Ahat = indicator_transform(A)
    return round_to_int(float(np.sum(np.abs(Ahat) ** 4)) / A.space.size, "q^-d sum |A^|^4")


_ENERGY = {"naive": energy_naive, "pairsums": energy_pairsums, "fourier": energy_fourier}


def right_angle_triples(A: PointSet) -> int:
    """#{(a, b, d) in A^3 : (b - d).(a - d) = 0}."""
    sp = A.space
    idx = A.indices
    total = 0
    for d in idx:
        diff = sp.sub(idx, np.full(idx.size, d))
        total += int((sp.dot(diff[:, None], diff[None, :]) == 0).sum())
    return total


def energy_bound_terms(q: int, d: int, n: int) -> tuple[float, float, float]:
    return (n**3 / q, q ** ((d - 2) / 2) * n**2, q ** ((d - 3) / 4) * n**2.5)


def square_radius_hypothesis(q: int, d: int, j: int, eta_j: int) -> str | None:
    problems = []
    if d % 4 != 3:
        problems.append(f"d = {d} is not 3 mod 4")
    if q % 4 != 3:
        problems.append(f"q = {q} is not 3 mod 4")
    if j == 0 or eta_j != 1:
        problems.append(f"radius {j} is not a nonzero square")
    return "; ".join(problems) or None


@dataclass
class EnergyReport:
    q: int
    d: int
    n: int
    energy: int
    methods: dict[str, int] = field(default_factory=dict)
    rat_triples: int | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def methods_agree(self) -> bool:
        return len(set(self.methods.values())) <= 1

    @property
    def bound_terms(self) -> tuple[float, float, float]:
        return energy_bound_terms(self.q, self.d, self.n)

    @property
    def ratio(self) -> float:
        return self.energy / sum(self.bound_terms)

    @property
    def trivial_bounds_ok(self) -> bool:
        return self.n**2 <= self.energy <= self.n**3

    def to_row(self) -> dict[str, Any]:
        return {
            "q": self.q, "d": self.d, "n": self.n, "energy": self.energy,
            "methods_agree": self.methods_agree,
            "rat_triples": "" if self.rat_triples is None else self.rat_triples,
            "ratio": f"{self.ratio:.6f}", "flags": ";".join(self.flags),
        }


def additive_energy(A: PointSet, method: str | Sequence[str] = "pairsums") -> EnergyReport:
    """E(A) = #{(a, b, c, d) in A^4 : a + b = c + d} by one or more methods."""
    _require_nonempty(A)
    methods = [method] if isinstance(method, str) else list(method)
    vals = {}
    for m in methods:
        if m not in _ENERGY:
            raise InvalidParams(f"unknown energy method {m!r}")
        vals[m] = _ENERGY[m](A)
    return EnergyReport(A.space.q, A.dim, len(A), vals[methods[0]], vals)


def energy_bound_ratio(A: PointSet, j: int, exploratory: bool = False, with_triples: bool = True) -> EnergyReport:
    """E(A) over |A|^3/q + q^{(d-2)/2}|A|^2 + q^{(d-3)/4}|A|^{5/2} for A on S_j."""
    _require_nonempty(A)
    sp = A.space
    f = sp.field
    if np.any(sp.norms[A.indices] != j):
        raise NotOnSphere(f"A is not contained in S_{j}")
    why = square_radius_hypothesis(sp.q, sp.dim, j, int(f.eta_table[j]))
    if why and not exploratory:
        raise HypothesisViolated(why)
    rep = additive_energy(A, "pairsums")
    if with_triples:
        rep.rat_triples = right_angle_triples(A)
    if why:
        rep.flags.append("exploratory:" + why)
    return rep


# -- L^4 norm of (A dsigma)^v ---------------------------------------------------

@dataclass
class L4Identity:
    lhs: float
    rhs: float

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.rhs), 1e-300)


def l4_energy_identity(A: PointSet, j: int, center: Sequence[int] | None = None) -> L4Identity:
    """||(A dsigma)^v||_{L^4(dc)} against q^{d/4} E(A)^{1/4} / |S_j|."""
    _require_nonempty(A)
    sp = A.space
    spec = Sphere(j, tuple(center) if center is not None else None)
    V = variety_mask(sp, spec)
    if not V[A.indices].all():
        raise NotOnSphere(f"A is not contained in {spec}")
    nV = int(V.sum())
    ext = inverse_array(sp, A.mask.astype(float)) * (sp.size / nV)
    lhs = float(np.sum(np.abs(ext) ** 4)) ** 0.25
    rhs = sp.size**0.25 / nV * energy_pairsums(A) ** 0.25
    return L4Identity(lhs, rhs)


def l4_regime_bound(n: int, q: int, d: int) -> tuple[int, float]:
    """Regime index (1 = smallest sets) and the piecewise L^4 bound for |A| = n on a sphere."""
    if n <= q ** ((d - 2) / 2):
        return 1, n**0.75 * q ** ((-3 * d + 4) / 4)
    if n <= q ** ((d - 1) / 2):
        return 2, n**0.5 * q ** ((-5 * d + 6) / 8)
    if n <= q ** ((d + 1) / 2):
        return 3, n**0.625 * q ** ((-11 * d + 13) / 16)
    return 4, n**0.75 * q ** ((-3 * d + 3) / 4)


# -- dyadic decomposition -------------------------------------------------------

def l4_exponent(d: int) -> Fraction:
    """4d / (3d - 2)."""
    return Fraction(4 * d, 3 * d - 2)


@dataclass
class DyadicDecomposition:
    """f / scale = sum_i 2^-i 1_{A_i} up to a factor < 2 pointwise."""

    indices: np.ndarray          # sphere point indices carrying f
    values: np.ndarray           # normalised f on those points
    levels: dict[int, np.ndarray]
    scale: float
    exponent: Fraction
    cutoff: int

    def reconstruction(self) -> np.ndarray:
        g = np.zeros_like(self.values)
        pos = {int(i): k for k, i in enumerate(self.indices)}
        for i, pts in self.levels.items():
            for x in pts:
                g[pos[int(x)]] = 2.0**-i
        return g

    @property
    def mass(self) -> float:
        p = float(self.exponent)
        return sum(2.0 ** (-p * i) * len(pts) for i, pts in self.levels.items())

    def sizes_ok(self) -> bool:
        p = float(self.exponent)
        return all(len(pts) <= 2.0 ** (p * i) * (1 + 1e-12) for i, pts in self.levels.items())

    def disjoint(self) -> bool:
        allpts = np.concatenate(list(self.levels.values())) if self.levels else np.zeros(0)
        return allpts.size == np.unique(allpts).size


def normalize_and_decompose(
    sp: Space, j: int, values: np.ndarray, cutoff_constant: float = DEFAULT_CUTOFF_CONSTANT
) -> DyadicDecomposition:
    """Scale f >= 0 on S_j so sum |f|^{4d/(3d-2)} = 1 and split it into dyadic level sets.

    ``values`` is indexed like the sorted point indices of S_j.
    """
    idx = np.flatnonzero(sp.norms == j)
    vals = np.asarray(values)
    if vals.shape != idx.shape:
        raise InvalidParams(f"expected {idx.size} values on S_{j}, got {vals.shape}")
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise InvalidParams("f must be real")
        vals = vals.real
    vals = vals.astype(float)
    if np.any(vals < 0):
        raise NegativeValue("f must be nonnegative")
    if not np.any(vals > 0):
        raise ZeroFunction("f vanishes identically")
    p = l4_exponent(sp.dim)
    scale = float(np.sum(vals ** float(p))) ** (-1 / float(p))
    fn = vals * scale
    support = fn > 0
    lev = np.floor(-np.log2(fn[support])).astype(int)
    # repair float edges so that 2^-i <= f < 2^{1-i}
    lev = np.where(2.0**-lev > fn[support], lev + 1, lev)
    lev = np.where(fn[support] >= 2.0 ** (1 - lev), lev - 1, lev)
    levels: dict[int, np.ndarray] = {}
    for i in np.unique(lev):
        levels[int(i)] = idx[support][lev == i]
    cutoff = math.ceil(cutoff_constant * math.log(sp.q))
    return DyadicDecomposition(idx, fn, levels, scale, p, cutoff)


@dataclass
class DyadicTerms:
    """Contributions q^{(3d^2-5d+2)/(4d)} 2^-i ||(A_i dsigma)^v||_4 split at the cutoff."""

    total: float          # T for the normalised f
    head: float           # M: levels i <= N
    tail: float           # R: levels i > N
    per_regime: dict[int, float]


def dyadic_terms(sp: Space, j: int, dec: DyadicDecomposition) -> DyadicTerms:
    d, q = sp.dim, sp.q
    weight = q ** ((3 * d * d - 5 * d + 2) / (4 * d))
    nV = dec.indices.size
    dense = np.zeros(sp.size)
    dense[dec.indices] = dec.values
    ext = inverse_array(sp, dense) * (sp.size / nV)
    total = weight * float(np.sum(np.abs(ext) ** 4)) ** 0.25
    head = tail = 0.0
    per_regime: dict[int, float] = {}
    for i, pts in dec.levels.items():
        ind = np.zeros(sp.size)
        ind[pts] = 1.0
        ext_i = inverse_array(sp, ind) * (sp.size / nV)
        term = weight * 2.0**-i * float(np.sum(np.abs(ext_i) ** 4)) ** 0.25
        if i <= dec.cutoff:
            head += term
            regime, _ = l4_regime_bound(int(round(2.0 ** (float(dec.exponent) * i))), q, d)
            per_regime[regime] = per_regime.get(regime, 0.0) + term
        else:
            tail += term
    return DyadicTerms(total, head, tail, per_regime)


# -- extension ratios -----------------------------------------------------------

@dataclass
class ExtensionRatioRecord:
    descriptor: str
    p: Fraction | float
    r: Fraction | float
    numerator: float
    denominator: float
    seed: int | None = None

    @property
    def ratio(self) -> float:
        return self.numerator / self.denominator if self.denominator else 0.0

    @property
    def descriptor_hash(self) -> str:
        return hashlib.sha1(self.descriptor.encode()).hexdigest()[:12]

    def to_row(self) -> dict[str, Any]:
        return {
            "descriptor": self.descriptor, "descriptor_hash": self.descriptor_hash,
            "p": str(self.p), "r": str(self.r), "seed": "" if self.seed is None else self.seed,
            "numerator": f"{self.numerator:.9g}", "denominator": f"{self.denominator:.9g}",
            "ratio": f"{self.ratio:.9g}",
        }


def _as_exponent(x):
    if x == math.inf or x == np.inf:
        return np.inf
    return Fraction(x)


def extension_ratio(f: FunctionTable, p, r, descriptor: str = "f", seed: int | None = None) -> ExtensionRatioRecord:
    """||(f dsigma)^v||_{L^r(dc)} / ||f||_{L^p(V, dsigma)}."""
    if f.full_space:
        raise InvalidParams("f must be supported on a variety")
    p, r = _as_exponent(p), _as_exponent(r)
    num = lp_norm(extension_inverse(f), r)
    den = lp_norm(f, p)
    return ExtensionRatioRecord(descriptor, p, r, num, den, seed)


def _fast_ratio(sp: Space, idx: np.ndarray, vals: np.ndarray, p, r) -> tuple[float, float]:
    dense = np.zeros(sp.size, dtype=complex)
    dense[idx] = vals
    ext = inverse_array(sp, dense) * (sp.size / idx.size)
    return weighted_lp(ext, 1.0, r), weighted_lp(vals, 1.0 / idx.size, p)


SWEEP_STRATEGIES = ("full", "point", "subspace", "dyadic", "random_complex")


def extension_sweep(
    sp: Space,
    j: int,
    p,
    r,
    strategies: Iterable[str] = SWEEP_STRATEGIES,
    trials: int = 20,
    seed: int = 0,
    exploratory: bool = True,
    gate: str | None = None,
) -> list[ExtensionRatioRecord]:
    """Extension ratios on S_j over structured and random test functions.

    ``gate="square_radius"`` refuses (unless exploratory) inputs outside
    d = 3 mod 4, q = 3 mod 4, j a nonzero square.
    """
    f = sp.field
    if gate == "square_radius":
        why = square_radius_hypothesis(sp.q, sp.dim, j, int(f.eta_table[j]))
        if why and not exploratory:
            raise HypothesisViolated(why)
    elif gate is not None:
        raise InvalidParams(f"unknown gate {gate!r}")
    p, r = _as_exponent(p), _as_exponent(r)
    idx = np.flatnonzero(sp.norms == j)
    if idx.size == 0:
        raise NotOnSphere(f"S_{j} is empty")
    rng = np.random.default_rng(seed)
    n = idx.size
    out: list[ExtensionRatioRecord] = []

    def add(desc: str, vals: np.ndarray, s: int | None = None) -> None:
        num, den = _fast_ratio(sp, idx, vals, p, r)
        out.append(ExtensionRatioRecord(desc, p, r, num, den, s))

    for strat in strategies:
        if strat == "full":
            add("full", np.ones(n))
        elif strat == "point":
            add("point", np.eye(1, n, 0).ravel())
        elif strat == "subspace":
            sub = subspace_in_sphere(sp, j, seed=seed)
            if sub.offset is not None and sub.dim > 0:
                H = affine_span(sp, sub.basis, sub.offset)
                add(f"subspace_dim{sub.dim}", np.isin(idx, H).astype(float))
        elif strat == "dyadic":
            levels = max(1, int(math.log2(n)))
            for t in range(trials):
                s = int(rng.integers(2**31))
                k = t % (levels + 1)
                size = max(1, n >> k)
                pick = np.random.default_rng(s).choice(n, size=size, replace=False)
                vals = np.zeros(n)
                vals[pick] = 1.0
                add(f"dyadic_density_2^-{k}", vals, s)
        elif strat == "random_complex":
            for _ in range(trials):
                s = int(rng.integers(2**31))
                g = np.random.default_rng(s)
                add("random_complex", g.normal(size=n) + 1j * g.normal(size=n), s)
        else:
            raise InvalidParams(f"unknown sweep strategy {strat!r}")
    return out


def subspace_witness_ratio(sp: Space, j: int, p, r, seed: int = 0) -> ExtensionRatioRecord | None:
    """Extension ratio of the indicator of the largest affine subspace found in S_j."""
    sub = subspace_in_sphere(sp, j, seed=seed)
    if sub.offset is None or sub.dim <= 0:
        return None
    H = PointSet.from_indices(sp, affine_span(sp, sub.basis, sub.offset))
    V = PointSet(sp, sp.norms == j)
    tab = FunctionTable(sp, H.mask[V.indices].astype(complex), SURFACE, Sphere(j), V.indices)
    return extension_ratio(tab, p, r, descriptor=f"subspace_dim{sub.dim}")


def best(records: Sequence[ExtensionRatioRecord]) -> ExtensionRatioRecord:
    return max(records, key=lambda rec: rec.ratio)


__all__ = [
    "EnergyReport", "L4Identity", "DyadicDecomposition", "DyadicTerms", "ExtensionRatioRecord",
    "additive_energy", "energy_naive", "energy_pairsums", "energy_fourier", "right_angle_triples",
    "energy_bound_ratio", "energy_bound_terms", "l4_energy_identity", "l4_regime_bound",
    "l4_exponent", "normalize_and_decompose", "dyadic_terms", "extension_ratio", "extension_sweep",
    "subspace_witness_ratio", "best", "square_radius_hypothesis", "round_to_int",
    "ENERGY_RATIO_CEILING", "EXTENSION_RATIO_CEILING", "SWEEP_STRATEGIES",
]

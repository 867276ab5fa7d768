"""Three-point distance counts mu_3, distance sets, and the sphere-transform identities.

mu_3(t) counts triples (x, y, z) in A^3 with ||x + y + z|| = t; Delta_3(A)
is its support.  Three independent routes are provided: direct triple
enumeration, a convolution through the Fourier transform, and the identity

    mu_3(t) = q^-d sum_m S_t^(m) conj(A^(m))^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .energy import round_to_int
from .errors import EmptySet, HypothesisViolated, InvalidParams, ZeroRadius
from .ffcore import Field
from .fourier import indicator_transform, inverse_array, sphere_transforms
from .lattice import PointSet, Space, space
from .seeding import trial_seed

DECAY_CEILING = 3.0


def _require_nonempty(A: PointSet) -> None:
    if len(A) == 0:
        raise EmptySet("empty point set")


@dataclass
class Mu3Table:
    q: int
    counts: np.ndarray       # object array of Python ints, length q
    total: int
    method: str

    @property
    def mass_ok(self) -> bool:
        return int(sum(int(c) for c in self.counts)) == self.total

    def support(self) -> set[int]:
        return {t for t, c in enumerate(self.counts) if c > 0}

    def __getitem__(self, t: int) -> int:
        return int(self.counts[t])


def mu3_naive(A: PointSet, chunk: int = 1 << 20) -> np.ndarray:
    sp = A.space
    idx = A.indices
    pairs = sp.add(idx[:, None], idx[None, :]).ravel()
    out = np.zeros(sp.q, dtype=np.int64)
    step = max(1, chunk // max(1, pairs.size))
    for s in range(0, idx.size, step):
        z = idx[s:s + step]
        w = sp.add(pairs[None, :], z[:, None])
        out += np.bincount(sp.norms[w].ravel(), minlength=sp.q)
    return out


def triple_sum_counts(A: PointSet) -> np.ndarray:
    """(1_A * 1_A * 1_A)(w) for every w, through the Fourier transform."""
    sp = A.space
    Ahat = indicator_transform(A)
    conv = inverse_array(sp, Ahat**3).real
    rounded = np.rint(conv)
    if np.max(np.abs(conv - rounded)) > 0.1:
        raise ArithmeticError("triple convolution is not integral to within 0.1")
    return rounded.astype(np.int64)


def mu3_convolution(A: PointSet) -> np.ndarray:
    sp = A.space
    return np.bincount(sp.norms, weights=triple_sum_counts(A), minlength=sp.q).round().astype(np.int64)


def mu3_identity(A: PointSet, S_hat: np.ndarray | None = None) -> np.ndarray:
    sp = A.space
    S_hat = sphere_transforms(sp) if S_hat is None else S_hat
    Ahat = indicator_transform(A)
    vals = S_hat @ np.conj(Ahat) ** 3 / sp.size
    return np.array([round_to_int(v.real, f"mu_3({t})") for t, v in enumerate(vals)], dtype=np.int64)


def mu3(A: PointSet, method: str = "auto", S_hat: np.ndarray | None = None) -> Mu3Table:
    _require_nonempty(A)
    sp = A.space
    if method == "auto":
        method = "convolution" if sp.size <= 2**18 else "naive"
    if method == "naive":
        counts = mu3_naive(A)
    elif method == "convolution":
        counts = mu3_convolution(A)
    elif method == "fourier_identity":
        counts = mu3_identity(A, S_hat)
    else:
        raise InvalidParams(f"unknown mu_3 method {method!r}")
    n = len(A)
    return Mu3Table(sp.q, np.array([int(c) for c in counts], dtype=object), n**3, method)


def distance_sets(A: PointSet) -> tuple[set[int], set[int]]:
    """(Delta_2(A), Delta_3(A))."""
    _require_nonempty(A)
    sp = A.space
    Ahat = indicator_transform(A)
    diffs = np.rint(inverse_array(sp, np.abs(Ahat) ** 2).real)  # #{(x, y): x - y = w}
    d2 = set(int(t) for t in np.unique(sp.norms[diffs > 0.5]))
    return d2, mu3(A).support()


# -- sphere transforms ------------------------------------------------------

@dataclass
class PairIdentity:
    lhs: complex
    rhs: float

    @property
    def error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.rhs), 1.0)


def sphere_pair_rhs(sp: Space, m: int, v: int) -> float:
    q, d = sp.q, sp.dim
    inner = (q - 1) if sp.norms[m] == sp.norms[v] else -1
    delta = 1.0 if (m == 0 and v == 0) else 0.0
    return q ** (2 * d) * (delta / q + inner / q ** (d + 1))


def sphere_pair_identity(sp: Space, m: int, v: int, S_hat: np.ndarray | None = None) -> PairIdentity:
    """sum_t S_t^(m) conj(S_t^(v)) against its closed form."""
    S_hat = sphere_transforms(sp) if S_hat is None else S_hat
    lhs = complex(np.sum(S_hat[:, m] * np.conj(S_hat[:, v])))
    return PairIdentity(lhs, sphere_pair_rhs(sp, m, v))


def sphere_pair_grid(sp: Space, S_hat: np.ndarray | None = None) -> float:
    """Largest relative error of the pair identity over every (m, v)."""
    S_hat = sphere_transforms(sp) if S_hat is None else S_hat
    lhs = S_hat.T @ np.conj(S_hat)
    same = sp.norms[:, None] == sp.norms[None, :]
    q, d = sp.q, sp.dim
    rhs = np.where(same, q - 1, -1) * float(q ** (d - 1))
    rhs[0, 0] += q ** (2 * d - 1)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1.0)))


@dataclass
class Decay:
    t: int
    max_nonzero: float
    ratio: float


def sphere_fourier_decay(sp: Space, t: int, S_hat: np.ndarray | None = None) -> Decay:
    """max_{x != 0} |S_t^(x)| and its ratio to q^{(d-1)/2}."""
    row = S_hat[t] if S_hat is not None else indicator_transform(PointSet(sp, sp.norms == t))
    m = float(np.max(np.abs(row[1:]))) if sp.size > 1 else 0.0
    return Decay(t, m, m / sp.q ** ((sp.dim - 1) / 2))


def plancherel_sphere_error(sp: Space, S_hat: np.ndarray) -> float:
    sizes = np.bincount(sp.norms, minlength=sp.q)
    lhs = np.sum(np.abs(S_hat) ** 2, axis=1)
    rhs = sp.size * sizes
    return float(np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1)))


# -- large-set inequalities and second moment --------------------------------

def _threshold_hypothesis(sp: Space, n: int) -> str | None:
    problems = []
    if sp.dim % 2 or sp.dim < 4:
        problems.append(f"d = {sp.dim} is not even and >= 4")
    if n < 3 * sp.q ** (sp.dim / 2):
        problems.append(f"|A| = {n} < 3 q^(d/2) = {3 * sp.q ** (sp.dim / 2):g}")
    return "; ".join(problems) or None


@dataclass
class LargeSetCheck:
    first: bool
    second: bool
    second_lhs: float
    second_rhs: float
    mu3_zero: int
    flags: list[str] = field(default_factory=list)


def loai0_check(A: PointSet, exploratory: bool = False, S_hat: np.ndarray | None = None) -> LargeSetCheck:
    """For |A| >= 3 q^{d/2}, d even:

    (|A|^3 - mu_3(0))^2 >= |A|^6 / 9, and
    q^-d |sum_{x in S_0} A^(x)^3|^2 - mu_3(0)^2 <= 4 |A|^6 / q.
    """
    _require_nonempty(A)
    sp = A.space
    n = len(A)
    why = _threshold_hypothesis(sp, n)
    if why and not exploratory:
        raise HypothesisViolated(why)
    m0 = mu3(A)[0]
    first = 9 * (n**3 - m0) ** 2 >= n**6
    Ahat = indicator_transform(A)
    s0 = np.sum(Ahat[sp.norms == 0] ** 3)
    lhs = abs(s0) ** 2 / sp.size - float(m0) ** 2
    rhs = 4 * float(n) ** 6 / sp.q
    second = lhs <= rhs * (1 + 1e-9)
    return LargeSetCheck(first, second, lhs, rhs, m0, [why] if why else [])


@dataclass
class RestrictionNorms:
    t: int
    n: int
    l2: float
    l3: float
    l2_bound: float
    l3_bound: float | None
    flags: list[str] = field(default_factory=list)

    @property
    def l2_ratio(self) -> float:
        return self.l2 / self.l2_bound

    @property
    def l3_ratio(self) -> float | None:
        return None if self.l3_bound is None else self.l3 / self.l3_bound


def l3_bound(q: int, d: int, n: int) -> float | None:
    if d == 4:
        return n ** (7 / 9)
    if d >= 6 and d % 2 == 0:
        return q ** (-(d * d - 7 * d + 6) / (12 * (d - 2))) * n ** (1 - d / (6 * d - 12))
    return None


def restriction_norms(A: PointSet, t: int) -> RestrictionNorms:
    """L^2 and L^3 norms of A^ on (S_t, dsigma) with their bound ratios."""
    _require_nonempty(A)
    if t == 0:
        raise ZeroRadius("restriction norms need t != 0")
    sp = A.space
    n = len(A)
    on = sp.norms == t
    if not on.any():
        raise InvalidParams(f"S_{t} is empty")
    vals = np.abs(indicator_transform(A)[on])
    l2 = float(np.mean(vals**2)) ** 0.5
    l3 = float(np.mean(vals**3)) ** (1 / 3)
    flags = []
    if n < sp.q ** ((sp.dim - 1) / 2):
        flags.append("below_l2_threshold")
    b3 = l3_bound(sp.q, sp.dim, n)
    if b3 is None:
        flags.append(f"exploratory: d = {sp.dim} has no L^3 bound")
    return RestrictionNorms(t, n, l2, l3, n / sp.q ** ((sp.dim - 1) / 4), b3, flags)


def second_moment_rhs(q: int, d: int, n: int) -> float:
    if d == 4:
        return n**6 / q + q**3 * n ** (13 / 3)
    return n**6 / q + q ** ((3 * d * d - 5 * d + 2) / (4 * d - 8)) * n ** (5 - d / (2 * d - 4))


@dataclass
class CoverageRecord:
    q: int
    d: int
    n: int
    delta2: int
    delta3: int
    delta3_nonzero: int
    sum_nonzero: int
    second_moment: int
    rhs: float
    flags: list[str] = field(default_factory=list)

    @property
    def cs_lower_bound(self) -> Fraction:
        if self.second_moment == 0:
            return Fraction(0)
        return Fraction(self.sum_nonzero**2, self.second_moment)

    @property
    def cs_ok(self) -> bool:
        # (sum mu)^2 <= |support| * sum mu^2, in integers
        return self.sum_nonzero**2 <= self.delta3_nonzero * self.second_moment

    @property
    def ratio(self) -> float:
        return self.second_moment / self.rhs

    def to_row(self) -> dict[str, Any]:
        return {
            "q": self.q, "d": self.d, "n": self.n, "delta2": self.delta2, "delta3": self.delta3,
            "second_moment": self.second_moment, "rhs": f"{self.rhs:.6g}",
            "ratio": f"{self.ratio:.6g}", "cs_lower_bound": f"{float(self.cs_lower_bound):.6f}",
            "cs_ok": self.cs_ok, "flags": ";".join(self.flags),
        }


def second_moment_check(A: PointSet, exploratory: bool = False) -> CoverageRecord:
    _require_nonempty(A)
    sp = A.space
    n = len(A)
    why = _threshold_hypothesis(sp, n)
    if why and not exploratory:
        raise HypothesisViolated(why)
    table = mu3(A)
    nz = [int(table[t]) for t in range(1, sp.q)]
    d2, d3 = distance_sets(A)
    return CoverageRecord(
        sp.q, sp.dim, n, len(d2), len(d3), sum(1 for c in nz if c > 0),
        sum(nz), sum(c * c for c in nz), second_moment_rhs(sp.q, sp.dim, n),
        [why] if why else [],
    )


# -- coverage experiment ------------------------------------------------------

@dataclass
class CoverageRow:
    q: int
    d: int
    size: int
    trials: int
    full_coverage_fraction: float
    mean_delta3_over_q: float
    positive_fraction: float
    seed: int

    def to_row(self) -> dict[str, Any]:
        return {
            "q": self.q, "d": self.d, "size": self.size, "trials": self.trials,
            "full_coverage_fraction": f"{self.full_coverage_fraction:.6f}",
            "mean_delta3_over_q": f"{self.mean_delta3_over_q:.6f}",
            "positive_fraction": f"{self.positive_fraction:.6f}",
            "seed": self.seed,
        }


def coverage_experiment(f: Field, d: int, sizes: Sequence[int], trials: int, seed: int) -> list[CoverageRow]:
    """Monte-Carlo |Delta_3(A)| for uniformly random A of each size.

    "Positive proportion" is read as |Delta_3| >= q/2; full coverage as Delta_3 = F_q.
    """
    if d % 2:
        raise HypothesisViolated(f"d = {d} must be even")
    sp = space(f, d)
    rows = []
    for size in sizes:
        if not 1 <= size <= sp.size:
            raise InvalidParams(f"size {size} outside [1, q^d]")
        full = pos = 0
        tot = 0
        for trial in range(trials):
            rng = np.random.default_rng(trial_seed(seed, f"coverage:{size}", f.q, d, trial))
            A = PointSet.from_indices(sp, rng.choice(sp.size, size=size, replace=False))
            k = len(mu3(A).support())
            full += k == sp.q
            pos += k >= sp.q / 2
            tot += k
        rows.append(CoverageRow(f.q, d, size, trials, full / trials, tot / (trials * sp.q), pos / trials, seed))
    return rows


def coverage_threshold(q: int, d: int) -> int:
    """Size at which full coverage is expected: ceil(q^{12/5}) for d = 4, ceil(q^{d/2 + (3d-6)/(6d-8)}) for d >= 6."""
    if d == 4:
        return math.ceil(q ** (12 / 5))
    return math.ceil(q ** (d / 2 + (3 * d - 6) / (6 * d - 8)))


__all__ = [
    "Mu3Table", "mu3", "mu3_naive", "mu3_convolution", "mu3_identity", "triple_sum_counts",
    "distance_sets", "PairIdentity", "sphere_pair_identity", "sphere_pair_rhs", "sphere_pair_grid",
    "Decay", "sphere_fourier_decay", "plancherel_sphere_error", "LargeSetCheck", "loai0_check",
    "RestrictionNorms", "restriction_norms", "l3_bound", "CoverageRecord", "second_moment_check",
    "second_moment_rhs", "CoverageRow", "coverage_experiment", "coverage_threshold", "DECAY_CEILING",
]

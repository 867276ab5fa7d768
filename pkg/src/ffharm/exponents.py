"""Exact exponent arithmetic for extension estimates.

Exponents are ``Fraction`` values or ``INF``; ``1/INF == 0``.  Nothing here
touches floats except when a caller asks for one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

from .errors import BadExponent, BadTheta, InvalidParams

INF = math.inf
Exponent = Union[Fraction, float]

RADIUS_CLASSES = ("zero", "square", "nonsquare", "primitive")


def as_exponent(x) -> Exponent:
    if isinstance(x, str):
        if x.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        x = Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            return INF
        x = Fraction(x).limit_denominator(10**6)
    x = Fraction(x)
    if x < 1:
        raise BadExponent(f"exponent {x} is below 1")
    return x


def reciprocal(x: Exponent) -> Fraction:
    return Fraction(0) if x == INF else 1 / Fraction(x)


def from_reciprocal(y: Fraction) -> Exponent:
    return INF if y == 0 else 1 / y


def conjugate(p: Exponent) -> Exponent:
    """Hoelder conjugate p' with 1/p + 1/p' = 1."""
    return from_reciprocal(1 - reciprocal(as_exponent(p)))


def fmt(x: Exponent) -> str:
    return "inf" if x == INF else str(x)


def interpolate(p0, r0, p1, r1, theta) -> tuple[Exponent, Exponent]:
    """(p, r) with 1/p = (1-theta)/p0 + theta/p1 and likewise for r."""
    theta = Fraction(theta)
    if not 0 <= theta <= 1:
        raise BadTheta(f"theta = {theta} outside [0, 1]")
    p0, r0, p1, r1 = (as_exponent(x) for x in (p0, r0, p1, r1))
    p = from_reciprocal((1 - theta) * reciprocal(p0) + theta * reciprocal(p1))
    r = from_reciprocal((1 - theta) * reciprocal(r0) + theta * reciprocal(r1))
    return p, r


def recover_theta(r0, r1, r) -> Fraction:
    """theta from the r-coordinates; needs r0 != r1."""
    a, b, c = (reciprocal(as_exponent(x)) for x in (r0, r1, r))
    if a == b:
        raise InvalidParams("theta is not determined when r0 == r1")
    return (c - a) / (b - a)


def necessary_r(d: int, p, k: int) -> Exponent:
    """Smallest r allowed by testing against a k-dimensional affine subspace of the sphere.

    max(2d/(d-1), p(d-k) / ((p-1)(d-1-k))), with p = 1 giving INF.
    """
    if d < 2:
        raise InvalidParams("d must be at least 2")
    if not 0 <= k < d - 1:
        raise InvalidParams(f"k = {k} must satisfy 0 <= k < d - 1")
    p = as_exponent(p)
    base = Fraction(2 * d, d - 1)
    if p == 1:
        return INF
    if p == INF:
        sub = Fraction(d - k, d - 1 - k)
    else:
        sub = p * (d - k) / ((p - 1) * (d - 1 - k))
    return max(base, sub)


def stein_tomas_r(d: int) -> Fraction:
    return Fraction(2 * d + 2, d - 1)


def l2_conjecture_r(d: int) -> Fraction:
    return Fraction(2 * d + 2, d - 1) if d % 2 else Fraction(2 * d + 4, d)


def l4_achieved_p(d: int) -> Fraction:
    return Fraction(4 * d, 3 * d - 2)


def l4_conjectured_p(d: int) -> Fraction:
    return Fraction(4 * d + 4, 3 * d + 1)


def subspace_dimension(d: int) -> int:
    """Dimension of a maximal affine subspace on a sphere that contains one."""
    return (d - 1) // 2 if d % 2 else (d - 2) // 2


@dataclass(frozen=True)
class Entry:
    p: Exponent
    r: Exponent
    source: str

    @property
    def kind(self) -> str:
        """"l2" for (2 -> r) estimates, "l4" for (p -> 4), else "context"."""
        if self.source == "delta3_size_exponent":
            return "context"
        return "l2" if self.p == 2 else "l4" if self.r == 4 else "context"

    @property
    def dual(self) -> tuple[Exponent, Exponent]:
        """R*(p -> r) is equivalent to R(r' -> p')."""
        return conjugate(self.r), conjugate(self.p)

    def to_json(self) -> dict[str, str]:
        rd, pd = self.dual
        return {"p": fmt(self.p), "r": fmt(self.r), "source": self.source,
                "dual_p": fmt(rd), "dual_r": fmt(pd)}


@dataclass
class ExponentRecord:
    d: int
    q_class: int
    radius_class: str
    achieved: list[Entry] = field(default_factory=list)
    conjectured: list[Entry] = field(default_factory=list)
    context: list[Entry] = field(default_factory=list)

    def necessary_r(self, p, k: int | None = None) -> Exponent:
        k = subspace_dimension(self.d) if k is None else k
        return necessary_r(self.d, p, k)

    def achieved_p(self) -> Exponent | None:
        """Best p with (p -> 4) achieved."""
        ps = [e.p for e in self.achieved if e.kind == "l4"]
        return min(ps) if ps else None

    def conjectured_p(self) -> Exponent | None:
        ps = [e.p for e in self.conjectured if e.kind == "l4"]
        return min(ps) if ps else None

    def achieved_r(self) -> Exponent | None:
        """Best r with (2 -> r) achieved."""
        rs = [e.r for e in self.achieved if e.kind == "l2"]
        return min(rs) if rs else None

    def conjectured_r(self) -> Exponent | None:
        rs = [e.r for e in self.conjectured if e.kind == "l2"]
        return min(rs) if rs else None

    def consistent(self) -> bool:
        """Conjectures are at least as strong as what is achieved: smaller p toward L^4, smaller r from L^2."""
        ap, cp = self.achieved_p(), self.conjectured_p()
        if ap is not None and cp is not None and cp > ap:
            return False
        ar, cr = self.achieved_r(), self.conjectured_r()
        if ar is not None and cr is not None and cr > ar:
            return False
        return all(e.p >= 1 and e.r >= 1 for e in self.achieved + self.conjectured + self.context)

    def to_json(self) -> dict[str, Any]:
        return {
            "d": self.d, "q_class": self.q_class, "radius_class": self.radius_class,
            "achieved": [e.to_json() for e in self.achieved],
            "conjectured": [e.to_json() for e in self.conjectured],
            "context": [e.to_json() for e in self.context],
        }


def catalog(d: int, q_class: int, radius_class: str) -> ExponentRecord:
    """Known and conjectured extension exponents for S_j in F_q^d.

    q_class is q mod 4 (1 or 3); radius_class one of zero/square/nonsquare/primitive.
    A primitive radius is in particular a nonsquare.
    """
    if d < 2:
        raise InvalidParams("d must be at least 2")
    if q_class not in (1, 3):
        raise InvalidParams(f"q_class must be 1 or 3, got {q_class}")
    if radius_class not in RADIUS_CLASSES:
        raise InvalidParams(f"unknown radius class {radius_class!r}")
    rec = ExponentRecord(d, q_class, radius_class)
    four = Fraction(4)
    nonzero = radius_class != "zero"
    nonsquare = radius_class in ("nonsquare", "primitive")

    if nonzero:
        rec.achieved.append(Entry(Fraction(2), stein_tomas_r(d), "stein_tomas"))
        rec.conjectured.append(Entry(Fraction(2), l2_conjecture_r(d), "l2_conjecture"))
        if d == 2:
            rec.achieved.append(Entry(Fraction(2), l2_conjecture_r(d), "l2_two_dimensions"))
    elif d % 4 == 2 and q_class == 3:
        rec.achieved.append(Entry(Fraction(2), l2_conjecture_r(d), "zero_radius_l2"))

    if nonzero and d % 2 == 1 and d >= 3:
        if radius_class == "primitive" and d % 4 == 1:
            rec.achieved.append(Entry(l4_achieved_p(d), four, "primitive_radius_d1mod4"))
        if radius_class == "primitive" and d % 4 == 3 and q_class == 1:
            rec.achieved.append(Entry(l4_achieved_p(d), four, "primitive_radius_d3mod4_q1mod4"))
        if radius_class == "square" and d % 4 == 3 and q_class == 3:
            rec.achieved.append(Entry(l4_achieved_p(d), four, "square_radius_d3mod4_q3mod4"))
        sharp = (
            (nonsquare and d % 4 == 1)
            or (nonsquare and d % 4 == 3 and q_class == 1)
            or (radius_class == "square" and d % 4 == 3 and q_class == 3)
        )
        if sharp:
            rec.conjectured.append(Entry(l4_conjectured_p(d), four, "l4_conjecture"))
    if nonzero and d % 2 == 0:
        rec.achieved.append(Entry(l4_achieved_p(d), four, "even_dimension_sharp"))
        rec.conjectured.append(Entry(l4_achieved_p(d), four, "even_dimension_sharp"))

    if d % 2 == 0:
        # size exponent for |Delta_3(A)| >> q, recorded as an (exponent, 1) row
        e = Fraction(12, 5) if d == 4 else Fraction(d, 2) + Fraction(3 * d - 6, 6 * d - 8)
        rec.context.append(Entry(e, Fraction(1), "delta3_size_exponent"))
    return rec


def catalog_json(max_d: int = 20) -> list[dict[str, Any]]:
    return [
        catalog(d, qc, rc).to_json()
        for d in range(2, max_d + 1) for qc in (1, 3) for rc in RADIUS_CLASSES
    ]


def dump_catalog(path, max_d: int = 20) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(catalog_json(max_d), fh, indent=2)
        fh.write("\n")


def l4_gate(d: int, q: int, radius_class: str) -> str | None:
    """Source tag of the achieved (4d/(3d-2) -> 4) estimate covering this case, or None."""
    for e in catalog(d, q % 4, radius_class).achieved:
        if e.kind == "l4":
            return e.source
    return None


__all__ = [
    "INF", "Entry", "ExponentRecord", "as_exponent", "reciprocal", "conjugate", "fmt",
    "interpolate", "recover_theta", "necessary_r", "stein_tomas_r", "l2_conjecture_r",
    "l4_achieved_p", "l4_conjectured_p", "subspace_dimension", "catalog", "catalog_json",
    "dump_catalog", "l4_gate", "RADIUS_CLASSES",
]

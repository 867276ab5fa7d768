"""Arithmetic in F_q for odd prime powers q = p^k, with characters and classical sums.

Elements are plain integers in ``range(q)``.  The integer ``a`` encodes the
polynomial ``c_0 + c_1 x + ... + c_{k-1} x^{k-1}`` through its base-``p``
digits (constant coefficient least significant), so ``0`` is the additive
identity, ``1`` the multiplicative identity, and ``0..p-1`` is the prime
subfield.  All operations go through lookup tables built once per field;
every table is a read-only numpy array, which makes vectorised arithmetic on
arrays of elements a matter of fancy indexing (``f.mul_table[a, b]``).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import CapExceeded, DegreeOutOfRange, DivisionByZero, InvalidParams, NotOddPrime

DEFAULT_Q_CAP = 128


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int] | None:
    """Return ``(p, k)`` with ``q = p**k`` or None if q is not a prime power."""
    if q < 2:
        return None
    p = prime_factors(q)
    if len(p) != 1:
        return None
    k, n = 0, q
    while n > 1:
        n //= p[0]
        k += 1
    return p[0], k


# -- polynomials over F_p, coefficient lists low -> high ---------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    m = _trim(list(m))
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _trim(a)
    return a


def _is_irreducible(m: list[int], p: int) -> bool:
    k = len(m) - 1
    if k == 1:
        return True
    for deg in range(1, k // 2 + 1):
        for v in range(p**deg):
            g = [(v // p**i) % p for i in range(deg)] + [1]
            if not _poly_mod(m, g, p):
                return False
    return True


def _smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    # monic, lower coefficients enumerated as a base-p number (c_0 least significant)
    for v in range(p**k):
        m = [(v // p**i) % p for i in range(k)] + [1]
        if k == 1 or m[0] != 0:
            if _is_irreducible(m, p):
                return tuple(m)
    raise AssertionError(f"no irreducible polynomial of degree {k} over F_{p}")


def _digits(q: int, p: int, k: int) -> np.ndarray:
    idx = np.arange(q)
    return np.stack([(idx // p**i) % p for i in range(k)], axis=1)


def _mul_table(p: int, k: int, modulus: tuple[int, ...]) -> np.ndarray:
    q = p**k
    c = _digits(q, p, k)
    prod = np.zeros((q, q, 2 * k - 1), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            prod[:, :, i + j] += np.outer(c[:, i], c[:, j])
    prod %= p
    for n in range(2 * k - 2, k - 1, -1):
        lead = prod[:, :, n].copy()
        for i in range(k):
            prod[:, :, n - k + i] = (prod[:, :, n - k + i] - lead * modulus[i]) % p
        prod[:, :, n] = 0
    weights = p ** np.arange(k)
    return prod[:, :, :k] @ weights


@dataclass(frozen=True)
class Field:
    """The finite field F_q, q = p^k odd.

    Construct through :func:`make_field`; instances are cached so identity
    comparison between fields is meaningful.
    """

    p: int
    k: int
    modulus: tuple[int, ...]
    primitive: int
    add_table: np.ndarray = field(repr=False, compare=False)
    mul_table: np.ndarray = field(repr=False, compare=False)
    neg_table: np.ndarray = field(repr=False, compare=False)
    inv_table: np.ndarray = field(repr=False, compare=False)
    trace_table: np.ndarray = field(repr=False, compare=False)
    sq_table: np.ndarray = field(repr=False, compare=False)
    eta_table: np.ndarray = field(repr=False, compare=False)
    chi_table: np.ndarray = field(repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.p**self.k

    def elements(self) -> range:
        return range(self.q)

    def _check(self, *xs: int) -> None:
        for x in xs:
            if not 0 <= x < self.q:
                raise InvalidParams(f"{x} is not an element of F_{self.q}")

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("0 has no inverse")
        return int(self.inv_table[a])

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = int(self.mul_table[result, a])
            a = int(self.mul_table[a, a])
            e >>= 1
        return result

    def trace(self, a: int) -> int:
        return int(self.trace_table[a])

    def from_int(self, n: int) -> int:
        """Image of the integer ``n`` in the prime subfield."""
        return n % self.p

    def is_square(self, a: int) -> bool:
        return self.eta_table[a] == 1

    def sqrt(self, a: int) -> int | None:
        roots = np.flatnonzero(self.sq_table == a)
        return int(roots[0]) if roots.size else None

    def order(self, a: int) -> int:
        if a == 0:
            raise InvalidParams("0 has no multiplicative order")
        n, x = 1, a
        while x != 1:
            x = int(self.mul_table[x, a])
            n += 1
        return n

    def to_json(self) -> dict[str, Any]:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus), "primitive": self.primitive}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Field:
        f = make_field(int(obj["p"]), int(obj["k"]))
        if "modulus" in obj and tuple(obj["modulus"]) != f.modulus:
            raise InvalidParams(f"modulus {obj['modulus']} differs from canonical {list(f.modulus)}")
        return f

    def __str__(self) -> str:
        return f"F_{self.q}"


@functools.lru_cache(maxsize=None)
def make_field(p: int, k: int = 1, q_cap: int = DEFAULT_Q_CAP) -> Field:
    """Build F_{p^k} with the smallest monic irreducible modulus and smallest primitive element."""
    if not (isinstance(p, int) and p > 2 and is_prime(p)):
        raise NotOddPrime(f"{p} is not an odd prime")
    if not (isinstance(k, int) and k >= 1):
        raise DegreeOutOfRange(f"extension degree must be >= 1, got {k}")
    q = p**k
    if q > q_cap:
        raise CapExceeded(f"q = {q} exceeds the field cap {q_cap}")

    modulus = _smallest_irreducible(p, k)
    digits = _digits(q, p, k)
    weights = p ** np.arange(k)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    neg = ((-digits) % p) @ weights
    mul = _mul_table(p, k, modulus)

    inv = np.zeros(q, dtype=np.int64)
    hits = np.argwhere(mul[1:, :] == 1)
    inv[hits[:, 0] + 1] = hits[:, 1]

    # Frobenius x -> x^p, then trace = x + x^p + ... + x^(p^(k-1))
    frob = np.arange(q)
    for _ in range(p - 1):
        frob = mul[frob, np.arange(q)]
    trace = np.arange(q)
    cur = np.arange(q)
    for _ in range(k - 1):
        cur = frob[cur]
        trace = add[trace, cur]
    assert trace.max() < p, "trace must land in the prime subfield"

    sq = mul[np.arange(q), np.arange(q)]
    eta = np.full(q, -1, dtype=np.int64)
    eta[sq] = 1
    eta[0] = 0

    chi = np.exp(2j * np.pi * trace / p)

    tables = dict(
        add_table=add, mul_table=mul, neg_table=neg, inv_table=inv,
        trace_table=trace, sq_table=sq, eta_table=eta, chi_table=chi,
    )
    for arr in tables.values():
        arr.setflags(write=False)

    factors = prime_factors(q - 1)
    probe = Field(p, k, modulus, 0, **tables)
    primitive = None
    for g in range(1, q):
        if all(probe.pow(g, (q - 1) // r) != 1 for r in factors):
            primitive = g
            break
    assert primitive is not None
    return Field(p, k, modulus, primitive, **tables)


def field_of_order(q: int, q_cap: int = DEFAULT_Q_CAP) -> Field:
    pk = prime_power(q)
    if pk is None or pk[0] == 2:
        raise NotOddPrime(f"{q} is not an odd prime power")
    return make_field(pk[0], pk[1], q_cap=q_cap)


def field_arith(f: Field, op: str, a: int, b: int | None = None) -> int:
    """Dispatch one of add|sub|mul|neg|inv|pow|trace on field elements."""
    f._check(a)
    if op in ("add", "sub", "mul"):
        if b is None:
            raise InvalidParams(f"{op} needs two operands")
        f._check(b)
        return getattr(f, op)(a, b)
    if op == "pow":
        if b is None:
            raise InvalidParams("pow needs an integer exponent")
        return f.pow(a, b)
    if op in ("neg", "inv", "trace"):
        return getattr(f, op)(a)
    raise InvalidParams(f"unknown field operation {op!r}")


def char_eval(f: Field, kind: str, x: int) -> complex | int:
    """Canonical additive character exp(2 pi i Tr(x)/p), or the quadratic character."""
    f._check(x)
    if kind == "additive":
        return complex(f.chi_table[x])
    if kind == "quadratic":
        return int(f.eta_table[x])
    raise InvalidParams(f"unknown character kind {kind!r}")


def gauss_sum(f: Field) -> complex:
    t = np.arange(1, f.q)
    return complex(np.sum(f.eta_table[t] * f.chi_table[t]))


def kloosterman_sum(f: Field, a: int, b: int) -> complex:
    if a == 0 and b == 0:
        raise InvalidParams("Kloosterman sum needs (a, b) != (0, 0)")
    t = np.arange(1, f.q)
    arg = f.add_table[f.mul_table[a, t], f.mul_table[b, f.inv_table[t]]]
    return complex(np.sum(f.chi_table[arg]))


def kloosterman_table(f: Field) -> np.ndarray:
    """All Kloosterman sums K(a, b) as a (q, q) array; K(0, 0) is set to q - 1."""
    t = np.arange(1, f.q)
    at = f.mul_table[:, t]                      # (q, q-1): a*t
    bt = f.mul_table[:, f.inv_table[t]]         # (q, q-1): b/t
    arg = f.add_table[at[:, None, :], bt[None, :, :]]
    return f.chi_table[arg].sum(axis=2)


def special_sum(f: Field, kind: str, a: int | None = None, b: int | None = None) -> complex:
    if kind == "gauss":
        return gauss_sum(f)
    if kind == "kloosterman":
        if a is None or b is None:
            raise InvalidParams("kloosterman needs (a, b)")
        f._check(a, b)
        return kloosterman_sum(f, a, b)
    raise InvalidParams(f"unknown sum kind {kind!r}")


def unit_deviation(f: Field) -> float:
    """max | |chi(x)|^2 - 1 | over the field; should be at rounding level."""
    return float(np.max(np.abs(np.abs(f.chi_table) ** 2 - 1)))


def radius_class(f: Field, j: int) -> str:
    if j == 0:
        return "zero"
    return "square" if f.eta_table[j] == 1 else "nonsquare"


__all__ = [
    "Field", "make_field", "field_of_order", "field_arith", "char_eval",
    "gauss_sum", "kloosterman_sum", "kloosterman_table", "special_sum",
    "is_prime", "prime_power", "prime_factors", "radius_class", "unit_deviation",
    "DEFAULT_Q_CAP",
]

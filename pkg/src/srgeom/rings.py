"""Coefficient rings with exact arithmetic, and finitely generated modules.

Three ring families are supported: the rationals QQ, prime fields GF(p) and
the integers ZZ.  Over the fields a finitely generated module is a vector
space recorded by its dimension; over ZZ it is a finitely generated abelian
group recorded by its free rank together with a divisibility chain of torsion
coefficients d1 | d2 | ... (each > 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class CoefficientRing:
    """One of QQ, GF(p) or ZZ.  Use the module-level constructors below."""

    __slots__ = ("kind", "p")

    def __init__(self, kind: str, p: int | None = None):
        if kind not in ("Rationals", "PrimeField", "Integers"):
            raise ValueError(f"unknown ring kind {kind!r}")
        if kind == "PrimeField":
            if p is None or not _is_prime(p):
                raise ValueError(f"{p!r} is not prime")
        elif p is not None:
            raise ValueError("characteristic only makes sense for PrimeField")
        self.kind = kind
        self.p = p

    # -- structural ---------------------------------------------------------

    @property
    def is_field(self) -> bool:
        return self.kind != "Integers"

    def __eq__(self, other):
        return (isinstance(other, CoefficientRing)
                and self.kind == other.kind and self.p == other.p)

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        if self.kind == "Rationals":
            return "QQ"
        if self.kind == "Integers":
            return "ZZ"
        return f"GF({self.p})"

    # -- arithmetic on elements ---------------------------------------------

    def normalize(self, x):
        """Coerce x into canonical form for this ring.

        Over the rationals plain ints are kept as is (exact, and much
        cheaper than Fraction); Fractions only appear after division."""
        if self.kind == "PrimeField":
            if isinstance(x, int):
                return x % self.p
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise ZeroDivisionError("denominator divisible by p")
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            return int(x) % self.p
        if self.kind == "Integers":
            if isinstance(x, int):
                return x
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if isinstance(x, int) or isinstance(x, Fraction):
            return x
        return Fraction(x)

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        c = a + b
        return c % self.p if self.kind == "PrimeField" else c

    def sub(self, a, b):
        c = a - b
        return c % self.p if self.kind == "PrimeField" else c

    def mul(self, a, b):
        c = a * b
        return c % self.p if self.kind == "PrimeField" else c

    def neg(self, a):
        return (-a) % self.p if self.kind == "PrimeField" else -a

    def is_unit(self, a) -> bool:
        if self.kind == "Integers":
            return a in (1, -1)
        return a != 0 and (self.kind == "Rationals" or a % self.p != 0)

    def inv(self, a):
        if self.kind == "Rationals":
            return Fraction(1) / a
        if self.kind == "PrimeField":
            return pow(int(a), -1, self.p)
        if a in (1, -1):
            return a
        raise ZeroDivisionError(f"{a} is not a unit in ZZ")


QQ = CoefficientRing("Rationals")
ZZ = CoefficientRing("Integers")


def GF(p: int) -> CoefficientRing:
    return CoefficientRing("PrimeField", p)


@dataclass(frozen=True)
class FgModule:
    """A f.g. module over a coefficient ring.

    Over a field the module is k^rank.  Over ZZ it is
    Z^rank + Z/d1 + ... + Z/dk with d1 | d2 | ... and each di > 1.
    """

    ring: CoefficientRing
    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("negative rank")
        if self.torsion:
            if self.ring.is_field:
                raise ValueError("torsion over a field")
            for a, b in zip(self.torsion, self.torsion[1:]):
                if b % a != 0:
                    raise ValueError("torsion coefficients must form a divisibility chain")
            if any(d <= 1 for d in self.torsion):
                raise ValueError("torsion coefficients must exceed 1")

    @property
    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def is_torsion_free(self) -> bool:
        return not self.torsion

    @property
    def is_flat(self) -> bool:
        # For f.g. modules over ZZ flat == torsion-free; over fields always.
        return self.is_torsion_free

    def __repr__(self):
        base = {"Rationals": "Q", "Integers": "Z"}.get(self.ring.kind, f"F{self.ring.p}")
        parts = []
        if self.rank:
            parts.append(base if self.rank == 1 else f"{base}^{self.rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def zero_module(ring: CoefficientRing) -> FgModule:
    return FgModule(ring, 0)

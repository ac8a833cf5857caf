"""Exact coefficient rings: the integers, the rationals and prime fields.

Elements of Z are plain ``int``, elements of Q are ``Fraction`` and elements of
F_p are :class:`Fp` residues.  All three support the usual arithmetic
operators, so the linear algebra elsewhere in the package is written once and
works for every ring.
"""

from __future__ import annotations

import re
from fractions import Fraction


class RingError(ValueError):
    """Raised for malformed ring specs or literals."""

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    k = 3
    while k * k <= p:
        if p % k == 0:
            return False
        k += 2
    return True


class Fp:
    """A residue class modulo a prime ``p``, stored in ``[0, p)``."""

    __slots__ = ("value", "p")

    def __init__(self, value, p):
        self.value = int(value) % p
        self.p = p

    def _lift(self, other):
        if isinstance(other, Fp):
            if other.p != self.p:
                raise RingError("RingMismatch", f"F_{self.p} vs F_{other.p}")
            return other.value
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Fp(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Fp(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Fp(o - self.value, self.p)

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Fp(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fp(-self.value, self.p)

    def __pos__(self):
        return self

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if o % self.p == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return Fp(self.value * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Fp(o, self.p) / self

    def __pow__(self, n):
        return Fp(pow(self.value, n, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, Fp):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return (self.value - other) % self.p == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} mod {self.p}"

    def __str__(self):
        return str(self.value)


class Ring:
    """One of Z, Q or F_p.  Instances are immutable and compare by kind."""

    __slots__ = ("kind", "p")

    def __init__(self, kind: str, p: int | None = None):
        if kind not in ("Z", "Q", "Fp"):
            raise RingError("UnknownRing", kind)
        if kind == "Fp" and (p is None or not _is_prime(p)):
            raise RingError("NonPrimeModulus", f"{p} is not prime")
        self.kind = kind
        self.p = p if kind == "Fp" else None

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    @property
    def characteristic(self) -> int:
        return self.p or 0

    def __eq__(self, other):
        return isinstance(other, Ring) and (self.kind, self.p) == (other.kind, other.p)

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return f"Ring({self.spec})"

    @property
    def spec(self) -> str:
        return f"Fp:{self.p}" if self.kind == "Fp" else self.kind

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __call__(self, x):
        """Coerce an int, Fraction or residue into this ring."""
        if self.kind == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise RingError("NotInRing", f"{x} is not an integer")
                return x.numerator
            if isinstance(x, Fp):
                raise RingError("NotInRing", f"{x!r} is not an integer")
            return int(x)
        if self.kind == "Q":
            if isinstance(x, Fp):
                raise RingError("NotInRing", f"{x!r} is not rational")
            return Fraction(x)
        if isinstance(x, Fp):
            if x.p != self.p:
                raise RingError("RingMismatch", f"{x!r} not in F_{self.p}")
            return x
        if isinstance(x, Fraction):
            return Fp(x.numerator, self.p) / Fp(x.denominator, self.p)
        return Fp(x, self.p)

    def parse(self, text: str):
        """Parse a literal: ``-3``, ``3/2`` or ``4 mod 7``."""
        t = text.strip()
        m = re.fullmatch(r"(-?\d+)\s*mod\s*(\d+)", t)
        if m:
            p = int(m.group(2))
            if self.kind != "Fp" or p != self.p:
                raise RingError("NotInRing", f"{t!r} is not an element of {self.spec}")
            return Fp(int(m.group(1)), p)
        m = re.fullmatch(r"(-?\d+)\s*/\s*(\d+)", t)
        if m:
            den = int(m.group(2))
            if den == 0:
                raise RingError("BadLiteral", t)
            return self(Fraction(int(m.group(1)), den))
        if re.fullmatch(r"-?\d+", t):
            return self(int(t))
        raise RingError("BadLiteral", t)

    def is_unit(self, x) -> bool:
        x = self(x)
        if self.kind == "Z":
            return x in (1, -1)
        return x != 0

    def inv(self, x):
        x = self(x)
        if not self.is_unit(x):
            raise ZeroDivisionError(f"{x!r} is not a unit of {self.spec}")
        if self.kind == "Z":
            return x
        return self.one / x

    def to_json(self, x):
        """A JSON-friendly rendering of an element (int or 'a/b' string)."""
        x = self(x)
        if self.kind == "Z":
            return x
        if self.kind == "Q":
            return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return x.value


def ring_make(spec: str) -> Ring:
    """Build a ring from ``"Z"``, ``"Q"`` or ``"Fp:<prime>"``."""
    s = spec.strip()
    if s in ("Z", "Q"):
        return Ring(s)
    m = re.fullmatch(r"Fp:(\d+)", s)
    if m:
        return Ring("Fp", int(m.group(1)))
    raise RingError("UnknownRing", spec)


def is_invertible(x, ring: Ring | None = None) -> bool:
    """True iff ``x`` is a unit.  The ring is inferred from the value's type
    when not given (int means Z)."""
    if ring is None:
        if isinstance(x, Fp):
            ring = Ring("Fp", x.p)
        elif isinstance(x, Fraction):
            ring = Ring("Q")
        else:
            ring = Ring("Z")
    return ring.is_unit(x)

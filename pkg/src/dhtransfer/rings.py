"""Exact ground rings: Z, Q, Z/n, F_p and Q[t].

Scalars are stored as plain canonical Python values (int, Fraction, or a
trimmed tuple of Fractions for polynomials, constant term first). Ring
objects carry the arithmetic so that hot loops avoid wrapper allocation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from sympy import isprime


class RingError(Exception):
    pass


class UnsupportedRing(RingError):
    pass


class NotDivisible(RingError):
    pass


@dataclass(frozen=True)
class RingSpec:
    kind: str  # "ZZ", "QQ", "ZN", "GF", "QQt"
    modulus: int = 0
    variable: str = "t"

    def __post_init__(self):
        if self.kind not in ("ZZ", "QQ", "ZN", "GF", "QQt"):
            raise RingError(f"unknown ring kind {self.kind!r}")
        if self.kind == "ZN" and self.modulus < 2:
            raise RingError("IntegersMod(n) requires n >= 2")
        if self.kind == "GF" and not isprime(self.modulus):
            raise RingError(f"PrimeField({self.modulus}): modulus is not prime")

    def __str__(self):
        return {
            "ZZ": "ZZ",
            "QQ": "QQ",
            "ZN": f"ZZ/{self.modulus}",
            "GF": f"GF({self.modulus})",
            "QQt": f"QQ[{self.variable}]",
        }[self.kind]


def Integers() -> RingSpec:
    return RingSpec("ZZ")


def Rationals() -> RingSpec:
    return RingSpec("QQ")


def IntegersMod(n: int) -> RingSpec:
    return RingSpec("ZN", n)


def PrimeField(p: int) -> RingSpec:
    return RingSpec("GF", p)


def RationalPolynomials(variable: str = "t") -> RingSpec:
    return RingSpec("QQt", 0, variable)


class Ring:
    """Arithmetic on canonical values of one ground ring."""

    spec: RingSpec
    euclidean = True
    is_field = False
    contains_rationals = False

    zero: Any
    one: Any

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a) -> bool:
        return a == 0

    def from_int(self, n: int):
        raise NotImplementedError

    def coerce(self, v):
        if isinstance(v, str):
            return self.parse(v)
        if isinstance(v, (int, Fraction)):
            return self.from_rational(Fraction(v))
        return v

    def from_rational(self, q: Fraction):
        raise NotImplementedError

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def divmod(self, a, b):
        raise NotImplementedError

    def exact_div(self, a, b):
        """a / b if b divides a, else raise NotDivisible."""
        if self.is_zero(b):
            if self.is_zero(a):
                return self.zero
            raise NotDivisible(f"{self.fmt(b)} does not divide {self.fmt(a)}")
        q, r = self.divmod(a, b)
        if not self.is_zero(r):
            raise NotDivisible(f"{self.fmt(b)} does not divide {self.fmt(a)}")
        return q

    def divides(self, b, a) -> bool:
        try:
            self.exact_div(a, b)
            return True
        except NotDivisible:
            return False

    def size(self, a) -> int:
        """Euclidean size used for pivot choice."""
        return 0

    def unit_normal(self, a):
        """Unit u with u*a in normal form (positive / monic / one)."""
        return self.one if self.is_zero(a) else self.inv(a)

    def gcd(self, a, b):
        while not self.is_zero(b):
            a, b = b, self.divmod(a, b)[1]
        return self.mul(self.unit_normal(a), a)

    def pow(self, a, e: int):
        r = self.one
        for _ in range(e):
            r = self.mul(r, a)
        return r

    def fmt(self, a) -> str:
        return str(a)

    def parse(self, s: str):
        return self.from_rational(Fraction(s.strip()))

    def __repr__(self):
        return f"Ring({self.spec})"


class IntegerRing(Ring):
    zero = 0
    one = 1

    def __init__(self, spec):
        self.spec = spec

    def from_int(self, n):
        return int(n)

    def from_rational(self, q):
        if q.denominator != 1:
            raise RingError(f"{q} is not an integer")
        return q.numerator

    def is_unit(self, a):
        return a in (1, -1)

    def inv(self, a):
        if a not in (1, -1):
            raise NotDivisible(f"{a} is not a unit in ZZ")
        return a

    def divmod(self, a, b):
        q, r = divmod(a, b)
        # symmetric remainder keeps entries small
        if 2 * abs(r) > abs(b):
            r -= b
            q += 1
        return q, r

    def size(self, a):
        return abs(a)

    def unit_normal(self, a):
        return -1 if a < 0 else 1


class RationalField(Ring):
    is_field = True
    contains_rationals = True
    zero = Fraction(0)
    one = Fraction(1)

    def __init__(self, spec):
        self.spec = spec

    def from_int(self, n):
        return Fraction(n)

    def from_rational(self, q):
        return Fraction(q)

    def is_unit(self, a):
        return a != 0

    def inv(self, a):
        if a == 0:
            raise NotDivisible("division by zero")
        return 1 / a

    def divmod(self, a, b):
        return a / b, Fraction(0)


class ModularRing(Ring):
    """Z/n; a field when n is prime."""

    zero = 0
    one = 1

    def __init__(self, spec):
        self.spec = spec
        self.n = spec.modulus
        self.is_field = spec.kind == "GF"
        self.euclidean = self.is_field

    def add(self, a, b):
        return (a + b) % self.n

    def sub(self, a, b):
        return (a - b) % self.n

    def mul(self, a, b):
        return (a * b) % self.n

    def neg(self, a):
        return (-a) % self.n

    def from_int(self, n):
        return n % self.n

    def from_rational(self, q):
        den = q.denominator % self.n
        try:
            return (q.numerator * pow(den, -1, self.n)) % self.n
        except ValueError:
            raise NotDivisible(f"{q} has no image in ZZ/{self.n}") from None

    def is_unit(self, a):
        from math import gcd

        return gcd(a, self.n) == 1

    def inv(self, a):
        try:
            return pow(a, -1, self.n)
        except ValueError:
            raise NotDivisible(f"{a} is not a unit mod {self.n}") from None

    def divmod(self, a, b):
        if not self.is_field:
            raise UnsupportedRing(f"{self.spec} is not a Euclidean domain")
        return self.mul(a, self.inv(b)), 0

    def exact_div(self, a, b):
        if self.is_field:
            return super().exact_div(a, b)
        # Z/n: solve b*x = a by brute force (verification-only ring)
        for x in range(self.n):
            if (b * x - a) % self.n == 0:
                return x
        raise NotDivisible(f"{b} does not divide {a} mod {self.n}")

    def unit_normal(self, a):
        if not self.is_field:
            raise UnsupportedRing(f"{self.spec} is not a Euclidean domain")
        return super().unit_normal(a)


_POLY_TERM = re.compile(r"([+-]?)\s*([0-9/]*)\s*\*?\s*(?:([a-zA-Z_]\w*)(?:\^(\d+))?)?")


class PolynomialRing(Ring):
    """Q[t]; values are tuples of Fractions, constant term first, trimmed."""

    contains_rationals = True
    zero: tuple = ()
    one: tuple = (Fraction(1),)

    def __init__(self, spec):
        self.spec = spec
        self.var = spec.variable

    @staticmethod
    def _trim(c):
        c = list(c)
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        c = list(a)
        for i, v in enumerate(b):
            c[i] += v
        return self._trim(c)

    def neg(self, a):
        return tuple(-v for v in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a or not b:
            return ()
        c = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if u:
                for j, v in enumerate(b):
                    c[i + j] += u * v
        return self._trim(c)

    def is_zero(self, a):
        return not a

    def from_int(self, n):
        return self._trim((Fraction(n),))

    def from_rational(self, q):
        return self._trim((Fraction(q),))

    def monomial(self, coeff, deg):
        return self._trim([Fraction(0)] * deg + [Fraction(coeff)])

    def degree(self, a):
        return len(a) - 1

    def is_unit(self, a):
        return len(a) == 1

    def inv(self, a):
        if len(a) != 1:
            raise NotDivisible(f"{self.fmt(a)} is not a unit in {self.spec}")
        return (1 / a[0],)

    def divmod(self, a, b):
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(a)
        db = len(b) - 1
        lead = b[-1]
        q = [Fraction(0)] * max(len(a) - db, 0)
        for k in range(len(a) - 1, db - 1, -1):
            c = r[k] / lead
            if c:
                q[k - db] = c
                for i, v in enumerate(b):
                    r[k - db + i] -= c * v
        return self._trim(q), self._trim(r[:db] if db > 0 else [])

    def size(self, a):
        return len(a) - 1

    def unit_normal(self, a):
        return self.one if not a else (1 / a[-1],)

    def eval_at(self, a, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for v in reversed(a):
            acc = acc * x + v
        return acc

    def fmt(self, a):
        if not a:
            return "0"
        parts = []
        for deg in range(len(a) - 1, -1, -1):
            c = a[deg]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if deg == 0:
                body = str(mag)
            else:
                mono = self.var if deg == 1 else f"{self.var}^{deg}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def parse(self, s: str):
        s = s.replace(" ", "")
        if not s:
            raise RingError("empty polynomial")
        acc = ()
        pos = 0
        while pos < len(s):
            m = _POLY_TERM.match(s, pos)
            if not m or m.end() == pos:
                raise RingError(f"cannot parse polynomial {s!r}")
            sign, coef, var, exp = m.groups()
            if var is not None and var != self.var:
                raise RingError(f"unknown variable {var!r} in {s!r}")
            c = Fraction(coef) if coef else Fraction(1)
            if sign == "-":
                c = -c
            deg = (int(exp) if exp else 1) if var else 0
            acc = self.add(acc, self.monomial(c, deg))
            pos = m.end()
        return acc


_CACHE: dict = {}


def ring(spec: RingSpec) -> Ring:
    r = _CACHE.get(spec)
    if r is None:
        cls = {
            "ZZ": IntegerRing,
            "QQ": RationalField,
            "ZN": ModularRing,
            "GF": ModularRing,
            "QQt": PolynomialRing,
        }[spec.kind]
        r = _CACHE[spec] = cls(spec)
    return r


def parse_ring(text: str) -> RingSpec:
    t = text.strip().replace(" ", "")
    if t in ("ZZ", "Z"):
        return Integers()
    if t in ("QQ", "Q"):
        return Rationals()
    m = re.fullmatch(r"(?:ZZ|Z)/(\d+)", t)
    if m:
        return IntegersMod(int(m.group(1)))
    m = re.fullmatch(r"(?:GF|F)\(?(\d+)\)?", t)
    if m:
        return PrimeField(int(m.group(1)))
    m = re.fullmatch(r"(?:QQ|Q)\[([a-zA-Z_]\w*)\]", t)
    if m:
        return RationalPolynomials(m.group(1))
    raise RingError(f"unknown ring {text!r}")


@dataclass(frozen=True)
class ExactScalar:
    """A ring element with its ring attached; convenience wrapper."""

    spec: RingSpec
    value: Any

    @staticmethod
    def of(spec: RingSpec, v) -> "ExactScalar":
        return ExactScalar(spec, ring(spec).coerce(v))

    def _other(self, o):
        if isinstance(o, ExactScalar):
            if o.spec != self.spec:
                raise RingError("ring mismatch")
            return o.value
        return ring(self.spec).coerce(o)

    def __add__(self, o):
        return ExactScalar(self.spec, ring(self.spec).add(self.value, self._other(o)))

    def __sub__(self, o):
        return ExactScalar(self.spec, ring(self.spec).sub(self.value, self._other(o)))

    def __mul__(self, o):
        return ExactScalar(self.spec, ring(self.spec).mul(self.value, self._other(o)))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return ExactScalar(self.spec, ring(self.spec).neg(self.value))

    def __truediv__(self, o):
        return ExactScalar(self.spec, ring(self.spec).exact_div(self.value, self._other(o)))

    def is_zero(self):
        return ring(self.spec).is_zero(self.value)

    def __str__(self):
        return ring(self.spec).fmt(self.value)

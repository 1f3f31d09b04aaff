"""Arithmetic in a prime field F_p and the integer helpers used for Z_N.

Field elements are small immutable values; all operations return new
objects.  Mixing elements of different fields raises :class:`FieldMismatch`.

>>> F = FieldParams(13)
>>> F(7) + F(9)
FieldElement(3, p=13)
>>> F(2).inv()
FieldElement(7, p=13)
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass

from .errors import FieldMismatch, NonInvertible, PrimeGenerationError

MR_ROUNDS = 40

_SMALL_PRIMES = [
    q for q in range(3, 2000)
    if all(q % d for d in range(2, int(q ** 0.5) + 1))
]
_SMALL_PRODUCT = functools.reduce(lambda a, b: a * b, _SMALL_PRIMES)


def pow_mod(base: int, exp: int, modulus: int) -> int:
    """Left-to-right square-and-multiply: ``base**exp % modulus``."""
    if modulus < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise ValueError("negative exponent")
    base %= modulus
    result = 1
    for bit in bin(exp)[2:]:
        result = result * result % modulus
        if bit == "1":
            result = result * base % modulus
    return result


def inv_mod(a: int, m: int) -> int:
    """Inverse of ``a`` modulo ``m``."""
    a %= m
    if a == 0:
        raise NonInvertible(f"0 has no inverse modulo {m}")
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NonInvertible(f"{a} is not invertible modulo {m}") from None


@functools.lru_cache(maxsize=256)
def is_probable_prime(n: int, rounds: int = MR_ROUNDS) -> bool:
    """Miller-Rabin with ``rounds`` random bases (witnesses seeded by ``n``)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    witness_rng = random.Random(n)
    for _ in range(rounds):
        a = witness_rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: random.Random | None = None, max_tries: int = 100_000) -> int:
    """Uniform-ish random prime with exactly ``bits`` bits."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    rng = rng or random.SystemRandom()
    if bits <= 11:
        candidates = [q for q in range(1 << (bits - 1), 1 << bits) if is_probable_prime(q)]
        return rng.choice(candidates)
    for _ in range(max_tries):
        n = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        # cheap sieve before Miller-Rabin
        if _gcd(n, _SMALL_PRODUCT) != 1:
            continue
        if is_probable_prime(n):
            return n
    raise PrimeGenerationError(f"no {bits}-bit prime after {max_tries} candidates")


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class FieldParams:
    """The prime field F_p.  Calling an instance builds an element."""

    p: int

    def __post_init__(self):
        if not is_probable_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    def __call__(self, value: int | FieldElement) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.field.p != self.p:
                raise FieldMismatch(f"element of F_{value.field.p} used in F_{self.p}")
            return value
        return FieldElement(value % self.p, self)

    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    def one(self) -> FieldElement:
        return FieldElement(1, self)

    def random(self, rng: random.Random, nonzero: bool = False) -> FieldElement:
        low = 1 if nonzero else 0
        return FieldElement(rng.randrange(low, self.p), self)

    @classmethod
    def generate(cls, bits: int, rng: random.Random | None = None) -> FieldParams:
        return cls(random_prime(bits, rng))


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: FieldParams

    def __post_init__(self):
        if not 0 <= self.value < self.field.p:
            raise ValueError(f"{self.value} not in [0, {self.field.p})")

    def __repr__(self):
        return f"FieldElement({self.value}, p={self.field.p})"

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __hash__(self):
        return hash((self.value, self.field.p))

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field.p != self.field.p:
                raise FieldMismatch(f"F_{self.field.p} vs F_{other.field.p}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def _new(self, value: int) -> FieldElement:
        return FieldElement(value % self.field.p, self.field)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.field.p == other.field.p
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._new(self.value * inv_mod(o, self.field.p))

    def __pow__(self, exp: int):
        if exp < 0:
            return self.inv() ** -exp
        return self._new(pow(self.value, exp, self.field.p))

    def __bool__(self):
        return self.value != 0

    def inv(self) -> FieldElement:
        return self._new(inv_mod(self.value, self.field.p))


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inv()

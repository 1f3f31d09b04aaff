"""Polynomials over F_p in coefficient form and point-value form.

Coefficient lists are stored low-degree first as plain ints in ``[0, p)``.
Root extraction follows the usual route for a prime field: gcds of ``f``
with ``x^((p-1)/2) -+ 1`` isolate the distinct linear factors, which are then
split further with random shifts ``(x + delta)^((p-1)/2) - 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2

from .errors import FieldMismatch, RootFindingError
from .field import FieldElement, FieldParams, inv_mod

MAX_SPLITS = 64


def _powmod(a: int, e: int, p: int) -> int:
    return int(gmpy2.powmod(a, e, p))


def _strip(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _as_int(v, p: int) -> int:
    if isinstance(v, FieldElement):
        if v.field.p != p:
            raise FieldMismatch(f"F_{v.field.p} vs F_{p}")
        return v.value
    return int(v) % p


@dataclass(frozen=True)
class DensePoly:
    """Polynomial in coefficient form; ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: tuple[int, ...]
    field: FieldParams

    def __post_init__(self):
        p = self.field.p
        c = _strip([_as_int(v, p) for v in self.coeffs])
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_roots(cls, roots: Iterable, field: FieldParams, scale=1) -> DensePoly:
        p = field.p
        c = [_as_int(scale, p)]
        for r in roots:
            c = _mul(c, [(-_as_int(r, p)) % p, 1], p)
        return cls(tuple(c), field)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def coefficients(self) -> list[FieldElement]:
        return [self.field(c) for c in self.coeffs]

    def coefficient(self, k: int) -> FieldElement:
        return self.field(self.coeffs[k] if k < len(self.coeffs) else 0)

    @property
    def constant_term(self) -> FieldElement:
        return self.coefficient(0)

    def __call__(self, x) -> FieldElement:
        return evaluate(self, x)

    def _check(self, other: DensePoly) -> int:
        if other.field.p != self.field.p:
            raise FieldMismatch(f"F_{self.field.p} vs F_{other.field.p}")
        return self.field.p

    def __add__(self, other: DensePoly) -> DensePoly:
        p = self._check(other)
        return DensePoly(tuple(_add(list(self.coeffs), list(other.coeffs), p)), self.field)

    def __sub__(self, other: DensePoly) -> DensePoly:
        p = self._check(other)
        neg = [(-c) % p for c in other.coeffs]
        return DensePoly(tuple(_add(list(self.coeffs), neg, p)), self.field)

    def __mul__(self, other):
        if isinstance(other, DensePoly):
            p = self._check(other)
            return DensePoly(tuple(_mul(list(self.coeffs), list(other.coeffs), p)), self.field)
        s = _as_int(other, self.field.p)
        return DensePoly(tuple(c * s for c in self.coeffs), self.field)

    __rmul__ = __mul__

    def __divmod__(self, other: DensePoly):
        p = self._check(other)
        q, r = _divmod(list(self.coeffs), list(other.coeffs), p)
        return DensePoly(tuple(q), self.field), DensePoly(tuple(r), self.field)

    def __repr__(self):
        return f"DensePoly({list(self.coeffs)}, p={self.field.p})"


@dataclass(frozen=True)
class PointValuePoly:
    """A polynomial given by its values ``ys[i]`` at distinct nonzero ``xs[i]``."""

    xs: tuple[int, ...]
    ys: tuple[int, ...]
    field: FieldParams

    def __post_init__(self):
        p = self.field.p
        xs = tuple(_as_int(x, p) for x in self.xs)
        ys = tuple(_as_int(y, p) for y in self.ys)
        if len(xs) != len(ys) or not xs:
            raise ValueError("xs and ys must be non-empty and of equal length")
        if len(set(xs)) != len(xs):
            raise ValueError("duplicate x-coordinates")
        if 0 in xs:
            raise ValueError("x-coordinates must be nonzero")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def sample(cls, poly: DensePoly, xs: Sequence) -> PointValuePoly:
        p = poly.field.p
        xs = [_as_int(x, p) for x in xs]
        return cls(tuple(xs), tuple(_horner(poly.coeffs, x, p) for x in xs), poly.field)

    def __len__(self):
        return len(self.xs)


# ---------------------------------------------------------------- operations

def evaluate(poly: DensePoly, x) -> FieldElement:
    p = poly.field.p
    return poly.field(_horner(poly.coeffs, _as_int(x, p), p))


def interpolate(points: PointValuePoly) -> DensePoly:
    """Lagrange interpolation: the unique poly of degree < len(points)."""
    p = points.field.p
    xs, ys = points.xs, points.ys
    # master(x) = prod (x - x_j); each basis numerator is master / (x - x_i)
    master = [1]
    for xj in xs:
        master = _mul(master, [(-xj) % p, 1], p)
    n = len(xs)
    out = [0] * n
    for i, xi in enumerate(xs):
        if ys[i] == 0:
            continue
        num = _div_linear(master, xi, p)
        denom = _horner(num, xi, p)
        scale = ys[i] * inv_mod(denom, p) % p
        for k in range(n):
            out[k] += scale * num[k]
    return DensePoly(tuple(c % p for c in out), points.field)


def pointwise_combine(coeffs: Sequence, polys: Sequence[PointValuePoly]) -> PointValuePoly:
    """Linear combination of point-value polynomials sharing one x-grid."""
    if not polys or len(coeffs) != len(polys):
        raise ValueError("need one coefficient per polynomial")
    field = polys[0].field
    p = field.p
    xs = polys[0].xs
    for q in polys[1:]:
        if q.xs != xs or q.field.p != p:
            raise ValueError("mismatched x-grids")
    cs = [_as_int(c, p) for c in coeffs]
    ys = tuple(sum(c * q.ys[i] for c, q in zip(cs, polys)) % p for i in range(len(xs)))
    return PointValuePoly(xs, ys, field)


def find_roots(poly: DensePoly, rng: random.Random | None = None) -> frozenset[FieldElement]:
    """All distinct roots of ``poly`` in F_p."""
    if poly.is_zero():
        raise ValueError("the zero polynomial has every element as a root")
    field, p = poly.field, poly.field.p
    if poly.degree == 0:
        return frozenset()
    if p < 64:
        return frozenset(field(a) for a in range(p) if _horner(poly.coeffs, a, p) == 0)
    rng = rng or random.Random()
    f = _monic(list(poly.coeffs), p)
    roots = set()
    if f[0] == 0:
        roots.add(0)
        while f[0] == 0:
            f = f[1:]
    if len(f) == 2:
        roots.add((-f[0]) % p)
    elif len(f) == 3:
        roots.update(_quadratic_roots(f, p))
    elif len(f) > 3:
        # x^((p-1)/2) is 1 on residues and -1 on non-residues, so the two gcds
        # keep only distinct linear factors and already split them in two
        h = _ModRing(f, p).pow_y((p - 1) // 2)
        pieces = []
        for sign in (1, -1):
            g = list(h)
            g[0] = (g[0] - sign) % p
            pieces.append(_gcd(f, _strip(g), p))
        _split(pieces, p, rng, roots)
    return frozenset(field(r) for r in roots)


def _split(pieces: list[list[int]], p: int, rng: random.Random, out: set) -> None:
    # every piece is monic and a product of distinct linear factors; squaring
    # cost grows faster than the degree, so pieces are split one at a time
    half = (p - 1) // 2
    stack = list(pieces)
    while stack:
        g = stack.pop()
        if len(g) == 2:
            out.add((-g[0]) % p)
            continue
        if len(g) == 3:
            out.update(_quadratic_roots(g, p))
            continue
        if len(g) < 2:
            continue
        for _ in range(MAX_SPLITS):
            # (x + delta)^e mod g(x) is y^e mod g(y - delta) with y = x + delta
            delta = rng.randrange(p)
            h = _ModRing(_taylor_shift(g, -delta, p), p).pow_y(half)
            h = _taylor_shift(h, delta, p)
            h[0] = (h[0] - 1) % p
            s = _gcd(g, _strip(h), p)
            if 1 < len(s) < len(g):
                stack += [s, _divmod(g, s, p)[0]]
                break
        else:
            raise RootFindingError(f"no split of a degree-{len(g) - 1} factor after {MAX_SPLITS} tries")


def _quadratic_roots(f: list[int], p: int) -> set[int]:
    c, b = f[0], f[1]
    disc = (b * b - 4 * c) % p
    s = sqrt_mod(disc, p)
    if s is None:
        return set()
    half = inv_mod(2, p)
    return {(-b + s) * half % p, (-b - s) * half % p}


def sqrt_mod(a: int, p: int) -> int | None:
    """Tonelli-Shanks square root modulo an odd prime, ``None`` for non-residues."""
    a %= p
    if a == 0:
        return 0
    if _powmod(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return _powmod(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while _powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, _powmod(z, q, p), _powmod(a, q, p), _powmod(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = _powmod(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


# ---------------------------------------------------------- list arithmetic

def _horner(c: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for a in reversed(c):
        acc = (acc * x + a) % p
    return acc


def _add(a: list[int], b: list[int], p: int) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, v in enumerate(b):
        out[i] = (out[i] + v) % p
    return _strip(out)


def _mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _strip([v % p for v in out])


def _divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db = len(b) - 1
    lead_inv = inv_mod(b[-1], p)
    if len(r) <= db:
        return [], _strip(r)
    q = [0] * (len(r) - db)
    for k in range(len(r) - 1, db - 1, -1):
        c = r[k] % p * lead_inv % p
        if c:
            q[k - db] = c
            for j in range(db + 1):
                r[k - db + j] -= c * b[j]
    return _strip(q), _strip([v % p for v in r[:db]])


def _div_linear(a: list[int], root: int, p: int) -> list[int]:
    """Synthetic division of ``a`` by ``x - root`` (remainder discarded)."""
    n = len(a) - 1
    q = [0] * n
    carry = 0
    for k in range(n, 0, -1):
        carry = (a[k] + carry * root) % p
        q[k - 1] = carry
    return q


def _taylor_shift(a: list[int], c: int, p: int) -> list[int]:
    """Coefficients of ``a(x + c)``."""
    out = list(a)
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] = (out[j] + c * out[j + 1]) % p
    return out


def _monic(a: list[int], p: int) -> list[int]:
    inv = inv_mod(a[-1], p)
    return [c * inv % p for c in a]


def _gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _monic(a, p), b
    while b:
        b = _monic(b, p)
        a, b = b, _divmod(a, b, p)[1]
    return a


class _ModRing:
    """F_p[y] / (f) for monic ``f`` of degree ``d >= 2``, Kronecker-packed.

    A residue is one ``mpz`` holding ``d`` coefficient slots of ``sw`` bits,
    each in Montgomery form (scaled by ``2^R``) and lazily reduced to
    ``[0, 2p)``.  All slots are Montgomery-reduced at once with two masked
    multiplications, and reduction modulo ``f`` folds each high coefficient
    into a precomputed row ``y^(d+k) mod f``.  Only powers of ``y`` are
    needed by root finding, and multiplying by ``y`` is a slot shift folded
    into the squaring.
    """

    def __init__(self, f: list[int], p: int):
        d = len(f) - 1
        self.p, self.d = p, d
        # 2^R >= 6 d p keeps every reduced slot below 2p
        self.r = r = p.bit_length() + (6 * d).bit_length()
        self.sw = sw = 2 * r
        self.mp = gmpy2.mpz(p)
        self.pinv = gmpy2.mpz((-pow(p, -1, 1 << r)) % (1 << r))
        self.one = (1 << r) % p
        self.r_inv = inv_mod(self.one, p)
        self.low_mask = gmpy2.mpz((1 << (d * sw)) - 1)
        self.slot_mask = (1 << sw) - 1
        self.slot = gmpy2.mpz(self.slot_mask)
        self.r_masks = {}
        # rows[k] = y^(d+k) mod f, each one y times the previous
        row = [(-c) % p for c in f[:d]]
        rows = [row]
        for _ in range(d - 1):
            lead = row[-1]
            row = [(lo - lead * c) % p for lo, c in zip([0] + row[:-1], f)]
            rows.append(row)
        self.rows = [self.to_packed(r) for r in rows]

    def to_packed(self, c: Sequence[int]) -> gmpy2.mpz:
        acc, sw, one, p = 0, self.sw, self.one, self.p
        for v in reversed(c):
            acc = (acc << sw) | (v * one % p)
        return gmpy2.mpz(acc)

    def from_packed(self, n) -> list[int]:
        sw, mask, p, ri = self.sw, self.slot_mask, self.p, self.r_inv
        return [int((n >> (i * sw)) & mask) * ri % p for i in range(self.d)]

    def _redc(self, v, slots: int):
        mask = self.r_masks.get(slots)
        if mask is None:
            one, mask = (1 << self.r) - 1, 0
            for _ in range(slots):
                mask = (mask << self.sw) | one
            mask = self.r_masks[slots] = gmpy2.mpz(mask)
        m = ((v & mask) * self.pinv) & mask
        return (v + m * self.mp) >> self.r

    def square(self, a, shift: bool = False):
        """``a^2 mod f``, or ``y * a^2 mod f`` when ``shift`` is set."""
        d, sw = self.d, self.sw
        s = a * a
        k = d - 1
        if shift:
            s <<= sw
            k = d
        top = self._redc(s >> (d * sw), k)
        acc, slot = s & self.low_mask, self.slot
        for row in self.rows[:k]:
            acc += (top & slot) * row
            top >>= sw
        return self._redc(acc, d)

    def pow_y(self, e: int) -> list[int]:
        """``y^e mod f`` as a list of ``d`` reduced coefficients."""
        if e == 0:
            return [1] + [0] * (self.d - 1)
        acc = self.to_packed([0, 1])
        for bit in bin(e)[3:]:
            acc = self.square(acc, bit == "1")
        return self.from_packed(acc)

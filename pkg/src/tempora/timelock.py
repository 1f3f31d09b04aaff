"""RSA-group time-lock core.

The puzzle creator knows phi(N) and reaches ``r^(2^T) mod N`` with one short
exponentiation; everybody else has to square ``T`` times in a row.  The
baseline puzzle at the bottom hides a symmetric key behind that value.
"""

from __future__ import annotations

import logging
import math
import os
import random
from dataclasses import dataclass
from typing import Callable

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import InvalidKey, InvalidParameters, SolveCancelled, TamperDetected
from .field import is_probable_prime, pow_mod, random_prime

log = logging.getLogger(__name__)

DEFAULT_PRIME_BITS = 1024
DEFAULT_PROGRESS_EVERY = 1 << 12


@dataclass(frozen=True)
class ClientKeys:
    """RSA modulus with its secret totient.  Only ``N`` is ever published."""

    N: int
    phi: int
    p1: int = 0
    p2: int = 0

    @classmethod
    def from_primes(cls, p1: int, p2: int) -> ClientKeys:
        if p1 == p2:
            raise InvalidKey("the two RSA primes must differ")
        for q in (p1, p2):
            if not is_probable_prime(q):
                raise InvalidKey(f"{q} is not prime")
        return cls(p1 * p2, (p1 - 1) * (p2 - 1), p1, p2)

    def __post_init__(self):
        if self.p1 and self.p2 and (self.N != self.p1 * self.p2 or self.phi != (self.p1 - 1) * (self.p2 - 1)):
            raise InvalidKey("N or phi does not match the stored primes")

    def public(self) -> int:
        return self.N


def keygen(rng: random.Random | None = None, bits: int = DEFAULT_PRIME_BITS) -> ClientKeys:
    """Fresh keys with two ``bits``-bit primes."""
    if bits < 8:
        raise InvalidParameters("prime size below 8 bits")
    rng = rng or random.SystemRandom()
    p1 = random_prime(bits, rng)
    p2 = random_prime(bits, rng)
    while p2 == p1:
        p2 = random_prime(bits, rng)
    return ClientKeys.from_primes(p1, p2)


@dataclass(frozen=True)
class TimelockParams:
    """``T = max_ss * delta``: squarings per second times seconds."""

    max_ss: int
    delta: int

    def __post_init__(self):
        if self.max_ss < 1 or self.delta < 1:
            raise InvalidParameters("max_ss and delta must be positive")

    @property
    def T(self) -> int:
        return self.max_ss * self.delta


def _check_base(r: int, N: int):
    if not 0 < r < N:
        raise InvalidParameters(f"base must lie in (0, N), got {r}")


def sample_base(N: int, rng: random.Random) -> int:
    r = rng.randrange(2, N - 1)
    if math.gcd(r, N) != 1:
        log.warning("sampled base shares a factor with N")
    return r


def trapdoor_power(r: int, T: int, keys: ClientKeys) -> int:
    """``r^(2^T) mod N`` via ``a = 2^T mod phi``."""
    _check_base(r, keys.N)
    if T < 0:
        raise InvalidParameters("T must be non-negative")
    a = pow_mod(2, T, keys.phi)
    return pow_mod(r, a, keys.N)


def sequential_power(r: int, T: int, N: int,
                     progress: Callable[[int], object] | None = None,
                     every: int = DEFAULT_PROGRESS_EVERY) -> int:
    """Square ``r`` modulo ``N`` exactly ``T`` times.

    ``progress(done)`` is called every ``every`` squarings and once at the end;
    returning ``False`` from it cancels the run with :class:`SolveCancelled`.
    """
    _check_base(r, N)
    if T < 0:
        raise InvalidParameters("T must be non-negative")
    x = r
    done = 0
    while done < T:
        step = min(every, T - done)
        for _ in range(step):
            x = x * x % N
        done += step
        if progress is not None and progress(done) is False:
            raise SolveCancelled(f"stopped after {done} of {T} squarings")
    return x


# ------------------------------------------------------------ baseline puzzle

@dataclass(frozen=True)
class BaselinePuzzle:
    o1: bytes  # nonce || AES-GCM ciphertext
    o2: int
    T: int
    r: int
    N: int


def baseline_gen_puzzle(message: bytes, keys: ClientKeys, T: int,
                        rng: random.Random | None = None) -> BaselinePuzzle:
    """Encrypt ``message`` under a fresh key ``k`` and lock ``k`` as ``k + r^(2^T) mod N``."""
    if keys.N.bit_length() <= 256:
        raise InvalidParameters("N must exceed 2^256 to carry a 256-bit key")
    rng = rng or random.SystemRandom()
    k = rng.getrandbits(256)
    nonce = rng.getrandbits(96).to_bytes(12, "big") if not isinstance(rng, random.SystemRandom) else os.urandom(12)
    o1 = nonce + AESGCM(k.to_bytes(32, "big")).encrypt(nonce, message, None)
    r = sample_base(keys.N, rng)
    b = trapdoor_power(r, T, keys)
    return BaselinePuzzle(o1, (k + b) % keys.N, T, r, keys.N)


def baseline_solve(puzzle: BaselinePuzzle, progress=None) -> bytes:
    b = sequential_power(puzzle.r, puzzle.T, puzzle.N, progress)
    k = (puzzle.o2 - b) % puzzle.N
    if k >= 1 << 256:
        raise TamperDetected("recovered key is out of range")
    nonce, body = puzzle.o1[:12], puzzle.o1[12:]
    try:
        return AESGCM(k.to_bytes(32, "big")).decrypt(nonce, body, None)
    except InvalidTag:
        raise TamperDetected("authenticated decryption failed") from None


def baseline_rsa_tlp_roundtrip(message: bytes, keys: ClientKeys, T: int, rng=None) -> bytes:
    return baseline_solve(baseline_gen_puzzle(message, keys, T, rng))

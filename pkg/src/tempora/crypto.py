"""Keyed PRF into F_p, the hash G, and a hash-based commitment.

Every integer fed to a hash goes through :func:`encode`: big-endian bytes
with a 4-byte length prefix, and tuples are the concatenation of their
parts.  Changing this encoding changes every derived key, so it is fixed.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from .field import FieldElement, FieldParams

DIGEST_SIZE = 32


def _int_bytes(n: int) -> bytes:
    if n < 0:
        raise ValueError("only non-negative integers have a canonical encoding")
    return n.to_bytes(max(1, (n.bit_length() + 7) // 8), "big")


def encode(*parts) -> bytes:
    """Length-prefixed concatenation of ints, field elements and byte strings."""
    out = bytearray()
    for part in parts:
        if isinstance(part, FieldElement):
            part = part.value
        if isinstance(part, bool):
            part = int(part)
        if isinstance(part, int):
            raw = _int_bytes(part)
        elif isinstance(part, (bytes, bytearray)):
            raw = bytes(part)
        else:
            raise TypeError(f"cannot encode {type(part).__name__}")
        out += len(raw).to_bytes(4, "big") + raw
    return bytes(out)


@dataclass(frozen=True)
class PrfKey:
    key: bytes

    def __post_init__(self):
        if not self.key:
            raise ValueError("empty PRF key")

    @classmethod
    def from_int(cls, value) -> PrfKey:
        return cls(encode(int(value)))

    def hex(self) -> str:
        return self.key.hex()


def _as_key(key) -> bytes:
    if isinstance(key, PrfKey):
        return key.key
    if isinstance(key, (bytes, bytearray)):
        return bytes(key)
    return encode(int(key))


def prf(data, key, field: FieldParams) -> FieldElement:
    """HMAC-SHA512 stretched to 2*bits(p) bits, reduced mod p.

    ``data`` may be bytes, an int, or a tuple of ints/bytes (``j || 0`` is
    ``(j, 0)``).  ``key`` may be a :class:`PrfKey`, bytes, or an int.
    """
    if isinstance(data, tuple):
        msg = encode(*data)
    elif isinstance(data, (bytes, bytearray)):
        msg = bytes(data)
    else:
        msg = encode(data)
    k = _as_key(key)
    need = (2 * field.p.bit_length() + 7) // 8
    stream = b""
    ctr = 0
    while len(stream) < need:
        stream += hmac.new(k, ctr.to_bytes(4, "big") + msg, hashlib.sha512).digest()
        ctr += 1
    return field(int.from_bytes(stream[:need], "big"))


def prf_derive_pair(mk, field: FieldParams) -> tuple[PrfKey, PrfKey]:
    """Two keys ``k = PRF(1, mk)`` and ``s = PRF(2, mk)``."""
    k = prf(1, mk, field)
    s = prf(2, mk, field)
    return PrfKey.from_int(k.value), PrfKey.from_int(s.value)


def hash_g(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class Commitment:
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != DIGEST_SIZE:
            raise ValueError(f"commitment digest must be {DIGEST_SIZE} bytes")

    def hex(self) -> str:
        return self.digest.hex()

    @classmethod
    def from_hex(cls, text: str) -> Commitment:
        return cls(bytes.fromhex(text))


def commit(message, randomness) -> Commitment:
    return Commitment(hashlib.sha256(encode(int(message), int(randomness))).digest())


def verify_commit(com: Commitment, message, randomness) -> bool:
    try:
        other = commit(message, randomness)
    except (TypeError, ValueError):
        return False
    return hmac.compare_digest(com.digest, other.digest)

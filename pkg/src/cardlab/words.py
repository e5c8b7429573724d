"""Fixed-width words, the encodings that map protocol values onto them, and f.

Every quantity the two card schemes hash or XOR (x, b, R, V, PW_S, C1, C2,
C3) is a :class:`Word`.  The width W is a per-scenario setting; all words in
one computation must share it.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

DEFAULT_WIDTH = 256
MIN_WIDTH = 64  # room for an 8-byte timestamp and a 4-byte counter
HASH_NAME = "sha256"

_COUNTER_BYTES = 4
_TIMESTAMP_BYTES = 8
_U32_MAX = 2**32 - 1
_U64_MAX = 2**64 - 1


class WidthError(ValueError):
    """Operands of different widths, or an unsupported width."""


class EncodingError(ValueError):
    """A value does not fit the word layout it is being encoded into."""


def check_width(width: int) -> int:
    if width % 8 or width < MIN_WIDTH:
        raise WidthError(f"width must be a multiple of 8 and >= {MIN_WIDTH}, got {width}")
    return width


@dataclass(frozen=True, slots=True)
class Word:
    data: bytes

    def __post_init__(self):
        if not isinstance(self.data, bytes):
            raise TypeError(f"Word data must be bytes, not {type(self.data).__name__}")
        check_width(len(self.data) * 8)

    @property
    def width(self) -> int:
        return len(self.data) * 8

    @classmethod
    def zero(cls, width: int = DEFAULT_WIDTH) -> Word:
        return cls(bytes(check_width(width) // 8))

    @classmethod
    def fromhex(cls, text: str) -> Word:
        return cls(bytes.fromhex(text))

    def hex(self) -> str:
        return self.data.hex()

    def popcount(self) -> int:
        return int.from_bytes(self.data, "big").bit_count()

    def __xor__(self, other: Word) -> Word:
        return xor(self, other)

    def __repr__(self):
        return f"Word({self.width}:{self.data.hex()})"


def xor(a: Word, b: Word) -> Word:
    n = len(a.data)
    if len(b.data) != n:
        raise WidthError(f"cannot xor {a.width}-bit and {b.width}-bit words")
    return Word((int.from_bytes(a.data, "big") ^ int.from_bytes(b.data, "big")).to_bytes(n, "big"))


def f(w: Word) -> Word:
    """One-way function: SHA-256 of the word bytes, cut or zero-extended to W."""
    n = len(w.data)
    digest = hashlib.sha256(w.data).digest()
    if n <= len(digest):
        return Word(digest[:n])
    return Word(digest + bytes(n - len(digest)))


def as_bytes(value: bytes | str) -> bytes:
    if isinstance(value, str):
        return value.encode("utf-8")
    return bytes(value)


def check_identity(ident: bytes | str, width: int = DEFAULT_WIDTH) -> bytes:
    name = as_bytes(ident)
    limit = check_width(width) // 8 - _COUNTER_BYTES
    if not name:
        raise EncodingError("identity must be nonempty")
    if len(name) > limit:
        raise EncodingError(f"identity is {len(name)} bytes, at most {limit} fit a {width}-bit EID")
    if name.endswith(b"\x00"):
        # would alias the zero padding
        raise EncodingError("identity must not end in a NUL byte")
    return name


def check_password(pw: bytes | str, width: int = DEFAULT_WIDTH) -> bytes:
    secret = as_bytes(pw)
    limit = check_width(width) // 8
    if not secret:
        raise EncodingError("password must be nonempty")
    if len(secret) > limit:
        raise EncodingError(f"password is {len(secret)} bytes, at most {limit} fit a {width}-bit word")
    if secret.endswith(b"\x00"):
        raise EncodingError("password must not end in a NUL byte")
    return secret


def check_counter(n: int) -> int:
    if not 0 <= n <= _U32_MAX:
        raise EncodingError(f"registration counter {n} is not an unsigned 32-bit value")
    return n


def check_timestamp(t: int) -> int:
    if not 0 <= t <= _U64_MAX:
        raise EncodingError(f"timestamp {t} is not an unsigned 64-bit value")
    return t


def encode_eid(ident: bytes | str, n: int, width: int = DEFAULT_WIDTH) -> Word:
    """EID = ID || n: identity bytes, zero padding, then n as 4 big-endian bytes."""
    name = check_identity(ident, width)
    body = width // 8 - _COUNTER_BYTES
    return Word(name.ljust(body, b"\x00") + check_counter(n).to_bytes(_COUNTER_BYTES, "big"))


def encode_password(pw: bytes | str, width: int = DEFAULT_WIDTH) -> Word:
    return Word(check_password(pw, width).ljust(width // 8, b"\x00"))


def encode_timestamp(t: int, width: int = DEFAULT_WIDTH) -> Word:
    raw = check_timestamp(t).to_bytes(_TIMESTAMP_BYTES, "big")
    return Word(raw.rjust(check_width(width) // 8, b"\x00"))


def random_word(rng: random.Random, width: int = DEFAULT_WIDTH) -> Word:
    return Word(rng.randbytes(check_width(width) // 8))

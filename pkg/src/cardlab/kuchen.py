"""Ku-Chen smart-card remote user authentication.

The card holds R = f(EID ^ x) ^ f(b ^ PW) and the user's random b.  Login
sends C2 = f(C1 ^ T_U) where C1 = R ^ f(b ^ PW); the server recomputes
f(EID ^ x) and answers with C3 = f(f(EID ^ x) ^ T_S).

Password change on this card is unchecked: whatever is typed as the old
password is folded into R.  That behaviour is reproduced on purpose.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from cardlab.words import (
    Word,
    WidthError,
    check_identity,
    check_timestamp,
    encode_eid,
    encode_password,
    encode_timestamp,
    f,
    xor,
)

DEFAULT_FRESHNESS = 60


class Reason(enum.Enum):
    UNKNOWN_IDENTITY = "UnknownIdentity"
    STALE_TIMESTAMP = "StaleTimestamp"
    BAD_AUTHENTICATOR = "BadAuthenticator"
    REFLECTED_TIMESTAMP = "ReflectedTimestamp"

    def __str__(self):
        return self.value


@dataclass
class SmartCardKuChen:
    R: Word
    b: Word
    readable: bool = True


@dataclass
class ServerState:
    x: Word
    accounts: dict[bytes, int] = field(default_factory=dict)
    freshness_delta: int = DEFAULT_FRESHNESS
    last_now: int = 0

    @property
    def width(self) -> int:
        return self.x.width

    def enroll(self, ident: bytes | str) -> tuple[bytes, int]:
        """Create the account (n = 0) or bump its counter; return (id, n)."""
        name = check_identity(ident, self.width)
        n = self.accounts[name] + 1 if name in self.accounts else 0
        self.accounts[name] = n
        return name, n

    def identity_key(self, name: bytes, n: int) -> Word:
        return f(xor(encode_eid(name, n, self.width), self.x))


@dataclass(frozen=True)
class LoginRequest:
    id: bytes
    c2: Word
    t_u: int


@dataclass(frozen=True)
class AuthResponse:
    c3: Word
    t_s: int


@dataclass(frozen=True)
class UserSession:
    c1: Word
    t_u: int


@dataclass(frozen=True)
class ServerVerdict:
    accepted: bool
    response: AuthResponse | None = None
    reason: Reason | None = None


@dataclass(frozen=True)
class UserVerdict:
    accepted: bool
    reason: Reason | None = None


def password_digest(b: Word, pw: bytes | str) -> Word:
    """PW_S = f(b ^ PW)."""
    return f(xor(b, encode_password(pw, b.width)))


def issue_secret(server: ServerState, ident: bytes | str, pw_s: Word) -> tuple[bytes, int, Word, Word]:
    """Server side of registration: returns (id, n, f(EID ^ x), R)."""
    if pw_s.width != server.width:
        raise WidthError(f"PW_S is {pw_s.width} bits, server words are {server.width}")
    name, n = server.enroll(ident)
    key = server.identity_key(name, n)
    return name, n, key, xor(key, pw_s)


def kc_register(server: ServerState, ident: bytes | str, pw: bytes | str, b: Word) -> SmartCardKuChen:
    pw_s = password_digest(b, pw)  # computed user-side; the server never sees pw
    _, _, _, R = issue_secret(server, ident, pw_s)
    return SmartCardKuChen(R=R, b=b)


def card_login(R: Word, b: Word, pw: bytes | str, ident: bytes | str, t_u: int) -> tuple[LoginRequest, UserSession]:
    c1 = xor(R, password_digest(b, pw))
    c2 = f(xor(c1, encode_timestamp(t_u, R.width)))
    return LoginRequest(check_identity(ident, R.width), c2, t_u), UserSession(c1, t_u)


def kc_login(card: SmartCardKuChen, pw: bytes | str, ident: bytes | str, t_u: int) -> tuple[LoginRequest, UserSession]:
    return card_login(card.R, card.b, pw, ident, t_u)


def kc_verify(server: ServerState, req: LoginRequest, t_s: int) -> ServerVerdict:
    check_timestamp(t_s)
    if t_s < server.last_now:
        raise ValueError(f"server clock went backwards: {t_s} < {server.last_now}")
    server.last_now = t_s

    n = server.accounts.get(req.id)
    if n is None:
        return ServerVerdict(False, reason=Reason.UNKNOWN_IDENTITY)
    # no replay cache: only the window bounds the age of T_U
    if not t_s - server.freshness_delta <= req.t_u <= t_s:
        return ServerVerdict(False, reason=Reason.STALE_TIMESTAMP)
    key = server.identity_key(req.id, n)
    if req.c2 != f(xor(key, encode_timestamp(req.t_u, server.width))):
        return ServerVerdict(False, reason=Reason.BAD_AUTHENTICATOR)
    c3 = f(xor(key, encode_timestamp(t_s, server.width)))
    return ServerVerdict(True, response=AuthResponse(c3, t_s))


def kc_user_verify(session: UserSession, resp: AuthResponse) -> UserVerdict:
    if resp.t_s == session.t_u:
        return UserVerdict(False, Reason.REFLECTED_TIMESTAMP)
    if resp.c3 != f(xor(session.c1, encode_timestamp(resp.t_s, session.c1.width))):
        return UserVerdict(False, Reason.BAD_AUTHENTICATOR)
    return UserVerdict(True)


def kc_change_password(card: SmartCardKuChen, pw_old: bytes | str, pw_new: bytes | str) -> None:
    # no check of pw_old against anything; the card has nothing to check it with
    card.R = xor(xor(card.R, password_digest(card.b, pw_old)), password_digest(card.b, pw_new))

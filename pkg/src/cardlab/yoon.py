"""Yoon-Ryu-Yoo variant of the Ku-Chen scheme.

Login and server verification are unchanged.  The card additionally stores
V = f(EID ^ x) and refuses a password change unless R ^ f(b ^ PW_old) == V.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from cardlab.kuchen import (
    AuthResponse,
    LoginRequest,
    ServerState,
    UserSession,
    UserVerdict,
    ServerVerdict,
    card_login,
    issue_secret,
    kc_user_verify,
    kc_verify,
    password_digest,
)
from cardlab.words import Word, xor


class Change(enum.Enum):
    CHANGED = "Changed"
    REJECTED = "Rejected"

    def __str__(self):
        return self.value


@dataclass
class SmartCardYoon:
    V: Word
    R: Word
    b: Word
    readable: bool = True


@dataclass(frozen=True)
class RegistrationRecord:
    """What an insider at the server sees while a user registers."""

    id: bytes
    pw_s: Word
    V: Word
    R: Word
    n: int


def yn_register(
    server: ServerState, ident: bytes | str, pw: bytes | str, b: Word
) -> tuple[SmartCardYoon, RegistrationRecord]:
    pw_s = password_digest(b, pw)
    name, n, V, R = issue_secret(server, ident, pw_s)
    return SmartCardYoon(V=V, R=R, b=b), RegistrationRecord(name, pw_s, V, R, n)


def yn_login(card: SmartCardYoon, pw: bytes | str, ident: bytes | str, t_u: int) -> tuple[LoginRequest, UserSession]:
    return card_login(card.R, card.b, pw, ident, t_u)


def yn_verify(server: ServerState, req: LoginRequest, t_s: int) -> ServerVerdict:
    return kc_verify(server, req, t_s)


def yn_user_verify(session: UserSession, resp: AuthResponse) -> UserVerdict:
    return kc_user_verify(session, resp)


def yn_change_password_raw(card: SmartCardYoon, old_digest: Word, new_digest: Word) -> Change:
    """Password change driven by digests instead of typed passwords.

    This is the card-side logic a terminal reaches when it feeds f(b ^ PW)
    values directly; any value equal to V ^ R passes the check.
    """
    v_star = xor(card.R, old_digest)
    if v_star != card.V:
        return Change.REJECTED
    card.R = xor(v_star, new_digest)
    return Change.CHANGED


def yn_change_password_keyed(card: SmartCardYoon, pw_old: bytes | str, pw_new: bytes | str) -> Change:
    return yn_change_password_raw(card, password_digest(card.b, pw_old), password_digest(card.b, pw_new))

"""Deterministic simulation: logical clock, tappable channel, transcript.

A scenario owns one :class:`Clock`, one :class:`Transcript` and one
:class:`Channel` between the user terminal and the server.  Everything runs
on a single logical timeline; "parallel" sessions are interleavings.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple

from cardlab import kuchen, yoon
from cardlab.kuchen import (
    AuthResponse,
    LoginRequest,
    ServerState,
    ServerVerdict,
    UserSession,
    UserVerdict,
)
from cardlab.words import Word


class CapabilityError(RuntimeError):
    """The adversary used a channel tap that is disabled for this scenario."""


class EventKind(enum.Enum):
    SENT = "Sent"
    DELIVERED = "Delivered"
    OBSERVED = "Observed"
    DROPPED = "Dropped"
    INJECTED = "Injected"
    SERVER_ACCEPT = "ServerAccept"
    SERVER_REJECT = "ServerReject"
    USER_ACCEPT = "UserAccept"
    USER_REJECT = "UserReject"
    CARD_CHANGED = "CardChanged"
    CARD_REJECTED = "CardRejected"
    SECRETS_EXTRACTED = "SecretsExtracted"
    GUESS_FOUND = "GuessFound"
    GUESS_EXHAUSTED = "GuessExhausted"

    def __str__(self):
        return self.value


@dataclass
class Clock:
    now: int = 0
    step: int = 1

    def advance(self, ticks: int | None = None) -> int:
        ticks = self.step if ticks is None else ticks
        if ticks < 0:
            raise ValueError(f"cannot advance the clock by {ticks} ticks")
        self.now += ticks
        return self.now


def clock_advance(clock: Clock, ticks: int) -> int:
    return clock.advance(ticks)


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    at: int
    kind: EventKind
    payload: str


@dataclass
class Transcript:
    clock: Clock = field(default_factory=Clock)
    meta: dict[str, Any] = field(default_factory=dict)
    events: list[TranscriptEvent] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    def record(self, kind: EventKind, payload: str) -> TranscriptEvent:
        if not payload:
            raise ValueError(f"{kind} event needs a payload")
        event = TranscriptEvent(len(self.events) + 1, self.clock.now, kind, payload)
        self.events.append(event)
        return event

    def kinds(self) -> list[EventKind]:
        return [e.kind for e in self.events]

    def count(self, kind: EventKind) -> int:
        return sum(1 for e in self.events if e.kind is kind)


def render(value: Any) -> str:
    """Stable text form of a protocol value; words print as lowercase hex."""
    if isinstance(value, Word):
        return value.hex()
    if isinstance(value, LoginRequest):
        return f"LoginRequest id={value.id.hex()} c2={value.c2.hex()} t_u={value.t_u}"
    if isinstance(value, AuthResponse):
        return f"AuthResponse c3={value.c3.hex()} t_s={value.t_s}"
    if isinstance(value, bytes):
        return value.hex()
    return str(value)


class Scheme(NamedTuple):
    login: Callable[..., tuple[LoginRequest, UserSession]]
    verify: Callable[[ServerState, LoginRequest, int], ServerVerdict]
    user_verify: Callable[[UserSession, AuthResponse], UserVerdict]


SCHEMES = {
    "kuchen": Scheme(kuchen.kc_login, kuchen.kc_verify, kuchen.kc_user_verify),
    "yoon": Scheme(yoon.yn_login, yoon.yn_verify, yoon.yn_user_verify),
}


@dataclass(frozen=True)
class Envelope:
    src: str
    dst: str
    msg: LoginRequest | AuthResponse

    def __str__(self):
        return f"{self.src}->{self.dst} {render(self.msg)}"


class Channel:
    """In-order link between user terminal and server, with adversary taps."""

    def __init__(
        self,
        server: ServerState,
        clock: Clock,
        transcript: Transcript | None = None,
        *,
        scheme: str = "kuchen",
        latency: int = 1,
        observe: bool = True,
        drop: bool = True,
        inject: bool = True,
    ):
        if transcript is None:
            transcript = Transcript(clock)
        elif transcript.clock is not clock:
            raise ValueError("transcript must be stamped by the channel's clock")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        if latency < 0:
            raise ValueError("latency must be nonnegative")
        self.server = server
        self.clock = clock
        self.transcript = transcript
        self.scheme = scheme
        self.latency = latency
        self.taps = {"observe": observe, "drop": drop, "inject": inject}
        self.queue: deque[Envelope] = deque()
        self.crossed: list[Envelope] = []

    def _require(self, tap: str) -> None:
        if not self.taps[tap]:
            raise CapabilityError(f"adversary {tap} tap is disabled")

    def send(self, src: str, dst: str, msg: LoginRequest | AuthResponse) -> Envelope:
        env = Envelope(src, dst, msg)
        self.queue.append(env)
        self.crossed.append(env)
        self.transcript.record(EventKind.SENT, str(env))
        return env

    def deliver(self) -> Envelope:
        if not self.queue:
            raise RuntimeError("nothing in flight")
        env = self.queue.popleft()
        self.clock.advance(self.latency)
        self.transcript.record(EventKind.DELIVERED, str(env))
        return env

    def drop(self, env: Envelope | None = None) -> Envelope:
        """Remove ``env`` (default: the head of the queue) before delivery."""
        self._require("drop")
        if env is None:
            if not self.queue:
                raise RuntimeError("nothing in flight")
            env = self.queue[0]
        for i, queued in enumerate(self.queue):
            if queued is env:
                del self.queue[i]
                break
        else:
            raise ValueError("message is not in flight")
        self.transcript.record(EventKind.DROPPED, str(env))
        return env

    def in_flight(self) -> list[Envelope]:
        return list(self.queue)


def _record_server(channel: Channel, verdict: ServerVerdict, req: LoginRequest) -> None:
    if verdict.accepted:
        channel.transcript.record(EventKind.SERVER_ACCEPT, f"{render(req)} -> {render(verdict.response)}")
    else:
        channel.transcript.record(EventKind.SERVER_REJECT, f"{verdict.reason} {render(req)}")


def adversary_observe(channel: Channel) -> list[LoginRequest | AuthResponse]:
    channel._require("observe")
    seen = []
    for env in channel.crossed:
        channel.transcript.record(EventKind.OBSERVED, str(env))
        seen.append(env.msg)
    return seen


def adversary_inject(channel: Channel, msg: LoginRequest) -> ServerVerdict:
    """Open a fresh server session with ``msg`` at the current tick."""
    channel._require("inject")
    channel.transcript.record(EventKind.INJECTED, f"adversary->server {render(msg)}")
    verdict = SCHEMES[channel.scheme].verify(channel.server, msg, channel.clock.now)
    _record_server(channel, verdict, msg)
    if verdict.accepted:
        channel.send("server", "user", verdict.response)
    return verdict


@dataclass
class HonestOutcome:
    server: ServerVerdict
    user: UserVerdict | None
    events: list[TranscriptEvent]

    @property
    def accepted(self) -> bool:
        return self.server.accepted and self.user is not None and self.user.accepted

    @property
    def reason(self):
        if not self.server.accepted:
            return self.server.reason
        return self.user.reason if self.user else None


def user_send_login(
    channel: Channel, card, ident: bytes | str, pw: bytes | str
) -> tuple[LoginRequest, UserSession]:
    req, session = SCHEMES[channel.scheme].login(card, pw, ident, channel.clock.now)
    channel.send("user", "server", req)
    return req, session


def server_receive(channel: Channel) -> ServerVerdict:
    env = channel.deliver()
    if not isinstance(env.msg, LoginRequest):
        raise TypeError(f"server expected a LoginRequest, got {type(env.msg).__name__}")
    verdict = SCHEMES[channel.scheme].verify(channel.server, env.msg, channel.clock.now)
    _record_server(channel, verdict, env.msg)
    if verdict.accepted:
        channel.send("server", "user", verdict.response)
    return verdict


def user_receive(channel: Channel, session: UserSession) -> UserVerdict:
    env = channel.deliver()
    if not isinstance(env.msg, AuthResponse):
        raise TypeError(f"user expected an AuthResponse, got {type(env.msg).__name__}")
    verdict = SCHEMES[channel.scheme].user_verify(session, env.msg)
    if verdict.accepted:
        channel.transcript.record(EventKind.USER_ACCEPT, render(env.msg))
    else:
        channel.transcript.record(EventKind.USER_REJECT, f"{verdict.reason} {render(env.msg)}")
    return verdict


def run_honest_session(scheme: str, card, ident: bytes | str, pw: bytes | str, channel: Channel) -> HonestOutcome:
    """Login plus mutual authentication through ``channel``.

    Rejections are recorded and returned; nothing is raised for a failed run.
    """
    if scheme != channel.scheme:
        raise ValueError(f"channel runs {channel.scheme}, session asked for {scheme}")
    start = len(channel.transcript.events)
    _, session = user_send_login(channel, card, ident, pw)
    server = server_receive(channel)
    user = user_receive(channel, session) if server.accepted else None
    return HonestOutcome(server, user, channel.transcript.events[start:])

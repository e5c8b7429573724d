"""The published attacks on the Ku-Chen and Yoon cards, as runnable code.

Each attack returns an :class:`AttackVerdict` whose evidence points at the
transcript events that demonstrate the outcome.  Attacks that need to show a
lockout take a :class:`Victim` (the ground truth the scenario knows); the
attack logic itself never reads ``victim.password``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable

from cardlab.kuchen import AuthResponse, LoginRequest, SmartCardKuChen, kc_change_password
from cardlab.simnet import Channel, EventKind, Transcript, TranscriptEvent, adversary_inject, render, run_honest_session
from cardlab.words import (
    DEFAULT_WIDTH,
    EncodingError,
    Word,
    as_bytes,
    check_password,
    encode_password,
    encode_timestamp,
    f,
    xor,
)
from cardlab.yoon import Change, RegistrationRecord, SmartCardYoon, yn_change_password_keyed, yn_change_password_raw


class ExtractionBlocked(RuntimeError):
    """The card is tamper resistant; its secrets cannot be read out."""


class DictionaryError(ValueError):
    pass


@dataclass(frozen=True)
class BreachedSecrets:
    R: Word
    b: Word
    V: Word | None = None


@dataclass(frozen=True)
class Victim:
    ident: bytes
    password: bytes


@dataclass
class AttackVerdict:
    succeeded: bool
    evidence: list[TranscriptEvent] = field(default_factory=list)
    recovered_password: bytes | None = None
    candidates_tested: int = 0
    victim_locked_out: bool | None = None
    attacker_access: bool | None = None

    def __post_init__(self):
        if self.succeeded and not self.evidence:
            raise ValueError("a successful attack needs at least one evidence event")


def load_dictionary(path: str | os.PathLike, width: int = DEFAULT_WIDTH) -> list[bytes]:
    """Read one UTF-8 password per line; blank lines are skipped."""
    words = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip(b"\r\n")
            if not line:
                continue
            try:
                line.decode("utf-8")
                words.append(check_password(line, width))
            except (UnicodeDecodeError, EncodingError) as exc:
                raise DictionaryError(f"{path}:{lineno}: {exc}") from None
    return words


def extract_card_secrets(card: SmartCardKuChen | SmartCardYoon, transcript: Transcript | None = None) -> BreachedSecrets:
    """Side-channel readout, modelled as a switch on ``card.readable``."""
    if not card.readable:
        raise ExtractionBlocked("card does not leak its stored secrets")
    secrets = BreachedSecrets(R=card.R, b=card.b, V=getattr(card, "V", None))
    if transcript is not None:
        parts = [f"R={secrets.R.hex()}", f"b={secrets.b.hex()}"]
        if secrets.V is not None:
            parts.insert(0, f"V={secrets.V.hex()}")
        transcript.record(EventKind.SECRETS_EXTRACTED, " ".join(parts))
    return secrets


def attack_parallel_session(observed_response: AuthResponse, victim_id: bytes | str, channel: Channel) -> AttackVerdict:
    """Send the server's own (C3, T_S) back to it as a fresh login request.

    Success is the server accepting the forged request.  The server's reply to
    the forged session is then intercepted and dropped so it never reaches the
    victim's terminal.
    """
    start = len(channel.transcript.events)
    forged = LoginRequest(as_bytes(victim_id), observed_response.c3, observed_response.t_s)
    verdict = adversary_inject(channel, forged)
    if verdict.accepted and channel.taps["drop"]:
        reply = next(e for e in reversed(channel.queue) if e.msg == verdict.response)
        channel.drop(reply)
    return AttackVerdict(verdict.accepted, channel.transcript.events[start:])


def _login_as(card, ident: bytes, pw: bytes, channel: Channel):
    outcome = run_honest_session(channel.scheme, card, ident, pw, channel)
    return outcome.server.accepted, outcome.events


def _record_change(transcript: Transcript, result: Change, note: str) -> TranscriptEvent:
    kind = EventKind.CARD_CHANGED if result is Change.CHANGED else EventKind.CARD_REJECTED
    return transcript.record(kind, note)


def attack_kuchen_pwchange(card, guessed_pw: bytes | str, new_pw: bytes | str, *, channel: Channel, victim: Victim) -> AttackVerdict:
    """Overwrite the card's password with no knowledge of the real one.

    On a Ku-Chen card the change always goes through.  Given a Yoon card the
    same move runs through the V-checked keyed change.
    """
    guessed, new = as_bytes(guessed_pw), as_bytes(new_pw)
    note = f"old={guessed.hex()} new={new.hex()}"
    if isinstance(card, SmartCardYoon):
        result = yn_change_password_keyed(card, guessed, new)
    else:
        kc_change_password(card, guessed, new)
        result = Change.CHANGED
    evidence = [_record_change(channel.transcript, result, note)]
    victim_ok, events = _login_as(card, victim.ident, victim.password, channel)
    evidence += events
    return AttackVerdict(result is Change.CHANGED, evidence, victim_locked_out=not victim_ok)


def attack_yoon_guess(
    secrets: BreachedSecrets,
    observed: LoginRequest,
    dictionary: Iterable[bytes | str],
    transcript: Transcript | None = None,
) -> AttackVerdict:
    """Offline dictionary search against an intercepted login request.

    For each candidate, rebuild C1* = R ^ f(b ^ PW*) and C2* = f(C1* ^ T_U)
    and compare with the intercepted C2.  The first match in dictionary order
    wins.
    """
    if transcript is None:
        transcript = Transcript()
    R, b = secrets.R, secrets.b
    t_word = encode_timestamp(observed.t_u, R.width)
    tested = 0
    for candidate in dictionary:
        tested += 1
        pw = as_bytes(candidate)
        c1 = xor(R, f(xor(b, encode_password(pw, R.width))))
        if f(xor(c1, t_word)) == observed.c2:
            event = transcript.record(EventKind.GUESS_FOUND, f"password={pw.hex()} tested={tested}")
            return AttackVerdict(True, [event], recovered_password=pw, candidates_tested=tested)
    event = transcript.record(EventKind.GUESS_EXHAUSTED, f"tested={tested}")
    return AttackVerdict(False, [event], candidates_tested=tested)


def attack_yoon_takeover(
    card: SmartCardYoon, recovered_pw: bytes | str, new_pw: bytes | str, *, channel: Channel, victim: Victim
) -> AttackVerdict:
    """Use a recovered password to pass the V check and install a new one."""
    recovered, new = as_bytes(recovered_pw), as_bytes(new_pw)
    result = yn_change_password_keyed(card, recovered, new)
    evidence = [_record_change(channel.transcript, result, f"old={recovered.hex()} new={new.hex()}")]
    attacker_ok, events = _login_as(card, victim.ident, new, channel)
    evidence += events
    victim_ok, events = _login_as(card, victim.ident, victim.password, channel)
    evidence += events
    return AttackVerdict(
        result is Change.CHANGED,
        evidence,
        recovered_password=recovered,
        victim_locked_out=not victim_ok,
        attacker_access=attacker_ok,
    )


def attack_yoon_insider(
    record: RegistrationRecord, card: SmartCardYoon, new_digest: Word, *, channel: Channel, victim: Victim
) -> AttackVerdict:
    """Feed the registration-time PW_S to the card in place of f(b ^ PW)."""
    result = yn_change_password_raw(card, record.pw_s, new_digest)
    note = f"old_digest={render(record.pw_s)} new_digest={render(new_digest)}"
    evidence = [_record_change(channel.transcript, result, note)]
    victim_ok, events = _login_as(card, victim.ident, victim.password, channel)
    evidence += events
    return AttackVerdict(result is Change.CHANGED, evidence, victim_locked_out=not victim_ok)


"""Scenario runner.

    cardlab --scenario attack-parallel-session --seed 7 --out run.jsonl

Exit status: 0 when the outcome matches the scenario's registered
expectation, 1 when it does not, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import random
import string
import sys
from dataclasses import dataclass, field
from typing import Callable, TextIO

from cardlab import attacks
from cardlab.attacks import AttackVerdict, DictionaryError, Victim
from cardlab.kuchen import AuthResponse, LoginRequest, Reason, ServerState, kc_change_password, kc_register
from cardlab.simnet import (
    Channel,
    Clock,
    EventKind,
    HonestOutcome,
    Transcript,
    adversary_observe,
    run_honest_session,
    server_receive,
    user_receive,
    user_send_login,
)
from cardlab.words import DEFAULT_WIDTH, EncodingError, WidthError, check_width, random_word
from cardlab.yoon import Change, yn_change_password_keyed, yn_register

PASSWORD_ALPHABET = string.ascii_letters + string.digits


class UsageError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    scheme: str | None = None
    width: int = DEFAULT_WIDTH
    delta: int = 60
    seed: int = 0
    dict_path: str | None = None
    out_path: str | None = None
    inject_delay: int = 0


@dataclass
class PasswordChangeOutcome:
    changed: bool
    new_login: HonestOutcome
    old_login: HonestOutcome


@dataclass
class World:
    cfg: ScenarioConfig
    scheme: str
    rng: random.Random
    server: ServerState
    clock: Clock
    transcript: Transcript
    channel: Channel
    victim: Victim
    card: object = None
    record: object = None
    dictionary: list[bytes] = field(default_factory=list)


def random_password(rng: random.Random, width: int) -> bytes:
    length = rng.randint(6, min(12, width // 8))
    return "".join(rng.choice(PASSWORD_ALPHABET) for _ in range(length)).encode()


def random_identity(rng: random.Random) -> bytes:
    # 4 bytes fits the EID even at the minimum width
    return f"u{rng.randrange(1000):03d}".encode()


def different_password(rng: random.Random, width: int, avoid: bytes) -> bytes:
    while True:
        pw = random_password(rng, width)
        if pw != avoid:
            return pw


def build_world(cfg: ScenarioConfig, scheme: str) -> World:
    rng = random.Random(cfg.seed)
    W = cfg.width
    server = ServerState(random_word(rng, W), freshness_delta=cfg.delta)
    clock = Clock()
    meta = {
        "scenario": cfg.scenario,
        "scheme": scheme,
        "width": W,
        "delta": cfg.delta,
        "seed": cfg.seed,
        "inject_delay": cfg.inject_delay,
    }
    transcript = Transcript(clock, meta=meta)
    channel = Channel(server, clock, transcript, scheme=scheme)
    ident = random_identity(rng)
    dictionary = []
    if cfg.dict_path is not None:
        dictionary = attacks.load_dictionary(cfg.dict_path, W)
        if not dictionary:
            raise UsageError(f"dictionary {cfg.dict_path} is empty")
        password = rng.choice(dictionary)
    else:
        password = random_password(rng, W)
    b = random_word(rng, W)
    world = World(cfg, scheme, rng, server, clock, transcript, channel, Victim(ident, password), dictionary=dictionary)
    if scheme == "kuchen":
        world.card = kc_register(server, ident, password, b)
    else:
        world.card, world.record = yn_register(server, ident, password, b)
    return world


def _honest(world: World, pw: bytes | None = None) -> HonestOutcome:
    return run_honest_session(world.scheme, world.card, world.victim.ident, pw or world.victim.password, world.channel)


def scenario_honest_login(world: World) -> HonestOutcome:
    return _honest(world)


def scenario_wrong_password(world: World) -> HonestOutcome:
    wrong = different_password(world.rng, world.cfg.width, world.victim.password)
    return _honest(world, wrong)


def scenario_password_change_honest(world: World) -> PasswordChangeOutcome:
    old = world.victim.password
    new = different_password(world.rng, world.cfg.width, old)
    if world.scheme == "kuchen":
        kc_change_password(world.card, old, new)
        result = Change.CHANGED
    else:
        result = yn_change_password_keyed(world.card, old, new)
    kind = EventKind.CARD_CHANGED if result is Change.CHANGED else EventKind.CARD_REJECTED
    world.transcript.record(kind, f"old={old.hex()} new={new.hex()}")
    return PasswordChangeOutcome(result is Change.CHANGED, _honest(world, new), _honest(world, old))


def scenario_parallel_session(world: World) -> AttackVerdict:
    channel = world.channel
    _, session = user_send_login(channel, world.card, world.victim.ident, world.victim.password)
    server_receive(channel)
    responses = [m for m in adversary_observe(channel) if isinstance(m, AuthResponse)]
    if not responses:
        # the victim's own login failed; nothing to reflect
        return AttackVerdict(False, [])
    channel.clock.advance(world.cfg.inject_delay)
    verdict = attacks.attack_parallel_session(responses[-1], world.victim.ident, channel)
    user_receive(channel, session)
    return verdict


def _attack_change(world: World) -> AttackVerdict:
    guess = different_password(world.rng, world.cfg.width, world.victim.password)
    new = random_password(world.rng, world.cfg.width)
    return attacks.attack_kuchen_pwchange(world.card, guess, new, channel=world.channel, victim=world.victim)


def _intercept_and_guess(world: World) -> AttackVerdict:
    _honest(world)
    observed = [m for m in adversary_observe(world.channel) if isinstance(m, LoginRequest)]
    secrets = attacks.extract_card_secrets(world.card, world.transcript)
    return attacks.attack_yoon_guess(secrets, observed[0], world.dictionary, world.transcript)


def scenario_yoon_guess(world: World) -> AttackVerdict:
    return _intercept_and_guess(world)


def scenario_yoon_takeover(world: World) -> AttackVerdict:
    guess = _intercept_and_guess(world)
    if not guess.succeeded:
        return guess
    new = different_password(world.rng, world.cfg.width, guess.recovered_password)
    verdict = attacks.attack_yoon_takeover(
        world.card, guess.recovered_password, new, channel=world.channel, victim=world.victim
    )
    verdict.candidates_tested = guess.candidates_tested
    return verdict


def scenario_yoon_insider(world: World) -> AttackVerdict:
    _honest(world)
    new_digest = random_word(world.rng, world.cfg.width)
    return attacks.attack_yoon_insider(world.record, world.card, new_digest, channel=world.channel, victim=world.victim)


@dataclass(frozen=True)
class Scenario:
    run: Callable[[World], object]
    schemes: tuple[str, ...]
    expect: Callable[[object], bool]
    needs_dict: bool = False


SCENARIOS: dict[str, Scenario] = {
    "honest-login": Scenario(scenario_honest_login, ("kuchen", "yoon"), lambda o: o.accepted),
    "wrong-password": Scenario(
        scenario_wrong_password, ("kuchen", "yoon"), lambda o: o.server.reason is Reason.BAD_AUTHENTICATOR
    ),
    "password-change-honest": Scenario(
        scenario_password_change_honest,
        ("kuchen", "yoon"),
        lambda o: o.changed and o.new_login.accepted and not o.old_login.server.accepted,
    ),
    "attack-parallel-session": Scenario(scenario_parallel_session, ("kuchen", "yoon"), lambda v: v.succeeded),
    "attack-kuchen-pwchange": Scenario(_attack_change, ("kuchen",), lambda v: v.succeeded and v.victim_locked_out),
    "attack-yoon-guess": Scenario(scenario_yoon_guess, ("yoon",), lambda v: v.succeeded, needs_dict=True),
    "attack-yoon-takeover": Scenario(
        scenario_yoon_takeover,
        ("yoon",),
        lambda v: v.succeeded and v.attacker_access and v.victim_locked_out,
        needs_dict=True,
    ),
    "attack-yoon-insider": Scenario(scenario_yoon_insider, ("yoon",), lambda v: v.succeeded and v.victim_locked_out),
    "defense-yoon-keyed-change": Scenario(
        _attack_change, ("yoon",), lambda v: not v.succeeded and not v.victim_locked_out
    ),
}


def _describe(outcome) -> dict:
    if isinstance(outcome, AttackVerdict):
        out = {"succeeded": outcome.succeeded}
        if outcome.recovered_password is not None:
            out["recovered_password"] = outcome.recovered_password.hex()
        if outcome.candidates_tested:
            out["candidates_tested"] = outcome.candidates_tested
        if outcome.victim_locked_out is not None:
            out["victim_locked_out"] = outcome.victim_locked_out
        if outcome.attacker_access is not None:
            out["attacker_access"] = outcome.attacker_access
        return out
    if isinstance(outcome, PasswordChangeOutcome):
        return {
            "changed": outcome.changed,
            "new_password_login": outcome.new_login.accepted,
            "old_password_login": outcome.old_login.accepted,
        }
    return {"accepted": outcome.accepted, "reason": str(outcome.reason) if outcome.reason else None}


def resolve(cfg: ScenarioConfig) -> tuple[Scenario, str]:
    if cfg.scenario not in SCENARIOS:
        raise UsageError(f"unknown scenario {cfg.scenario!r}")
    scenario = SCENARIOS[cfg.scenario]
    scheme = cfg.scheme or scenario.schemes[0]
    if scheme not in scenario.schemes:
        raise UsageError(f"scenario {cfg.scenario} runs on {'/'.join(scenario.schemes)}, not {scheme}")
    if scenario.needs_dict and cfg.dict_path is None:
        raise UsageError(f"scenario {cfg.scenario} needs --dict")
    if cfg.delta < 0 or cfg.inject_delay < 0:
        raise UsageError("--delta and --inject-delay must be nonnegative")
    try:
        check_width(cfg.width)
    except WidthError as exc:
        raise UsageError(str(exc)) from None
    return scenario, scheme


def run_scenario(cfg: ScenarioConfig) -> tuple[Transcript, object]:
    """Build the seeded world, run the named scenario, and fill in the summary."""
    scenario, scheme = resolve(cfg)
    try:
        world = build_world(cfg, scheme)
    except (DictionaryError, EncodingError) as exc:
        raise UsageError(str(exc)) from None
    except OSError as exc:
        raise UsageError(f"cannot read dictionary {cfg.dict_path}: {exc.strerror}") from None
    outcome = scenario.run(world)
    transcript = world.transcript
    transcript.summary = dict(transcript.meta)
    transcript.summary["outcome"] = _describe(outcome)
    transcript.summary["expected"] = bool(scenario.expect(outcome))
    return transcript, outcome


def render_transcript(t: Transcript, out: TextIO | str | os.PathLike) -> None:
    if isinstance(out, (str, os.PathLike)):
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                render_transcript(t, fh)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write transcript: {exc.strerror}", os.fspath(out)) from None
        return
    for e in t.events:
        out.write(json.dumps({"seq": e.seq, "at": e.at, "kind": str(e.kind), "payload": e.payload}) + "\n")
    out.write(json.dumps({"summary": t.summary}) + "\n")


def transcript_text(t: Transcript) -> str:
    buf = io.StringIO()
    render_transcript(t, buf)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cardlab", description="Run a smart-card authentication scenario.")
    p.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    p.add_argument("--scheme", choices=("kuchen", "yoon"))
    p.add_argument("--width", type=int, default=DEFAULT_WIDTH, help="word width in bits (default %(default)s)")
    p.add_argument("--delta", type=int, default=60, help="freshness window in ticks (default %(default)s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dict", dest="dict_path", help="dictionary file, one password per line")
    p.add_argument("--out", dest="out_path", help="transcript file (default: stdout)")
    p.add_argument("--inject-delay", type=int, default=0, help="ticks between observing and injecting")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = ScenarioConfig(**vars(args))
    try:
        transcript, _ = run_scenario(cfg)
    except UsageError as exc:
        print(f"cardlab: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out_path:
        try:
            render_transcript(transcript, cfg.out_path)
        except OSError as exc:
            print(f"cardlab: error: {exc}", file=sys.stderr)
            return 2
        print(json.dumps(transcript.summary))
    else:
        render_transcript(transcript, sys.stdout)
    return 0 if transcript.summary["expected"] else 1


if __name__ == "__main__":
    sys.exit(main())

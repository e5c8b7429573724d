"""Exit criteria.  Each test prints one PASS/FAIL line (collected again in the
terminal summary) and asserts the criterion at its fixed threshold."""

import random
import string
import time

import pytest

from cardlab import attacks
from cardlab.attacks import Victim
from cardlab.cli import SCENARIOS, ScenarioConfig, run_scenario, transcript_text
from cardlab.kuchen import AuthResponse, Reason, ServerState, kc_register
from cardlab.simnet import SCHEMES, run_honest_session
from cardlab.words import Word, random_word
from cardlab.yoon import Change, yn_change_password_keyed, yn_login, yn_register

from conftest import ACCEPTANCE_LINES, make_channel
from oracles import brute_force_guess, bxor, digest_matches, h, pad_pw

ALPHABET = (string.ascii_letters + string.digits).encode()
DELTA = 60


def report(tag: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {tag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rand_bytes(rng, lo, hi):
    return bytes(rng.choice(ALPHABET) for _ in range(rng.randint(lo, hi)))


def perturb(rng, pw: bytes) -> bytes:
    i = rng.randrange(len(pw))
    alt = rng.choice([c for c in ALPHABET if c != pw[i]])
    return pw[:i] + bytes([alt]) + pw[i + 1 :]


def instance(seed, scheme, width=256):
    """Fresh server, victim and card drawn from one seed."""
    rng = random.Random(seed)
    server = ServerState(random_word(rng, width), freshness_delta=DELTA)
    victim = Victim(rand_bytes(rng, 1, min(12, width // 8 - 4)), rand_bytes(rng, 4, min(16, width // 8)))
    b = random_word(rng, width)
    record = None
    if scheme == "kuchen":
        card = kc_register(server, victim.ident, victim.password, b)
    else:
        card, record = yn_register(server, victim.ident, victim.password, b)
    channel = make_channel(server, scheme)
    channel.clock.advance(rng.randrange(10_000))
    return rng, server, victim, card, record, channel


def test_c01_honest_completeness():
    counts, times = {}, {}
    for scheme in ("kuchen", "yoon"):
        start = time.perf_counter()
        ok = 0
        for seed in range(1000):
            _, _, victim, card, _, channel = instance(seed, scheme)
            outcome = run_honest_session(scheme, card, victim.ident, victim.password, channel)
            ok += outcome.server.accepted and outcome.user is not None and outcome.user.accepted
        counts[scheme], times[scheme] = ok, time.perf_counter() - start
    passed = all(c == 1000 for c in counts.values()) and all(t < 10 for t in times.values())
    detail = ", ".join(f"{s} {counts[s]}/1000 in {times[s]:.2f}s" for s in counts)
    report("C1 honest completeness", passed, detail)


def test_c02_wrong_password_soundness():
    accepts = {}
    for scheme in ("kuchen", "yoon"):
        accepts[scheme] = 0
        for seed in range(1000):
            rng, _, victim, card, _, channel = instance(10_000 + seed, scheme)
            outcome = run_honest_session(scheme, card, victim.ident, perturb(rng, victim.password), channel)
            accepts[scheme] += outcome.server.accepted
    report(
        "C2 wrong-password soundness",
        all(a == 0 for a in accepts.values()),
        ", ".join(f"{s} {a}/1000 accepted" for s, a in accepts.items()),
    )


def test_c03_parallel_session():
    rng = random.Random(3)
    inside = late = 0
    for i in range(100):
        scheme = ("kuchen", "yoon")[i % 2]
        cfg = ScenarioConfig("attack-parallel-session", scheme=scheme, delta=DELTA, seed=i, inject_delay=rng.randint(0, DELTA))
        inside += run_scenario(cfg)[1].succeeded
        cfg = ScenarioConfig("attack-parallel-session", scheme=scheme, delta=DELTA, seed=i, inject_delay=DELTA + 1)
        late += run_scenario(cfg)[1].succeeded
    report(
        "C3 parallel-session attack",
        inside == 100 and late == 0,
        f"delay<=delta {inside}/100 succeeded, delay=delta+1 {late}/100 succeeded",
    )


def test_c04_kuchen_password_change():
    changed = locked = yoon_accepted = 0
    for seed in range(100):
        verdict = run_scenario(ScenarioConfig("attack-kuchen-pwchange", seed=seed))[1]
        changed += verdict.succeeded
        locked += bool(verdict.victim_locked_out)
        yoon_accepted += run_scenario(ScenarioConfig("defense-yoon-keyed-change", seed=seed))[1].succeeded
    report(
        "C4 unchecked password change",
        changed == 100 and locked == 100 and yoon_accepted == 0,
        f"Ku-Chen changed {changed}/100, victim locked out {locked}/100; Yoon keyed accepted {yoon_accepted}/100",
    )


def test_c05_yoon_keyed_change():
    wrong_ok = right_ok = invariant = 0
    for seed in range(1000):
        rng, _, victim, card, _, _ = instance(20_000 + seed, "yoon")
        before = (card.V, card.R, card.b)
        wrong_ok += yn_change_password_keyed(card, perturb(rng, victim.password), b"whatever") is Change.CHANGED
        assert (card.V, card.R, card.b) == before
        new = rand_bytes(rng, 4, 16)
        right_ok += yn_change_password_keyed(card, victim.password, new) is Change.CHANGED
        invariant += card.V.data == bxor(card.R.data, h(bxor(card.b.data, pad_pw(new, 32))))
    report(
        "C5 keyed change gate",
        wrong_ok == 0 and right_ok == 1000 and invariant == 1000,
        f"wrong old {wrong_ok}/1000 accepted, correct old {right_ok}/1000 accepted, V==R^f(b^PW_new) {invariant}/1000",
    )


@pytest.fixture(scope="module")
def filler():
    rng = random.Random(606)
    words = set()
    while len(words) < 10_000:
        words.add(rand_bytes(rng, 4, 16))
    return sorted(words)


def guess_round(seed, filler, include_true):
    rng, _, victim, card, record, channel = instance(30_000 + seed, "yoon")
    others = [w for w in filler if w != victim.password]
    if include_true:
        dictionary = others[:9_999]
        dictionary.insert(rng.randrange(10_000), victim.password)
    else:
        dictionary = others[:10_000]
    run_honest_session("yoon", card, victim.ident, victim.password, channel)
    observed = channel.crossed[0].msg
    secrets = attacks.extract_card_secrets(card, channel.transcript)
    start = time.perf_counter()
    verdict = attacks.attack_yoon_guess(secrets, observed, dictionary, channel.transcript)
    elapsed = time.perf_counter() - start
    return rng, victim, card, channel, observed, dictionary, verdict, elapsed


def test_c06_c07_dictionary_attack_and_takeover(filler):
    recovered = oracle_agree = 0
    attack_time = 0.0
    changed = attacker_in = locked = 0
    for seed in range(100):
        rng, victim, card, channel, observed, dictionary, verdict, elapsed = guess_round(seed, filler, True)
        attack_time += elapsed
        recovered += verdict.succeeded and verdict.recovered_password == victim.password
        hits = brute_force_guess(card.R.data, card.b.data, observed.t_u, observed.c2.data, dictionary)
        cross = digest_matches(card.V.data, card.R.data, card.b.data, dictionary)
        oracle_agree += hits == cross == [victim.password] and verdict.recovered_password == hits[0]
        if verdict.succeeded:
            new = rand_bytes(rng, 4, 16)
            while new == victim.password:
                new = rand_bytes(rng, 4, 16)
            take = attacks.attack_yoon_takeover(card, verdict.recovered_password, new, channel=channel, victim=victim)
            changed += take.succeeded
            attacker_in += bool(take.attacker_access)
            locked += bool(take.victim_locked_out)
    false_hits = 0
    for seed in range(100):
        *_, verdict, elapsed = guess_round(1000 + seed, filler, False)
        attack_time += elapsed
        false_hits += verdict.succeeded
    report(
        "C6 dictionary recovery",
        recovered == 100 and oracle_agree == 100 and false_hits == 0 and attack_time < 30,
        f"recovered {recovered}/100, oracle agreement {oracle_agree}/100, "
        f"false recoveries {false_hits}/100, attack time {attack_time:.2f}s",
    )
    report(
        "C7 takeover after recovery",
        changed == 100 and attacker_in == 100 and locked == 100,
        f"changed {changed}/100, attacker login {attacker_in}/100, victim locked out {locked}/100",
    )


def test_c08_insider():
    changed = locked = stale_ok = 0
    for seed in range(100):
        rng, server, victim, card, record, channel = instance(40_000 + seed, "yoon")
        verdict = attacks.attack_yoon_insider(record, card, random_word(rng), channel=channel, victim=victim)
        changed += verdict.succeeded
        locked += bool(verdict.victim_locked_out)
        # re-issued card: user re-registers with a fresh random b
        reissued, _ = yn_register(server, victim.ident, victim.password, random_word(rng))
        stale = attacks.attack_yoon_insider(record, reissued, random_word(rng), channel=channel, victim=victim)
        stale_ok += stale.succeeded
    report(
        "C8 insider raw-digest change",
        changed == 100 and locked == 100 and stale_ok == 0,
        f"changed {changed}/100, victim locked out {locked}/100, stale record accepted {stale_ok}/100",
    )


def test_c09_reflection_guard():
    rejected = 0
    for seed in range(100):
        scheme = ("kuchen", "yoon")[seed % 2]
        _, _, victim, card, _, channel = instance(50_000 + seed, scheme)
        ops = SCHEMES[scheme]
        req, session = ops.login(card, victim.password, victim.ident, channel.clock.now)
        verdict = ops.user_verify(session, AuthResponse(req.c2, req.t_u))
        rejected += verdict.reason is Reason.REFLECTED_TIMESTAMP
    report("C9 reflection guard", rejected == 100, f"echoed responses rejected {rejected}/100")


def test_c10_determinism(tmp_path):
    dict_path = tmp_path / "words.txt"
    dict_path.write_text("\n".join(f"word{i:04d}" for i in range(500)) + "\n")
    identical = total = 0
    for name, scenario in SCENARIOS.items():
        for scheme in scenario.schemes:
            for seed in (0, 1, 2**63 + 5):
                cfg = ScenarioConfig(
                    name, scheme=scheme, seed=seed, inject_delay=7, dict_path=str(dict_path) if scenario.needs_dict else None
                )
                first = transcript_text(run_scenario(cfg)[0]).encode()
                second = transcript_text(run_scenario(cfg)[0]).encode()
                total += 1
                identical += first == second
    report("C10 determinism", identical == total, f"{identical}/{total} scenario runs byte-identical")


def test_c11_small_width_oracle():
    space = [b"k" + f"{i:03x}".encode() for i in range(2**12)]
    agree = 0
    for seed in range(20):
        rng = random.Random(60_000 + seed)
        server = ServerState(random_word(rng, 64), freshness_delta=DELTA)
        pw = rng.choice(space)
        card, _ = yn_register(server, b"u1", pw, random_word(rng, 64))
        req, _ = yn_login(card, pw, b"u1", rng.randrange(2**32))
        truth = brute_force_guess(card.R.data, card.b.data, req.t_u, req.c2.data, space)
        if seed % 2:
            dictionary = rng.sample(space, len(space))
        else:
            dictionary = rng.sample([w for w in space if w != pw], 2**11)
        verdict = attacks.attack_yoon_guess(attacks.extract_card_secrets(card), req, dictionary)
        expected = next((w for w in dictionary if w in truth), None)
        agree += truth == [pw] and verdict.recovered_password == expected and verdict.succeeded == (expected is not None)
    report("C11 small-width exhaustive oracle", agree == 20, f"{agree}/20 instances agree at W=64 over 2^12 candidates")


def test_word_widths_consistent():
    # every scenario quantity composes at non-default widths too
    for width in (64, 128, 512):
        _, _, victim, card, _, channel = instance(7, "yoon", width)
        assert run_honest_session("yoon", card, victim.ident, victim.password, channel).accepted
        assert isinstance(card.R, Word) and card.R.width == width

import random

import pytest

from cardlab.kuchen import ServerState
from cardlab.simnet import Channel, Clock, Transcript
from cardlab.words import random_word

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def server(rng):
    return ServerState(random_word(rng))


def make_channel(server, scheme="kuchen", **kw):
    clock = Clock()
    return Channel(server, clock, Transcript(clock), scheme=scheme, **kw)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import random

import pytest

from cdasim.experiments import build_traders, trial_streams
from cdasim.session import SessionConfig


@pytest.fixture
def rng():
    return random.Random(12345)


def make_market(buyers, sellers, seed=7, **cfg):
    """(config, traders, scheduler rng) on the 10..190 symmetric market."""
    nb = sum(n for _, n in buyers)
    ns = sum(n for _, n in sellers)
    from cdasim.session import Schedule
    cfg.setdefault("demand", Schedule.evenly("demand", 10, 190, nb) if nb > 1 else Schedule.flat("demand", 150, nb))
    cfg.setdefault("supply", Schedule.evenly("supply", 10, 190, ns) if ns > 1 else Schedule.flat("supply", 50, ns))
    config = SessionConfig(seed=seed, **cfg)
    streams = trial_streams(seed, 0, nb + ns + 1)
    traders = build_traders(buyers, sellers, streams[:-1], config.max_price, duration=config.duration)
    return config, traders, streams[-1]


# verdict lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

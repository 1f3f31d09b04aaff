import random

import pytest

from tempora import tf
from tempora.field import FieldParams
from tempora.timelock import ClientKeys, keygen

# criterion number -> (title, outcome, detail)
_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if call.when == "setup" and call.excinfo is not None:
        _ACCEPTANCE[n] = (title, "FAIL", "setup error")
    elif call.when == "call":
        detail = dict(item.user_properties).get("detail", "")
        outcome = "PASS" if call.excinfo is None else "FAIL"
        _ACCEPTANCE[n] = (title, outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, outcome, detail = _ACCEPTANCE[n]
        line = f"{outcome} criterion {n}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def small_field():
    return FieldParams(101)


@pytest.fixture(scope="session")
def keys():
    # small RSA primes keep trapdoor and squaring fast in tests
    return keygen(random.Random(99), 256)


@pytest.fixture(scope="session")
def toy_keys():
    return ClientKeys.from_primes(1000003, 1000033)


def make_clients(sp, n, rng, delta=5, max_ss=10, messages=None, rsa_bits=128):
    """``{u: ClientContext}`` plus the plaintexts, for white-box tests."""
    clients, ms = {}, {}
    for u in range(1, n + 1):
        keys = keygen(rng, rsa_bits)
        m = messages[u - 1] if messages else rng.randrange(1 << 64)
        ms[u] = m
        clients[u] = tf.ClientContext(u, keys, tf.gen_puzzle(m, keys, sp, delta, max_ss, rng))
    return clients, ms

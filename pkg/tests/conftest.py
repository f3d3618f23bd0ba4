import numpy as np
import pytest

from superchain.modules import ChainSpec, parse_rep


def make_chain(m, n, reps, z, twist=None):
    return ChainSpec(m, n, [(parse_rep(r, m, n), zz) for r, zz in zip(reps, z)], twist)


def random_levels(rng, xi, m, avoid=(), gap=0.2):
    from superchain.bethe import canonical_order

    while True:
        t = [[complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(x)] for x in xi]
        t = canonical_order(t, m)
        flat = [v for lv in t for v in lv]
        if all(abs(a - b) > gap and abs(abs(a - b) - 1) > gap for i, a in enumerate(flat) for b in flat[:i]) and all(
            abs(a - p) > gap for a in flat for p in avoid
        ):
            return t


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gl11_chain():
    return make_chain(1, 1, ["vector", "vector"], [0.1, 0.9], [1.3, 0.4])


@pytest.fixture
def gl21_chain():
    return make_chain(2, 1, ["vector", "wedge:2"], [0.1, 0.8], [1.7, 0.6, 1.1])


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])

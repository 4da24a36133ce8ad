import pytest
from hypothesis import settings, strategies as st

from chainckpt.chain import chain_from_arrays, unit_chain

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def small_specs(draw, max_length=3, max_size=3, max_time=9, max_overhead=2):
    """Integer-valued chains small enough for the exhaustive searches."""
    L = draw(st.integers(1, max_length))
    n = L + 1
    ints = lambda lo, hi, k: draw(st.lists(st.integers(lo, hi), min_size=k, max_size=k))  # noqa: E731
    return chain_from_arrays(
        uf=ints(1, max_time, n), ub=ints(1, max_time, n),
        wx=ints(0, max_size, n), wbx=ints(0, max_size, n), wy=ints(0, max_size, n + 1),
        of=ints(0, max_overhead, n), ob=ints(0, max_overhead, n),
    )


@pytest.fixture
def l4_spec():
    # compatible profile for the worked L=4 sequence; distinct times catch ordering mistakes
    return chain_from_arrays(
        uf=[1, 2, 3, 4, 5], ub=[10, 20, 30, 40, 50],
        wx=[1, 1, 1, 1, 1], wbx=[2, 2, 2, 2, 2], wy=[1] * 6,
    )


@pytest.fixture
def l4_chain(l4_spec):
    return unit_chain(l4_spec)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

import random

from hypothesis import strategies as st

from laxglue.poset import FinPoset


@st.composite
def posets(draw, max_size: int = 5):
    """Random finite posets: a random DAG on a random linear extension."""
    n = draw(st.integers(1, max_size))
    names = [str(i) for i in range(n)]
    pairs = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())]
    perm = draw(st.permutations(names))
    return FinPoset(perm, pairs)


def rng(seed: int = 0) -> random.Random:
    return random.Random(seed)


# one line per acceptance criterion, echoed at the end of the run
VERDICTS: list = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)

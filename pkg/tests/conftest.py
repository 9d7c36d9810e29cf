import numpy as np
import pytest

from netemd.graph import Graph


def random_graph(n, p, directed, seed):
    rng = np.random.default_rng(seed)
    if directed:
        mask = rng.random((n, n)) < p
        np.fill_diagonal(mask, False)
        pairs = np.argwhere(mask)
    else:
        iu = np.triu_indices(n, 1)
        keep = rng.random(len(iu[0])) < p
        pairs = np.column_stack([iu[0][keep], iu[1][keep]])
    return Graph.from_edges(n, pairs, directed=directed)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)], directed=False)


@pytest.fixture
def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)], directed=False)


@pytest.fixture
def cycle3():
    return Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)], directed=True)


# acceptance outcomes, echoed in the terminal summary even when output is captured
ACCEPTANCE = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append((criterion, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)

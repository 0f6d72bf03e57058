import numpy as np
import pytest

from rotary_pcr.thermal import (
    AMBIENT,
    BOUNDARY,
    HeatSource,
    ThermalLink,
    ThermalNetwork,
    ThermalNode,
)


def random_network(rng, n_internal, ambient=25.0, c_range=(0.1, 5.0), g_range=(0.2, 2.0)):
    """Connected random network; every internal node reaches ambient."""
    nodes = [
        ThermalNode(f"n{i}", ambient, float(rng.uniform(*c_range))) for i in range(n_internal)
    ]
    nodes.append(ThermalNode(AMBIENT, ambient, kind=BOUNDARY))
    links = [ThermalLink("n0", AMBIENT, float(rng.uniform(*g_range)))]
    for i in range(1, n_internal):
        j = int(rng.integers(0, i))
        links.append(ThermalLink(f"n{i}", f"n{j}", float(rng.uniform(*g_range))))
    for i in range(1, n_internal):
        if rng.random() < 0.3:
            links.append(ThermalLink(f"n{i}", AMBIENT, float(rng.uniform(*g_range))))
    heated = sorted(set(int(k) for k in rng.integers(0, n_internal, size=2)))
    sources = [HeatSource(f"n{k}") for k in heated]
    powers = rng.uniform(0.0, 2.0, size=len(sources))
    return ThermalNetwork(tuple(nodes), tuple(links), tuple(sources), ambient), powers


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------------------
# acceptance verdicts, one line per criterion at the end of the run
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flavornet.graph_core import IngredientNetwork, project  # noqa: E402
from flavornet.pipeline import prepare_corpora  # noqa: E402
from flavornet.synthetic import SyntheticSpec, generate_synthetic  # noqa: E402

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def triangle():
    return IngredientNetwork(edges={("A", "B"): 10, ("A", "C"): 4, ("B", "C"): 12})


@pytest.fixture(scope="session")
def planted():
    """The 4 x 15 planted-cuisine instance, prepared and split."""
    spec = SyntheticSpec(
        clusters=4,
        ingredients_per_cluster=15,
        compounds_per_cluster=40,
        compound_overlap=0.1,
        recipes_per_corpus=200,
        noise=0.05,
        seed=0,
    )
    bipartite, west, east, labels = generate_synthetic(spec)
    network = project(bipartite)
    split_w, split_e, _ = prepare_corpora(network, west, east, seed=0)
    return network, split_w, split_e, labels

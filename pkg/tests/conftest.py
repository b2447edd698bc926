import pytest

from app.data.generators import oracle_models, small_formula_family
from app.logic.semantics import holds_at
from app.logic.syntax import parse_formula
from app.utils.load_data import load_figures, load_fixture


@pytest.fixture(scope="session")
def fig1():
    return load_fixture("M_FIG1")


@pytest.fixture(scope="session")
def fixtures():
    names = ["M_TOP", "M_FIG1", "M_AB", "M_AB_STRICT", "M_LEFTBANG", "M_RIGHTBANG", "M_BANG_LOOSE"]
    return {name: load_fixture(name) for name in names}


@pytest.fixture(scope="session")
def figures():
    return load_figures()


@pytest.fixture(scope="session")
def family():
    return small_formula_family()


@pytest.fixture(scope="session")
def oracle(family):
    """Each family formula mapped to the bitmask of oracle models satisfying it."""
    models = list(oracle_models())
    masks = {}
    for f in family:
        mask = 0
        for i, m in enumerate(models):
            if holds_at(m, m.start, f):
                mask |= 1 << i
        masks[f] = mask
    return models, masks


@pytest.fixture
def parse():
    return parse_formula

from fractions import Fraction

import pytest

from sympemb.config import get_settings
from sympemb.constructions import _read_axioms
from sympemb.domains import Polylike


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Every test starts from the default settings, whatever the shell exports."""
    for name in (
        "SYMPEMB_SEED",
        "SYMPEMB_MAX_DEPTH",
        "SYMPEMB_MAX_DEGREE",
        "SYMPEMB_EH_K_BOUND",
        "SYMPEMB_MULT_CAP",
        "SYMPEMB_GENERICITY_BOUND",
        "SYMPEMB_NUDGES",
        "SYMPEMB_WORKERS",
        "SYMPEMB_AXIOMS",
        "SYMPEMB_LOG_LEVEL",
    ):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    _read_axioms.cache_clear()
    yield
    get_settings.cache_clear()
    _read_axioms.cache_clear()


@pytest.fixture
def q_generic():
    """Q(3/2, 1, 11/5): generic, a2 < b and a3 > 2 a2."""
    return Polylike(Fraction(3, 2), (Fraction(1), Fraction(11, 5)))


@pytest.fixture
def q_boundary():
    """Q(3/2, 1, 2): a3 = 2 a2 exactly."""
    return Polylike(Fraction(3, 2), (Fraction(1), Fraction(2)))

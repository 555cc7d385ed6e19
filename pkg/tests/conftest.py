import pytest

from kinetobench.model import bundled_model_path, load_model
from kinetobench.session import SessionConfig, WorkingMode


@pytest.fixture(scope="session")
def fivebar():
    """The reference L0=6, L1=8, L2=5 model."""
    return load_model(bundled_model_path("fivebar_6_8_5"))


@pytest.fixture(scope="session")
def rr_model():
    return load_model(bundled_model_path("rr_planar"))


@pytest.fixture(scope="session")
def rrr_model():
    return load_model(bundled_model_path("rrr_planar"))


@pytest.fixture()
def session_config(fivebar):
    return SessionConfig(
        model=fivebar,
        mode=WorkingMode(-1, 1),
        sensitivity="medium",
        home=(3.0, 10.0),
    )

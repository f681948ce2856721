import pytest

from cbmkit.config import ModelConfig
from cbmkit.laws import DamageLaw, InspectionLaw, SaneLaw

# Base parameter set used throughout: damage rate 1e-3, failure rate 5e-4,
# inspections every 1000 time units (uniform variant: half-width 100).
BASE_MU = 1e-3
BASE_LAMBDA = 5e-4
SPACING = 1000.0
HALF_WIDTH = 100.0


def make_config(shape=1, kind="deterministic", mu=BASE_MU, lam=BASE_LAMBDA,
                horizon=5e7, seed=None, **kwargs):
    half = HALF_WIDTH if kind == "uniform" else 0.0
    return ModelConfig(
        SaneLaw(shape, mu),
        DamageLaw(lam),
        InspectionLaw(kind, SPACING, half),
        horizon,
        seed,
        **kwargs,
    )


@pytest.fixture
def base_config():
    return make_config()


@pytest.fixture(params=[(1, "deterministic"), (2, "deterministic"),
                        (1, "uniform"), (2, "uniform")],
                ids=["n1-det", "n2-det", "n1-unif", "n2-unif"])
def any_config(request):
    shape, kind = request.param
    return make_config(shape=shape, kind=kind)

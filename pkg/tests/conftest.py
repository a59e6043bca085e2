import numpy as np
import pytest

from bhflow.surfaces import (
    ChartPoint,
    KstarMetric,
    SurfaceModel,
    fermat_cubic,
    product_unit_section,
)


@pytest.fixture(scope="session")
def e1():
    """CP^1 x CP^1 with the unit section (divisor at infinity)."""
    model = SurfaceModel("CP1xCP1")
    return model, product_unit_section(model), KstarMetric("CP1xCP1")


@pytest.fixture(scope="session")
def e2():
    """CP^2 with the Fermat cubic (smooth anticanonical curve)."""
    model = SurfaceModel("CP2")
    return model, fermat_cubic(model), KstarMetric("CP2")


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)


def random_chart_point(rng, model, box=1.2, chart=None):
    c = int(rng.integers(0, model.n_charts)) if chart is None else chart
    v = rng.uniform(-box, box, 4)
    return ChartPoint(c, (complex(v[0], v[1]), complex(v[2], v[3])))

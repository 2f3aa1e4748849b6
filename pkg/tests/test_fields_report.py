import json

import numpy as np
import pytest

from besselsq.errors import GridMismatchError
from besselsq.fields import RadialField, SpaceTimeField, as_field, relative_deviation
from besselsq.grids import make_radial_grid, make_time_grid
from besselsq.report import Report, deviation_report

G = make_radial_grid(n=32)
T = make_time_grid(m=16)


def test_radial_field_shapes():
    with pytest.raises(GridMismatchError):
        RadialField(G, np.ones(31))
    f = RadialField(G, np.ones((32, 3)))
    assert f.is_vector and f.dim == 3
    assert as_field(np.ones(32), G).dim == 1
    with pytest.raises(GridMismatchError):
        as_field(np.ones(32))
    with pytest.raises(GridMismatchError):
        as_field(f, make_radial_grid(n=64))


def test_norms_and_deviation():
    f = RadialField(G, np.ones(32))
    assert f.l2_norm() ** 2 == pytest.approx(G.integrate(np.ones(32)))
    F = SpaceTimeField(T, G, np.ones((16, 32)))
    assert F.l2_norm() ** 2 == pytest.approx(T.logweights.sum() * G.weights.sum())
    assert relative_deviation(F, F) == 0.0
    with pytest.raises(TypeError):
        relative_deviation(f, F)
    with pytest.raises(GridMismatchError):
        SpaceTimeField(T, G, np.ones((15, 32)))


def test_report_json_roundtrip():
    r = deviation_report("identities", "x/lam=1", {"a": np.float64(1.5)}, 1e-5, 1e-4,
                         {"z": 1 + 2j, "arr": np.arange(3)}, seed=3)
    assert r.passed
    d = json.loads(r.to_json())
    assert d["values"]["z"] == [1.0, 2.0] and d["values"]["arr"] == [0, 1, 2]
    assert Report.from_dict(d).to_dict() == r.to_dict()


def test_nan_deviation_fails():
    assert not deviation_report("s", "c", {}, float("nan"), 1.0).passed

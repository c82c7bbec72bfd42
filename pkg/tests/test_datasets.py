"""Embedded datasets: immutability and reference values."""

import numpy as np
import pytest

from adoptkit import datasets
from adoptkit.errors import ValidationError


def test_synthetic21_values():
    ds = datasets.synthetic21()
    assert len(ds.series) == 21
    assert ds.series.times[0] == 0.0 and ds.series.times[-1] == 20.0
    assert ds.series.values[0] == 1.10
    assert ds.series.values[-1] == 3.41
    again = datasets.synthetic21()
    assert np.array_equal(ds.series.values, again.series.values)


def test_enterprise78_structure():
    ds = datasets.enterprise78()
    assert len(ds.series) == 40
    assert ds.series.times[-1] == 78.0
    assert ds.series.unit == "week"
    assert "synthetic replicate" in ds.provenance
    raw = datasets.enterprise78_raw()
    assert len(raw.series) == 40
    assert raw.series.values[0] == 0.0 and raw.series.values[4] == 22.1


def test_cohorts_rows():
    rows = datasets.cohorts()
    assert [c.e for c in rows] == [0.2, 0.6, 0.9]
    assert [c.beta_hat for c in rows] == [0.120, 0.182, 0.238]
    assert [c.se for c in rows] == [0.015, 0.018, 0.021]


def test_builtin_registry():
    assert set(datasets.builtin_names()) == {"synthetic21", "enterprise78", "enterprise78raw"}
    with pytest.raises(ValidationError):
        datasets.load_builtin("nope")

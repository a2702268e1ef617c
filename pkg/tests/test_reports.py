import json

import numpy as np
import pytest

from degeig.quadrature import fixed_quad, radial_integral
from degeig.reports import dumps, format_float, write_csv


class TestJsonWriter:
    def test_seventeen_significant_digits(self):
        text = dumps({"x": 1.0 / 3.0})
        assert "0.33333333333333331" in text

    def test_round_trip_parses(self):
        doc = {"a": [1, 2.5, None, True], "b": {"c": "s", "d": np.float64(0.1)}}
        parsed = json.loads(dumps(doc))
        assert parsed["b"]["d"] == 0.1
        assert parsed["a"][3] is True

    def test_non_finite_values(self):
        assert format_float(float("nan")) == "null"
        assert format_float(float("inf")) == '"inf"'
        assert json.loads(dumps({"x": float("nan")}))["x"] is None

    def test_numpy_array_serializes(self):
        parsed = json.loads(dumps({"v": np.arange(3.0)}))
        assert parsed["v"] == [0.0, 1.0, 2.0]

    def test_unknown_type_rejected(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})

    def test_csv_float_format(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["a", "b"], [[1, 2.0 / 3.0]])
        assert path.read_text() == "a,b\n1,0.66666666666666663\n"


class TestQuadrature:
    def test_power_law_on_many_decades(self):
        # integral of r^(-0.5) over [1e-8, 1] = 2 (1 - 1e-4)
        val = radial_integral(lambda r: r**-0.5, 1e-8, 1.0)
        assert abs(val - 2.0 * (1.0 - 1e-4)) < 1e-12

    def test_zero_width(self):
        assert radial_integral(lambda r: r, 2.0, 2.0) == 0.0

    def test_lower_bound_validated(self):
        with pytest.raises(ValueError):
            radial_integral(lambda r: r, 0.0, 1.0)

    def test_fixed_quad_polynomial_exact(self):
        # Gauss order 20 integrates r^7 exactly
        val = fixed_quad(lambda r: r**7, 0.0, 2.0, order=20)
        assert abs(val - 2.0**8 / 8.0) < 1e-12

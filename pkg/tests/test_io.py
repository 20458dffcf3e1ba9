import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from deeppink import io
from deeppink.errors import DimensionMismatch


class TestCsv:
    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 4)),
                  elements=st.floats(allow_nan=False, allow_infinity=False, width=64)))
    def test_round_trip_exact(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("csv") / "m.csv"
        names = [f"c{j}" for j in range(values.shape[1])]
        io.write_matrix(path, values, names)
        got_names, got = io.read_table(path)
        assert got_names == names
        np.testing.assert_array_equal(got, values)

    def test_header_required_for_design(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("1,2\n3,4\n")
        with pytest.raises(io.InputError, match="header"):
            io.read_design(path)

    def test_headerless_response(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("1.5\n-2\n")
        np.testing.assert_array_equal(io.read_response(path, 2).values, [1.5, -2.0])

    def test_ragged_and_nonnumeric(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n3\n")
        with pytest.raises(io.InputError, match="row 2"):
            io.read_table(path)
        path.write_text("a,b\n1,x\n")
        with pytest.raises(io.InputError):
            io.read_table(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(io.InputError):
            io.read_table(tmp_path / "nope.csv")

    def test_sigma_shape(self, tmp_path):
        path = tmp_path / "s.csv"
        io.write_matrix(path, np.eye(2), ["a", "b"])
        with pytest.raises(DimensionMismatch, match="expected 3x3"):
            io.read_sigma(path, 3)

    def test_response_length(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("y\n1\n2\n")
        with pytest.raises(DimensionMismatch):
            io.read_response(path, 3)


class TestJson:
    def test_numpy_and_infinity(self):
        doc = json.loads(io.dumps({"a": np.arange(3), "b": np.float64(0.5), "t": float("inf")}))
        assert doc == {"a": [0, 1, 2], "b": 0.5, "t": None}

    def test_manifest_fields(self, tmp_path):
        m = io.manifest("select", {"q": 0.1}, 7, [tmp_path / "x.csv"], [])
        assert set(m) == {"command", "config", "input_paths", "output_paths", "seed",
                          "tool_version", "timestamp"}
        assert m["input_paths"] == [str(tmp_path / "x.csv")]

"""Tests for CSV reading, writing, and label encoding."""
import io

import numpy as np
import pytest

from robustqda.data_io import (
    encode_labels,
    encode_with_names,
    read_dataset,
    write_dataset,
    write_predictions_csv,
)
from robustqda.errors import DataError


SAMPLE = "a,b,label\n1.5,2.0,1\n-0.25,3.5,2\n0.0,1e-3,1\n"


class TestReadDataset:
    def test_basic_parse(self):
        ds = read_dataset(io.StringIO(SAMPLE), label_col="label")
        assert ds.feature_names == ("a", "b")
        assert ds.labels_raw == ("1", "2", "1")
        assert np.array_equal(ds.X, [[1.5, 2.0], [-0.25, 3.5], [0.0, 0.001]])
        assert (ds.n, ds.p) == (3, 2)

    def test_label_column_position_is_free(self):
        text = "label,a,b\n1,1.5,2.0\n2,-0.25,3.5\n"
        ds = read_dataset(io.StringIO(text), label_col="label")
        assert ds.feature_names == ("a", "b")
        assert np.array_equal(ds.X, [[1.5, 2.0], [-0.25, 3.5]])

    def test_without_label_column(self):
        ds = read_dataset(io.StringIO("a,b\n1,2\n3,4\n"))
        assert ds.labels_raw is None
        assert ds.X.shape == (2, 2)

    def test_path_source(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text(SAMPLE)
        ds = read_dataset(path, label_col="label")
        assert ds.n == 3

    def test_missing_label_column_lists_header(self):
        with pytest.raises(DataError, match="header: a, b, label"):
            read_dataset(io.StringIO(SAMPLE), label_col="y")

    def test_duplicate_columns(self):
        with pytest.raises(DataError, match="duplicate"):
            read_dataset(io.StringIO("a,a\n1,2\n"))

    def test_ragged_row(self):
        with pytest.raises(DataError, match="row 2"):
            read_dataset(io.StringIO("a,b\n1,2\n3\n"))

    def test_non_numeric_cell_cites_row_and_column(self):
        text = "a,b\n1,2\n3,oops\n"
        with pytest.raises(DataError, match="row 2, column 'b'"):
            read_dataset(io.StringIO(text))

    def test_nan_cell_rejected(self):
        text = "a,b\n1,2\n3,nan\n"
        with pytest.raises(DataError, match="not finite"):
            read_dataset(io.StringIO(text))

    def test_empty_file(self):
        with pytest.raises(DataError, match="header"):
            read_dataset(io.StringIO(""))

    def test_header_only(self):
        with pytest.raises(DataError, match="no data rows"):
            read_dataset(io.StringIO("a,b\n"))

    def test_label_only_header(self):
        with pytest.raises(DataError, match="no feature columns"):
            read_dataset(io.StringIO("label\n1\n"), label_col="label")


class TestEncodeLabels:
    def test_integers_pass_through(self):
        y, names = encode_labels(("3", "1", "2", "1"))
        assert names is None
        assert np.array_equal(y, [3, 1, 2, 1])

    def test_strings_sorted_to_contiguous(self):
        y, names = encode_labels(("walk", "run", "walk", "jump"))
        assert names == ("jump", "run", "walk")
        assert np.array_equal(y, [3, 2, 3, 1])

    def test_encode_with_names_round_trip(self):
        raw = ("b", "a", "b", "c")
        y, names = encode_labels(raw)
        again = encode_with_names(raw, names)
        assert np.array_equal(y, again)

    def test_encode_with_names_unknown_label(self):
        with pytest.raises(DataError, match="'d' is not one of the trained classes"):
            encode_with_names(("a", "d"), ("a", "b", "c"))


class TestWriteDataset:
    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((50, 3)) * np.array([1e-8, 1.0, 1e12])
        y = rng.integers(1, 4, 50)
        path = tmp_path / "rt.csv"
        write_dataset(path, X, y=y)
        ds = read_dataset(path, label_col="label")
        assert np.array_equal(ds.X, X)
        back, names = encode_labels(ds.labels_raw)
        assert names is None
        assert np.array_equal(back, y)

    def test_default_feature_names(self):
        buf = io.StringIO()
        write_dataset(buf, np.ones((1, 3)))
        assert buf.getvalue().splitlines()[0] == "x1,x2,x3"

    def test_name_count_checked(self):
        with pytest.raises(DataError):
            write_dataset(io.StringIO(), np.ones((1, 3)), feature_names=("a",))


class TestWritePredictions:
    def test_format_and_names(self):
        buf = io.StringIO()
        labels = np.array([2, 0, 1])
        scores = np.array([[1.0, 2.0], [0.5, 0.25], [3.0, -1.0]])
        min_rd = np.array([0.1, 9.0, 0.2])
        write_predictions_csv(buf, labels, scores, min_rd, label_names=("cat", "dog"))
        lines = buf.getvalue().splitlines()
        assert lines[0] == "row,predicted,min_rd,score_1,score_2"
        assert lines[1].split(",")[:2] == ["1", "dog"]
        assert lines[2].split(",")[:2] == ["2", "0"]  # outlier stays numeric
        assert lines[3].split(",")[:2] == ["3", "cat"]

    def test_numeric_labels_without_table(self):
        buf = io.StringIO()
        write_predictions_csv(buf, [1], np.array([[0.5, 1.5]]), [0.3])
        assert buf.getvalue().splitlines()[1].startswith("1,1,0.3,")

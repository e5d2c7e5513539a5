import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wardlasso.io import (
    MAGIC,
    read_binary,
    read_csv,
    read_index_set,
    read_matrix,
    read_vector,
    write_binary,
    write_csv,
    write_index_set,
    write_score_grid,
    write_vector,
)

finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=40)
@given(arrays(np.float64, st.tuples(st.integers(0, 6), st.integers(0, 6)), elements=finite))
def test_binary_round_trip_is_bit_exact(tmp_path_factory, X):
    path = tmp_path_factory.mktemp("bin") / "X.bin"
    write_binary(path, X)
    back = read_binary(path)
    assert back.shape == X.shape
    assert back.tobytes() == np.ascontiguousarray(X).tobytes()


def test_binary_layout(tmp_path):
    X = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    write_binary(tmp_path / "X.bin", X)
    raw = (tmp_path / "X.bin").read_bytes()
    assert raw[:8] == MAGIC
    assert int.from_bytes(raw[8:16], "little") == 2
    assert int.from_bytes(raw[16:24], "little") == 3
    np.testing.assert_array_equal(np.frombuffer(raw[24:], "<f8"), X.ravel())


def test_binary_corruption_detected(tmp_path):
    write_binary(tmp_path / "X.bin", np.ones((2, 2)))
    raw = (tmp_path / "X.bin").read_bytes()
    (tmp_path / "short.bin").write_bytes(raw[:-8])
    (tmp_path / "magic.bin").write_bytes(b"XXXXXXXX" + raw[8:])
    (tmp_path / "tiny.bin").write_bytes(raw[:5])
    for name in ("short.bin", "magic.bin", "tiny.bin"):
        with pytest.raises(ValueError):
            read_binary(tmp_path / name)


@settings(max_examples=30)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 4)), elements=finite))
def test_csv_round_trip_with_target(tmp_path_factory, X):
    path = tmp_path_factory.mktemp("csv") / "d.csv"
    y = X[:, 0] / 2
    write_csv(path, X, y)
    Xb, yb = read_csv(path, has_target=True)
    np.testing.assert_array_equal(Xb, X)
    np.testing.assert_array_equal(yb, y)


def test_read_matrix_detects_format(tmp_path):
    X = np.arange(6.0).reshape(3, 2)
    write_binary(tmp_path / "a.bin", X)
    write_csv(tmp_path / "a.csv", X)
    np.testing.assert_array_equal(read_matrix(tmp_path / "a.bin"), X)
    np.testing.assert_array_equal(read_matrix(tmp_path / "a.csv"), X)


def test_csv_errors(tmp_path):
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    (tmp_path / "empty.csv").write_text("")
    (tmp_path / "text.csv").write_text("a,b\n")
    for name in ("ragged.csv", "empty.csv", "text.csv"):
        with pytest.raises(ValueError):
            read_csv(tmp_path / name)


def test_vector_and_index_set(tmp_path):
    write_vector(tmp_path / "s.csv", np.array([0.5, 0.0, 1.0]), "score")
    name, v = read_vector(tmp_path / "s.csv")
    assert name == "score"
    np.testing.assert_array_equal(v, [0.5, 0.0, 1.0])
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "feature,score"
    write_index_set(tmp_path / "i.csv", [3, 7])
    np.testing.assert_array_equal(read_index_set(tmp_path / "i.csv"), [3, 7])
    (tmp_path / "bad.csv").write_text("feature,score\n1,0.5\n0,0.2\n")
    with pytest.raises(ValueError):
        read_vector(tmp_path / "bad.csv")
    with pytest.raises(ValueError):
        read_index_set(tmp_path / "s.csv")


def test_score_grid(tmp_path):
    write_score_grid(tmp_path / "g.csv", np.arange(6.0), (2, 3))
    np.testing.assert_array_equal(read_csv(tmp_path / "g.csv"), [[0, 1, 2], [3, 4, 5]])

import struct

import numpy as np
import pytest

from nsaclab.io import (
    SnapshotStore,
    read_field_binary,
    read_series_csv,
    sha256,
    write_field_binary,
    write_field_text,
    write_series_csv,
)
from nsaclab.model import PERTURBATION, StateTriple


def test_binary_layout(tmp_path):
    p = tmp_path / "f.bin"
    write_field_binary(p, [1.5, -2.0, 3.25])
    raw = p.read_bytes()
    assert len(raw) == 8 + 3 * 8
    assert struct.unpack("<Q", raw[:8]) == (3,)
    assert struct.unpack("<3d", raw[8:]) == (1.5, -2.0, 3.25)
    np.testing.assert_array_equal(read_field_binary(p), [1.5, -2.0, 3.25])


def test_binary_truncated(tmp_path):
    p = tmp_path / "f.bin"
    write_field_binary(p, np.arange(4.0))
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_field_binary(p)


def test_text_columns(tmp_path):
    p = tmp_path / "f.txt"
    x = np.linspace(0, 1, 5)
    write_field_text(p, x, x**2)
    data = np.loadtxt(p)
    np.testing.assert_allclose(data[:, 1], x**2)
    assert p.read_text().startswith("# x value")


def test_series_csv(tmp_path):
    p = tmp_path / "s.csv"
    t = np.array([0.0, 0.1, 0.2])
    v = np.array([1.0, 0.5, 1 / 3])
    write_series_csv(p, t, v, "L2", 1)
    lines = p.read_text().splitlines()
    assert lines[0] == "t,value,norm_kind,l"
    assert lines[1].endswith(",L2,1")
    t2, v2, kind, order = read_series_csv(p)
    np.testing.assert_array_equal(t2, t)
    np.testing.assert_array_equal(v2, v)
    assert (kind, order) == ("L2", 1)


def test_sha256(tmp_path):
    p = tmp_path / "a"
    p.write_bytes(b"abc")
    assert sha256(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_snapshot_store(tmp_path):
    store = SnapshotStore(tmp_path / "s")
    assert len(store) == 0 and store.last() is None
    for k in range(3):
        store.write(0.5 * k, StateTriple(np.full(4, k), np.zeros(4), np.ones(4), PERTURBATION))
    assert len(store) == 3
    t, s = store.last()
    assert t == 1.0 and s.representation == PERTURBATION
    np.testing.assert_array_equal(s.v, 2.0)
    # reopening sees the same index
    assert len(SnapshotStore(tmp_path / "s")) == 3
    assert store.load(1)[0] == 0.5

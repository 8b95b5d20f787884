"""On-disk formats: binary field snapshots, text columns, norm series CSV."""
from __future__ import annotations

import csv
import hashlib
import struct
from pathlib import Path

import numpy as np

from .model import StateTriple

_LEN = struct.Struct("<Q")


def write_field_binary(path, values) -> None:
    """Little-endian uint64 element count followed by float64 samples."""
    a = np.ascontiguousarray(values, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(_LEN.pack(a.size))
        fh.write(a.tobytes())


def read_field_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (count,) = _LEN.unpack(fh.read(_LEN.size))
        data = fh.read()
    if len(data) != 8 * count:
        raise ValueError(f"{path}: header says {count} values, found {len(data) // 8}")
    return np.frombuffer(data, dtype="<f8").copy()


def write_field_text(path, x, *columns, header=("x", "value")) -> None:
    np.savetxt(path, np.column_stack([x, *columns]), delimiter=" ", header=" ".join(header), comments="# ")


def write_series_csv(path, times, values, kind: str, order: int) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", "value", "norm_kind", "l"])
        for t, v in zip(times, values):
            out.writerow([repr(float(t)), repr(float(v)), kind, order])


def read_series_csv(path):
    times, values, kind, order = [], [], "L2", 0
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["t"]))
            values.append(float(row["value"]))
            kind, order = row["norm_kind"], int(row["l"])
    return np.array(times), np.array(values), kind, order


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class SnapshotStore:
    """Append-only directory of state snapshots.

    Each snapshot is one binary file holding ``[t, v..., u..., phi...]``;
    ``index.csv`` lists them in order and is appended after the file is
    fully written, so an interrupted run resumes from the last listed one.
    """

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.index = self.dir / "index.csv"

    def _entries(self):
        if not self.index.exists():
            return []
        with open(self.index) as fh:
            return [line.rstrip("\n").split(",") for line in fh if line.strip()]

    def write(self, t: float, state: StateTriple) -> Path:
        k = len(self._entries())
        name = f"snap_{k:06d}.bin"
        write_field_binary(self.dir / name, np.concatenate([[t], state.as_array().ravel()]))
        with open(self.index, "a") as fh:
            fh.write(f"{k},{t!r},{state.representation},{name}\n")
        return self.dir / name

    def __len__(self):
        return len(self._entries())

    def load(self, k: int) -> tuple[float, StateTriple]:
        _, _, rep, name = self._entries()[k]
        data = read_field_binary(self.dir / name)
        v, u, phi = data[1:].reshape(3, -1)
        return float(data[0]), StateTriple(v, u, phi, rep)

    def last(self) -> tuple[float, StateTriple] | None:
        n = len(self)
        return self.load(n - 1) if n else None

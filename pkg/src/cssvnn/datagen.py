"""Training datasets and their line-oriented JSON file format.

File layout: a header line ``{"format": ..., "normalization": ..., ...}``
followed by one record per line ``{"F": [9 reals], "P": [9 reals]?, "psi": r?}``.
Floats are written with Python's shortest round-trip repr, so a
save/load cycle returns bit-identical values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .refmodels import RefEnergy, ref_energy, ref_stress

FORMAT = "cssvnn-dataset/1"

# Principal-stretch axis of the nematic grid: 0.4:0.1:1.0 then 1.4:0.4:5.0.
NEMATIC_AXIS = tuple(np.round(np.concatenate([np.arange(4, 11) / 10, 1.0 + 0.4 * np.arange(1, 11)]), 12).tolist())
NEMATIC_SHIFT = 0.5


class DatasetError(ValueError):
    pass


@dataclass
class Record:
    f: np.ndarray
    p: np.ndarray | None = None
    psi: float | None = None


@dataclass
class Dataset:
    records: list[Record]
    normalization: dict | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def has_stress(self) -> bool:
        return bool(self.records) and all(r.p is not None for r in self.records)

    @property
    def has_energy(self) -> bool:
        return bool(self.records) and all(r.psi is not None for r in self.records)

    def f_array(self) -> np.ndarray:
        return np.stack([r.f for r in self.records])

    def p_array(self) -> np.ndarray:
        if not self.has_stress:
            raise DatasetError("dataset has no stress values")
        return np.stack([r.p for r in self.records])

    def psi_array(self) -> np.ndarray:
        if not self.has_energy:
            raise DatasetError("dataset has no energy values")
        return np.array([r.psi for r in self.records])

    def normalize_energy(self, raw: float) -> float:
        """Map a raw energy to the dataset's normalized scale (identity if none)."""
        n = self.normalization
        if not n:
            return raw
        return (raw - n["min"]) / (n["max"] - n["min"]) + n["shift"]


def _stress_load_cases() -> list[np.ndarray]:
    small = [v for v in np.round(np.arange(0.90, 1.10 + 1e-9, 0.02), 10) if abs(v - 1.0) > 1e-12]
    large_c = np.round(np.arange(0.70, 0.85 + 1e-9, 0.05), 10)
    large_t = np.round(np.arange(1.5, 10.0 + 1e-9, 0.5), 10)
    shear = np.round(np.arange(0.02, 0.10 + 1e-9, 0.02), 10)

    cases = [np.eye(3)]
    for v in list(small) + list(large_c) + list(large_t):
        f = np.eye(3)
        f[0, 0] = v
        cases.append(f)
    for v in small:
        cases.append(np.diag([v, v, 1.0]))
    for v in small:
        cases.append(np.diag([v, v, v]))
    for v in shear:
        f = np.eye(3)
        f[0, 1] = v
        cases.append(f)
    return cases


def gen_stress_dataset(ref: RefEnergy) -> Dataset:
    """Strain-stress tuples along the seven training load cases (58 records)."""
    if ref.kind not in ("ssve", "hencky"):
        raise DatasetError(f"stress datasets are generated for ssve or hencky, not {ref.kind!r}")
    records = [Record(f=f, p=ref_stress(ref, f)) for f in _stress_load_cases()]
    return Dataset(records, None, {"reference": ref.kind, "kind": "strain-stress"})


def gen_nematic_grid(ref: RefEnergy | None = None) -> Dataset:
    """Isochoric strain-energy grid, min-max normalized to [0, 1] and shifted by +0.5."""
    ref = ref or RefEnergy("nematic")
    if ref.kind != "nematic":
        raise DatasetError("nematic grid needs the nematic reference energy")
    fs, raw = [], []
    for l1 in NEMATIC_AXIS:
        for l2 in NEMATIC_AXIS:
            f = np.diag([l1, l2, 1.0 / (l1 * l2)])
            fs.append(f)
            raw.append(ref_energy(ref, f))
    raw = np.array(raw)
    lo, hi = float(raw.min()), float(raw.max())
    psi = (raw - lo) / (hi - lo) + NEMATIC_SHIFT
    records = [Record(f=f, psi=float(v)) for f, v in zip(fs, psi)]
    norm = {"min": lo, "max": hi, "shift": NEMATIC_SHIFT}
    meta = {"reference": "nematic", "kind": "strain-energy", "grid_axis": list(NEMATIC_AXIS)}
    return Dataset(records, norm, meta)


# ------------------------------------------------------------------- file I/O


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a).ravel()]


def dumps(ds: Dataset) -> str:
    header = {"format": FORMAT, "normalization": ds.normalization, "meta": ds.meta, "count": len(ds)}
    lines = [json.dumps(header, allow_nan=False)]
    for r in ds.records:
        rec = {"F": _floats(r.f)}
        if r.p is not None:
            rec["P"] = _floats(r.p)
        if r.psi is not None:
            rec["psi"] = float(r.psi)
        lines.append(json.dumps(rec, allow_nan=False))
    return "\n".join(lines) + "\n"


def save(ds: Dataset, path) -> None:
    Path(path).write_text(dumps(ds))


def checksum(ds: Dataset) -> str:
    return hashlib.sha256(dumps(ds).encode()).hexdigest()[:16]


def _mat(values, name: str, index: int) -> np.ndarray:
    if not isinstance(values, list) or len(values) != 9:
        n = len(values) if isinstance(values, list) else "non-list"
        raise DatasetError(f"record {index}: field {name} must have 9 entries, got {n}")
    try:
        a = np.array(values, dtype=np.float64)
    except (TypeError, ValueError):
        raise DatasetError(f"record {index}: field {name} has non-numeric entries") from None
    if not np.all(np.isfinite(a)):
        raise DatasetError(f"record {index}: field {name} has non-finite entries")
    return a.reshape(3, 3)


def loads(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DatasetError("missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed header: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise DatasetError("missing header")
    records = []
    for i, line in enumerate(lines[1:]):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"record {i}: malformed JSON ({exc})") from None
        if not isinstance(obj, dict) or "F" not in obj:
            raise DatasetError(f"record {i}: missing field F")
        rec = Record(f=_mat(obj["F"], "F", i))
        if "P" in obj:
            rec.p = _mat(obj["P"], "P", i)
        if "psi" in obj:
            psi = obj["psi"]
            if not isinstance(psi, (int, float)) or not np.isfinite(psi):
                raise DatasetError(f"record {i}: psi must be a finite number")
            rec.psi = float(psi)
        records.append(rec)
    count = header.get("count")
    if count is not None and count != len(records):
        raise DatasetError(f"header announces {count} records, file has {len(records)}")
    return Dataset(records, header.get("normalization"), header.get("meta") or {})


def load(path) -> Dataset:
    return loads(Path(path).read_text())

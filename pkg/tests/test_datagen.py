import json

import numpy as np
import pytest

from cssvnn import datagen
from cssvnn.datagen import DatasetError
from cssvnn.refmodels import RefEnergy
from cssvnn.tensor3 import det


@pytest.fixture(scope="module")
def ssve():
    return datagen.gen_stress_dataset(RefEnergy("ssve"))


def test_stress_dataset(ssve):
    assert len(ssve) == 58
    assert all(det(r.f) > 0 for r in ssve.records)
    for r in ssve.records:
        k = r.p @ r.f.T
        assert np.max(np.abs(k - k.T)) <= 1e-9
    h = datagen.gen_stress_dataset(RefEnergy("hencky"))
    np.testing.assert_array_equal(h.records[0].f, np.eye(3))
    np.testing.assert_array_equal(h.records[0].p, np.zeros((3, 3)))


def test_stress_dataset_is_deterministic(ssve):
    assert datagen.dumps(ssve) == datagen.dumps(datagen.gen_stress_dataset(RefEnergy("ssve")))


def test_stress_dataset_needs_stress_reference():
    with pytest.raises(DatasetError):
        datagen.gen_stress_dataset(RefEnergy("nematic"))


def test_nematic_grid():
    ds = datagen.gen_nematic_grid()
    NEMATIC = datagen.NEMATIC_AXIS
    assert len(NEMATIC) == 17 and len(ds) == 289
    assert NEMATIC[0] == 0.4 and NEMATIC[6] == 1.0 and NEMATIC[7] == 1.4 and NEMATIC[-1] == 5.0
    assert all(abs(det(r.f) - 1) <= 1e-12 for r in ds.records)
    psi = ds.psi_array()
    assert psi.min() == 0.5 and psi.max() == 1.5
    i = NEMATIC.index(0.5) * 17 + NEMATIC.index(1.0)
    np.testing.assert_allclose(np.diag(ds.records[i].f), [0.5, 1.0, 2.0])
    assert ds.normalization["min"] == pytest.approx(0.0, abs=1e-14)
    assert ds.normalize_energy(RefEnergy("nematic").energy(ds.records[i].f)) == pytest.approx(0.5)


def test_roundtrip_bit_identical(ssve, tmp_path):
    for ds in (ssve, datagen.gen_nematic_grid()):
        path = tmp_path / "d.jsonl"
        datagen.save(ds, path)
        back = datagen.load(path)
        assert len(back) == len(ds) and back.normalization == ds.normalization
        for a, b in zip(ds.records, back.records):
            np.testing.assert_array_equal(a.f, b.f)
            assert (a.p is None and b.p is None) or np.array_equal(a.p, b.p)
            assert a.psi == b.psi
        assert datagen.checksum(back) == datagen.checksum(ds)


def _file(records, count=None):
    header = {"format": datagen.FORMAT, "normalization": None, "meta": {}}
    if count is not None:
        header["count"] = count
    return "\n".join([json.dumps(header)] + [json.dumps(r) for r in records]) + "\n"


def test_malformed_files():
    eye = list(np.eye(3).ravel())
    with pytest.raises(DatasetError, match="missing header"):
        datagen.loads("")
    with pytest.raises(DatasetError, match="missing header"):
        datagen.loads(json.dumps({"F": eye}) + "\n")
    with pytest.raises(DatasetError, match="record 1"):
        datagen.loads(_file([{"F": eye}, {"F": eye[:8]}]))
    with pytest.raises(DatasetError, match="non-finite"):
        datagen.loads(_file([{"F": eye, "P": [float("nan")] * 9}]))
    with pytest.raises(DatasetError, match="psi"):
        datagen.loads(_file([{"F": eye, "psi": "x"}]))
    with pytest.raises(DatasetError, match="announces"):
        datagen.loads(_file([{"F": eye}], count=2))
    with pytest.raises(DatasetError, match="malformed"):
        datagen.loads(_file([]) + "{oops\n")


def test_missing_fields():
    ds = datagen.loads(_file([{"F": list(np.eye(3).ravel())}]))
    assert not ds.has_stress and not ds.has_energy
    with pytest.raises(DatasetError):
        ds.p_array()
    with pytest.raises(DatasetError):
        ds.psi_array()

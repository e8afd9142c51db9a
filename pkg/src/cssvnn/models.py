"""Shared machinery for network energies Psi(F) built on an ICNN.

A model maps F to a small set of network inputs ``X`` (shape ``(m, n_in)``)
and averages the network over them. Stresses follow from the chain rule
through ``dX/dF``. Both the CSSV model and the invariant baseline fit
this pattern, which is also what the training kernels consume.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import icnn
from .tensor3 import as_mat3


class EnergyModel:
    kind = "abstract"
    n_in = 0

    def __init__(self, params: icnn.IcnnParams, norm_offset: float = 0.0, metadata: dict | None = None):
        if params.arch.n_in != self.n_in:
            raise ValueError(
                f"{self.kind} model needs input size {self.n_in}, architecture {params.arch} has {params.arch.n_in}"
            )
        self.params = params
        self.norm_offset = float(norm_offset)
        self.metadata = dict(metadata or {})

    # -- subclass hooks -------------------------------------------------
    @classmethod
    def nonneg_inputs(cls) -> tuple[int, ...]:
        return ()

    def features(self, f) -> tuple[np.ndarray, np.ndarray]:
        """Network inputs ``X`` (m, n_in) and scaled derivatives ``D`` (m, n_in, 3, 3).

        ``D`` already carries the 1/m averaging weight, so that
        ``P = sum_j sum_c grad_j[c] * D[j, c]``.
        """
        raise NotImplementedError

    # -- evaluation -----------------------------------------------------
    @classmethod
    def create(cls, arch, seed: int) -> "EnergyModel":
        if isinstance(arch, str):
            arch = icnn.IcnnArch.parse(arch)
        return cls(icnn.init(arch, seed, cls.nonneg_inputs()))

    def copy(self) -> "EnergyModel":
        return type(self)(self.params.copy(), self.norm_offset, self.metadata)

    def raw_energy(self, f) -> float:
        x, _ = self.features(as_mat3(f))
        return float(np.mean(icnn.forward(self.params, x)))

    def energy(self, f) -> float:
        return self.raw_energy(f) - self.norm_offset

    def stress(self, f) -> np.ndarray:
        x, d = self.features(as_mat3(f))
        g = icnn.grad_input(self.params, x)
        return np.einsum("jc,jcab->ab", g, d)

    def calibrate_norm(self) -> "EnergyModel":
        """Store the raw energy at F = I as the offset, so energy(I) == 0."""
        self.norm_offset = self.raw_energy(np.eye(3))
        return self

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        from .symfeat import FEATURE_ORDER, FEATURE_VERSION

        doc = {"schema_version": icnn.SCHEMA_VERSION, "kind": self.kind}
        doc.update(icnn.params_to_dict(self.params))
        doc["norm_offset"] = self.norm_offset
        if self.kind == "cssv":
            doc["feature_order"] = FEATURE_ORDER
            doc["feature_version"] = FEATURE_VERSION
        doc["metadata"] = self.metadata
        return doc

    def save(self, path) -> None:
        Path(path).write_text(icnn.dumps_checkpoint(self.to_dict()) + "\n")


def model_class(kind: str):
    from .cssv import CssvModel
    from .pann import PannModel

    try:
        return {"cssv": CssvModel, "pann": PannModel}[kind]
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r} (expected 'cssv' or 'pann')") from None


def model_from_dict(doc: dict) -> EnergyModel:
    if doc.get("schema_version") != icnn.SCHEMA_VERSION:
        raise ValueError(f"unsupported checkpoint schema version {doc.get('schema_version')!r}")
    cls = model_class(doc.get("kind"))
    params = icnn.params_from_dict(doc)
    expected = cls.nonneg_inputs()
    if tuple(params.nonneg_inputs) != expected:
        raise ValueError(f"checkpoint non-negativity mask {params.nonneg_inputs} != {expected} for {cls.kind}")
    offset = float(doc.get("norm_offset", 0.0))
    if not np.isfinite(offset):
        raise ValueError("non-finite norm_offset")
    return cls(params, offset, doc.get("metadata"))


def load_model(path) -> EnergyModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a JSON checkpoint ({exc})") from None
    return model_from_dict(doc)

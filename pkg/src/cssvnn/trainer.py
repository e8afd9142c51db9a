"""Minibatch SGD with weight projection, in stress (Sobolev) and hull modes.

Each restart initializes from ``base_seed + r`` and reshuffles the
records every epoch from its own generator, so restarts are independent
jobs and may run in worker processes without changing any result.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels, icnn
from .datagen import Dataset, DatasetError
from .models import EnergyModel, model_class

log = logging.getLogger(__name__)

MODES = ("stress", "hull")


@dataclass
class Stage:
    learning_rate: float
    epochs: int


@dataclass
class TrainConfig:
    mode: str = "stress"
    stages: list[Stage] = field(default_factory=lambda: [Stage(1e-3, 1000), Stage(1e-4, 1000)])
    batch_size: int = 2
    restarts: int = 30
    base_seed: int = 0
    penalty_alpha: float = 1.0
    shuffle: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        self.stages = [s if isinstance(s, Stage) else Stage(**s) for s in self.stages]
        if not self.stages or any(s.epochs < 0 or s.learning_rate < 0 for s in self.stages):
            raise ValueError("stages need non-negative learning rates and epoch counts")
        if self.batch_size < 1 or self.restarts < 1:
            raise ValueError("batch_size and restarts must be >= 1")

    @classmethod
    def default(cls, mode: str = "stress", **overrides) -> "TrainConfig":
        if mode == "hull":
            overrides.setdefault("stages", [Stage(0.1, 1000)])
        return cls(mode=mode, **overrides)

    def scaled(self, factor: int) -> "TrainConfig":
        """Copy with epochs and restarts divided by ``factor`` (at least 1 each)."""
        stages = [Stage(s.learning_rate, max(1, s.epochs // factor)) for s in self.stages]
        return TrainConfig(
            self.mode, stages, self.batch_size, max(1, self.restarts // factor), self.base_seed, self.penalty_alpha, self.shuffle
        )


@dataclass
class RestartResult:
    restart: int
    seed: int
    final_loss: float
    failed: bool
    trajectory: list[float]
    seconds: float


@dataclass
class TrainReport:
    model_kind: str
    arch: str
    config: dict
    restarts: list[RestartResult]
    best_index: int
    wall_time: float
    notes: dict = field(default_factory=dict)

    @property
    def best_loss(self) -> float:
        return self.restarts[self.best_index].final_loss

    @property
    def final_losses(self) -> list[float]:
        return [r.final_loss for r in self.restarts]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["best_loss"] = self.best_loss
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["restart", "seed", "final_loss"])
            for r in self.restarts:
                w.writerow([r.restart, r.seed, repr(r.final_loss)])


# --------------------------------------------------------------- data staging


@dataclass
class Staged:
    """Per-record network inputs and derivative tensors, fixed for a dataset."""

    X: np.ndarray
    D: np.ndarray | None
    P: np.ndarray | None
    psi: np.ndarray | None


def stage(cls: type[EnergyModel], ds: Dataset, mode: str) -> Staged:
    if len(ds) == 0:
        raise DatasetError("dataset is empty")
    if mode == "stress" and not ds.has_stress:
        raise DatasetError("stress training needs P on every record")
    if mode == "hull" and not ds.has_energy:
        raise DatasetError("hull training needs psi on every record")
    proto = cls.__new__(cls)
    xs, dd = [], []
    for r in ds.records:
        x, d = proto.features(r.f)
        xs.append(x)
        dd.append(d.reshape(d.shape[0], d.shape[1], 9))
    X = np.ascontiguousarray(np.stack(xs))
    if mode == "stress":
        return Staged(X, np.ascontiguousarray(np.stack(dd)), ds.p_array().reshape(-1, 9).copy(), None)
    return Staged(X, None, None, ds.psi_array())


class _Net:
    """Flat-vector view of a parameter layout for the compiled kernels."""

    def __init__(self, template: icnn.IcnnParams):
        self.template = template
        self.offs = template.layer_offsets()
        self.hs = np.array(template.arch.hidden, dtype=np.int64)
        self.mask_idx = np.flatnonzero(template.nonneg_vector_mask()).astype(np.int64)


def dataset_loss(theta, net: _Net, st: Staged, mode: str, alpha: float = 1.0) -> float:
    idx = np.arange(st.X.shape[0], dtype=np.int64)
    g = np.zeros(0)
    if mode == "stress":
        return float(_kernels.stress_batch(theta, net.offs, net.hs, st.X, st.D, st.P, idx, g, False))
    return float(_kernels.hull_batch(theta, net.offs, net.hs, st.X, st.psi, 0.0, alpha, idx, g, False))


def stress_loss(model: EnergyModel, ds: Dataset) -> float:
    """(1/n) sum ||P_i - P_model(F_i)||_F^2."""
    if not ds.has_stress:
        raise DatasetError("stress loss needs P on every record")
    return float(np.mean([np.sum((r.p - model.stress(r.f)) ** 2) for r in ds.records]))


def hull_loss(model: EnergyModel, ds: Dataset, alpha: float = 1.0) -> float:
    """(1/n) sum (psi_i - E_i)^2 + alpha * sum max(E_i - psi_i, 0)."""
    if not ds.has_energy:
        raise DatasetError("hull loss needs psi on every record")
    e = np.array([model.energy(r.f) for r in ds.records])
    psi = ds.psi_array()
    return float(np.mean((psi - e) ** 2) + alpha * np.sum(np.maximum(e - psi, 0.0)))


# ------------------------------------------------------------------ training


def _run_restart(cls, arch, st: Staged, cfg: TrainConfig, r: int):
    seed = cfg.base_seed + r
    params = icnn.init(arch, seed, cls.nonneg_inputs())
    net = _Net(params)
    theta = params.to_vector()
    rng = np.random.default_rng([seed, 0x5EED])
    n = st.X.shape[0]
    t0 = time.perf_counter()
    traj: list[float] = []
    failed = False
    for stg in cfg.stages:
        for _ in range(stg.epochs):
            order = rng.permutation(n) if cfg.shuffle else np.arange(n)
            order = order.astype(np.int64)
            if cfg.mode == "stress":
                loss = _kernels.stress_epoch(theta, net.offs, net.hs, st.X, st.D, st.P, order, cfg.batch_size, stg.learning_rate, net.mask_idx)
            else:
                loss = _kernels.hull_epoch(
                    theta, net.offs, net.hs, st.X, st.psi, 0.0, cfg.penalty_alpha, order, cfg.batch_size, stg.learning_rate, net.mask_idx
                )
            traj.append(float(loss))
            if not (np.isfinite(loss) and np.all(np.isfinite(theta))):
                failed = True
                break
        if failed:
            break
    final = np.inf if failed else dataset_loss(theta, net, st, cfg.mode, cfg.penalty_alpha)
    if not np.isfinite(final):
        failed, final = True, np.inf
    res = RestartResult(r, seed, float(final), failed, [float(v) for v in traj], time.perf_counter() - t0)
    return res, theta


def _job(payload):
    return _run_restart(*payload)


def train(model_kind: str, arch, ds: Dataset, cfg: TrainConfig, workers: int = 1, progress=None):
    """Train ``cfg.restarts`` independent restarts and keep the lowest final loss.

    Returns ``(best_model, TrainReport)``. Restarts whose loss or weights
    become non-finite are marked failed and never selected.
    """
    cls = model_class(model_kind)
    if isinstance(arch, str):
        arch = icnn.IcnnArch.parse(arch)
    if arch.n_in != cls.n_in:
        raise ValueError(f"{model_kind} needs input size {cls.n_in}, architecture {arch} has {arch.n_in}")
    st = stage(cls, ds, cfg.mode)
    t0 = time.perf_counter()
    payloads = [(cls, arch, st, cfg, r) for r in range(cfg.restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(_job, payloads))
    else:
        outs = []
        for p in payloads:
            outs.append(_job(p))
            if progress:
                progress(outs[-1][0])
    results = [o[0] for o in outs]
    ok = [r for r in results if not r.failed]
    if not ok:
        raise RuntimeError("every restart diverged")
    best = min(ok, key=lambda r: (r.final_loss, r.restart))
    template = icnn.init(arch, 0, cls.nonneg_inputs())
    model = cls(template.from_vector(outs[best.restart][1]))
    if cfg.mode == "stress":
        model.calibrate_norm()
    model.metadata = {
        "arch": str(arch),
        "mode": cfg.mode,
        "seed": best.seed,
        "epochs": [s.epochs for s in cfg.stages],
        "learning_rates": [s.learning_rate for s in cfg.stages],
        "final_loss": best.final_loss,
    }
    if ds.normalization:
        model.metadata["energy_normalization"] = ds.normalization
    report = TrainReport(
        model_kind,
        str(arch),
        asdict(cfg),
        results,
        best.restart,
        time.perf_counter() - t0,
        notes={
            "optimizer": "plain SGD, no momentum",
            "shuffle": "records reshuffled every epoch per restart" if cfg.shuffle else "fixed order",
            "trajectory": "per epoch, mean of minibatch losses taken before each update",
            "failed_restarts": [r.restart for r in results if r.failed],
        },
    )
    return model, report

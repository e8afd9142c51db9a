"""Constraint checks on trained or freshly initialized energy models.

Every check is seeded and returns a :class:`CheckResult` carrying the
measured violation, its threshold and the seed, so reports can be
reproduced exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import icnn, symfeat
from .cssv import CssvModel, midpoint_defect
from .datagen import Dataset
from .models import EnergyModel
from .pann import PannModel
from .tensor3 import random_defgrad, random_rotation, signed_svd

THRESHOLDS = {
    "frame_indifference": 1e-8,
    "isotropy": 1e-8,
    "pi3_invariance": 1e-12,
    "angular_momentum": 1e-8,
    "stress_consistency": 1e-5,
    "polyconvexity_lift": 1e-9,
    "hull_feasibility": 5e-3,
}


@dataclass
class CheckResult:
    name: str
    trials: int
    value: float
    threshold: float
    seed: int

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.threshold)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<20} trials={self.trials:<6d} violation={self.value:.3e} threshold={self.threshold:.1e} {status}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError("trials must be >= 1")


def check_frame_indifference(model: EnergyModel, trials: int = 100, seed: int = 0) -> float:
    """max |Psi(QF) - Psi(F)| / (1 + |Psi(F)|)."""
    _check_trials(trials)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f, q = random_defgrad(rng), random_rotation(rng)
        e = model.energy(f)
        worst = max(worst, abs(model.energy(q @ f) - e) / (1.0 + abs(e)))
    return worst


def check_isotropy(model: EnergyModel, trials: int = 100, seed: int = 0) -> float:
    """max |Psi(FQ) - Psi(F)| / (1 + |Psi(F)|)."""
    _check_trials(trials)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f, q = random_defgrad(rng), random_rotation(rng)
        e = model.energy(f)
        worst = max(worst, abs(model.energy(f @ q) - e) / (1.0 + abs(e)))
    return worst


def check_pi3_invariance(model: EnergyModel, trials: int = 100, seed: int = 0) -> float:
    """Energy spread over the 24 signed permutations of nu (CSSV only; 0 for invariant models)."""
    _check_trials(trials)
    if not isinstance(model, CssvModel):
        return 0.0
    rng = np.random.default_rng(seed)
    group = symfeat.pi3_group()
    worst = 0.0
    for _ in range(trials):
        nu = rng.uniform(-3.0, 3.0, size=3)
        e = model.energy_from_nu(nu)
        for g in group:
            worst = max(worst, abs(model.energy_from_nu(g.act(nu)) - e) / (1.0 + abs(e)))
    return worst


def check_angular_momentum(model: EnergyModel, trials: int = 100, seed: int = 0) -> float:
    """max ||P F^T - (P F^T)^T|| / (1 + ||P F^T||)."""
    _check_trials(trials)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f = random_defgrad(rng)
        k = model.stress(f) @ f.T
        worst = max(worst, np.linalg.norm(k - k.T) / (1.0 + np.linalg.norm(k)))
    return worst


def fd_stress(energy, f, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of F."""
    f = np.asarray(f, dtype=np.float64)
    g = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            fp, fm = f.copy(), f.copy()
            fp[a, b] += h
            fm[a, b] -= h
            g[a, b] = (energy(fp) - energy(fm)) / (2.0 * h)
    return g


def min_gap(f) -> float:
    """Smallest relative gap between singular values of F."""
    s = np.abs(signed_svd(f).nu)
    return float(min(s[0] - s[1], s[1] - s[2]) / max(s[0], 1e-300))


def check_stress_consistency(model: EnergyModel, trials: int = 100, seed: int = 0, gap: float = 1e-3) -> float:
    """max ||P - P_fd|| / (1 + ||P||) over random F whose singular values are separated by ``gap``."""
    _check_trials(trials)
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < trials:
        f = random_defgrad(rng)
        if min_gap(f) < gap:
            continue
        p = model.stress(f)
        worst = max(worst, np.linalg.norm(p - fd_stress(model.energy, f)) / (1.0 + np.linalg.norm(p)))
        done += 1
    return worst


def check_polyconvexity_lift(model: EnergyModel, trials: int = 1000, seed: int = 0, box: float = 3.0) -> float:
    """Convexity certificate of the network over its raw inputs.

    CSSV: midpoint-convexity defect on [-box, box]^7 plus any negative
    recurrent weight. Baseline: additionally the defect of monotonicity in
    I1 and I2, probed on increasing steps, with invariant-space samples
    drawn from [0, box^2]^2 x [-box, box].
    """
    _check_trials(trials)
    rng = np.random.default_rng(seed)
    weights = model.params.nonneg_violation()
    if isinstance(model, PannModel):
        lo = np.array([0.0, 0.0, -box])
        hi = np.array([box * box, box * box, box])
        x = rng.uniform(lo, hi, size=(trials, 3))
        y = rng.uniform(lo, hi, size=(trials, 3))
        step = rng.uniform(0.0, 1.0, size=(trials, 3)) * np.array([1.0, 1.0, 0.0])
        mono = float(np.max(icnn.forward(model.params, x) - icnn.forward(model.params, x + step)))
        return max(weights, midpoint_defect(model.params, x, y), mono, 0.0)
    x = rng.uniform(-box, box, size=(trials, 7))
    y = rng.uniform(-box, box, size=(trials, 7))
    return max(weights, midpoint_defect(model.params, x, y), 0.0)


def check_hull_feasibility(model: EnergyModel, ds: Dataset) -> tuple[float, int]:
    """Largest overshoot max(Psi_model - Psi_data) and number of records above the data."""
    over = np.array([model.energy(r.f) - r.psi for r in ds.records])
    return float(over.max()), int(np.sum(over > 0.0))


def run_suite(model: EnergyModel, trials: int = 1000, seed: int = 0, hull_data: Dataset | None = None) -> list[CheckResult]:
    _check_trials(trials)
    out = [
        CheckResult("frame_indifference", trials, check_frame_indifference(model, trials, seed), THRESHOLDS["frame_indifference"], seed),
        CheckResult("isotropy", trials, check_isotropy(model, trials, seed), THRESHOLDS["isotropy"], seed),
    ]
    if isinstance(model, CssvModel):
        out.append(CheckResult("pi3_invariance", trials, check_pi3_invariance(model, trials, seed), THRESHOLDS["pi3_invariance"], seed))
    out += [
        CheckResult("angular_momentum", trials, check_angular_momentum(model, trials, seed), THRESHOLDS["angular_momentum"], seed),
        CheckResult("stress_consistency", trials, check_stress_consistency(model, trials, seed), THRESHOLDS["stress_consistency"], seed),
        CheckResult("polyconvexity_lift", trials, check_polyconvexity_lift(model, trials, seed), THRESHOLDS["polyconvexity_lift"], seed),
    ]
    if hull_data is not None:
        overshoot, _ = check_hull_feasibility(model, hull_data)
        out.append(CheckResult("hull_feasibility", len(hull_data), overshoot, THRESHOLDS["hull_feasibility"], seed))
    return out


def format_report(results: list[CheckResult]) -> str:
    return "\n".join(r.line() for r in results)


def report_json(results: list[CheckResult]) -> str:
    return json.dumps({"checks": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}, indent=1)

"""Invariant-based baseline: an ICNN over (I1, I2, I3).

I1 = F:F, I2 = cof F : cof F and I3 = det F. The network must be
non-decreasing in I1 and I2, so their pass-through weights are kept
non-negative in every layer; I3 stays unconstrained.
"""

from __future__ import annotations

import numpy as np

from .models import EnergyModel
from .tensor3 import cof, det


def invariants_of(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    cf = cof(f)
    return np.array([np.sum(f * f), np.sum(cf * cf), det(f)])


def invariant_derivatives(f) -> np.ndarray:
    """dI_c/dF stacked as shape (3, 3, 3)."""
    f = np.asarray(f, dtype=np.float64)
    i1 = np.sum(f * f)
    return np.stack([2.0 * f, 2.0 * (i1 * f - f @ f.T @ f), cof(f)])


class PannModel(EnergyModel):
    kind = "pann"
    n_in = 3

    @classmethod
    def nonneg_inputs(cls):
        return (0, 1)

    def features(self, f):
        return invariants_of(f)[None, :], invariant_derivatives(f)[None, :, :, :]

    def monotone_violation(self) -> float:
        """Most negative entry among the weights that must be non-negative."""
        return self.params.nonneg_violation()

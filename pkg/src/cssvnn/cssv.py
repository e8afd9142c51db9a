"""Convex signed singular value network energy.

Psi(F) is the average of one ICNN over the 24 signed permutations of the
lifted signed singular values of F, which makes it frame-indifferent,
isotropic and polyconvex by construction.
"""

from __future__ import annotations

import numpy as np

from . import icnn, symfeat
from .models import EnergyModel
from .tensor3 import signed_svd, ssv_frames


def cssv_features(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = signed_svd(f)
    x = symfeat.all_variants(s.nu)
    jac = symfeat.all_jacobians(s.nu)  # (24, 7, 3)
    d = np.einsum("jck,kab->jcab", jac, ssv_frames(s)) / symfeat.N_VARIANTS
    return x, d


class CssvModel(EnergyModel):
    kind = "cssv"
    n_in = 7

    def features(self, f):
        return cssv_features(f)

    def energy_from_nu(self, nu) -> float:
        """Network energy as a function of signed singular values directly."""
        x = symfeat.all_variants(nu)
        return float(np.mean(icnn.forward(self.params, x))) - self.norm_offset

    def convexity_probe(self, trials: int, box: float = 3.0, seed: int = 0) -> float:
        """Largest midpoint-convexity defect of the raw 7-input network.

        Returns max over random pairs in [-box, box]^7 of
        NN((x+y)/2) - (NN(x) + NN(y))/2; non-positive for a convex network.
        """
        if trials < 1:
            raise ValueError("trials must be >= 1")
        rng = np.random.default_rng(seed)
        x = rng.uniform(-box, box, size=(trials, 7))
        y = rng.uniform(-box, box, size=(trials, 7))
        return midpoint_defect(self.params, x, y)


def midpoint_defect(params: icnn.IcnnParams, x, y) -> float:
    fm = icnn.forward(params, 0.5 * (x + y))
    return float(np.max(fm - 0.5 * (icnn.forward(params, x) + icnn.forward(params, y))))

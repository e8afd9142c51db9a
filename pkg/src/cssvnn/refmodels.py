"""Analytical ground-truth energies and their first Piola-Kirchhoff stresses (MPa)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor3 import as_mat3, cof, det, signed_svd, ssv_frames

KINDS = ("ssve", "hencky", "nematic")


@dataclass(frozen=True)
class RefEnergy:
    """Reference energy with its parameters.

    hencky uses Lame constants ``lam`` and ``mu``; nematic uses the
    exponent ``p`` and preferred stretches ``gamma`` (ascending, product 1).
    """

    kind: str
    lam: float = 1.0
    mu: float = 1.0
    p: float = 2.0
    gamma: tuple[float, float, float] = (0.5, 1.0, 2.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown reference energy {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.kind == "nematic":
            g = self.gamma
            if not (0 < g[0] <= g[1] <= g[2]) or abs(g[0] * g[1] * g[2] - 1.0) > 1e-12:
                raise ValueError(f"gamma must be ascending, positive, with product 1; got {g}")
            if self.p < 2:
                raise ValueError(f"nematic exponent must be >= 2, got {self.p}")

    def energy(self, f) -> float:
        return ref_energy(self, f)

    def stress(self, f) -> np.ndarray:
        return ref_stress(self, f)


def _check(ref: RefEnergy, f: np.ndarray) -> float:
    d = det(f)
    if ref.kind == "ssve" and d == 0.0:
        raise ValueError("ssve energy needs det F != 0")
    if ref.kind == "hencky" and d <= 0.0:
        raise ValueError(f"hencky energy needs det F > 0, got det F = {d:.6g}")
    if ref.kind == "nematic" and abs(d - 1.0) > 1e-9:
        raise ValueError(f"nematic energy is only finite for isochoric F; got det F = {d:.12g}")
    return d


def _nematic_order(nu: np.ndarray) -> np.ndarray:
    """Indices sorting the stretches ascending, so lam[order[i]] pairs with gamma[i]."""
    return np.argsort(np.abs(nu), kind="stable")


def ref_energy(ref: RefEnergy, f) -> float:
    f = as_mat3(f)
    d = _check(ref, f)
    nu = signed_svd(f).nu
    lam = np.abs(nu)
    if ref.kind == "ssve":
        return float(np.sum(lam) + 1.0 / (10.0 * d**10))
    if ref.kind == "hencky":
        e = np.log(lam)
        return float(0.5 * ref.lam * np.sum(e) ** 2 + ref.mu * np.sum(e * e))
    stretch = lam[_nematic_order(nu)]
    return float(np.sum((stretch / np.asarray(ref.gamma)) ** ref.p) - 3.0)


def ref_stress(ref: RefEnergy, f) -> np.ndarray:
    f = as_mat3(f)
    d = _check(ref, f)
    s = signed_svd(f)
    frames = ssv_frames(s)
    if ref.kind == "ssve":
        return np.einsum("k,kab->ab", np.sign(s.nu), frames) - d ** (-11) * cof(f)
    if ref.kind == "hencky":
        lam = s.nu  # det F > 0 keeps every signed value positive
        e = np.log(lam)
        dpsi = (ref.lam * np.sum(e) + 2.0 * ref.mu * e) / lam
        return np.einsum("k,kab->ab", dpsi, frames)
    lam = np.abs(s.nu)
    order = _nematic_order(s.nu)
    gam = np.empty(3)
    gam[order] = ref.gamma
    dpsi = ref.p * lam ** (ref.p - 1) / gam**ref.p * np.sign(s.nu)
    return np.einsum("k,kab->ab", dpsi, frames)

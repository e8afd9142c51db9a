"""One-parameter load paths for evaluating fitted models."""

from __future__ import annotations

import numpy as np

# name -> (training lower bound, upper bound, stress component reported)
PATHS = {
    "uniaxial": (0.7, 10.0, (0, 0)),
    "volumetric": (0.9, 1.1, (0, 0)),
    "shear": (0.0, 0.1, (0, 1)),
}
MIN_STRETCH = 0.05


def defgrad(path: str, t: float) -> np.ndarray:
    f = np.eye(3)
    if path == "uniaxial":
        f[0, 0] = t
    elif path == "volumetric":
        f *= t
    elif path == "shear":
        f[0, 1] = t
    else:
        raise ValueError(f"unknown load path {path!r}; choose from {', '.join(PATHS)}")
    return f


def path_range(path: str, extend: float = 1.0) -> tuple[float, float]:
    """Load-parameter interval, widened about the undeformed state by ``extend``."""
    if path not in PATHS:
        raise ValueError(f"unknown load path {path!r}; choose from {', '.join(PATHS)}")
    if extend <= 0:
        raise ValueError("range extension factor must be positive")
    lo, hi, _ = PATHS[path]
    if path == "shear":
        return 0.0, extend * hi
    return max(MIN_STRETCH, 1.0 - extend * (1.0 - lo)), 1.0 + extend * (hi - 1.0)


def sample(path: str, n: int, extend: float = 1.0) -> np.ndarray:
    if n < 1:
        raise ValueError("sample count must be >= 1")
    lo, hi = path_range(path, extend)
    return np.linspace(lo, hi, n)


def component(path: str) -> tuple[int, int]:
    return PATHS[path][2]

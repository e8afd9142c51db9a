"""3x3 tensor algebra and the signed singular value decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_mat3(m) -> np.ndarray:
    """Coerce input to a finite float64 3x3 array."""
    a = np.asarray(m, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def det(m) -> float:
    """Cofactor-expansion determinant."""
    a = np.asarray(m, dtype=np.float64)
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def cof(m) -> np.ndarray:
    """Cofactor matrix (signed 2x2 minors); equals det(m) * inv(m).T when invertible."""
    a = np.asarray(m, dtype=np.float64)
    c = np.empty((3, 3))
    c[0, 0] = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    c[0, 1] = a[1, 2] * a[2, 0] - a[1, 0] * a[2, 2]
    c[0, 2] = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    c[1, 0] = a[0, 2] * a[2, 1] - a[0, 1] * a[2, 2]
    c[1, 1] = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    c[1, 2] = a[0, 1] * a[2, 0] - a[0, 0] * a[2, 1]
    c[2, 0] = a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]
    c[2, 1] = a[0, 2] * a[1, 0] - a[0, 0] * a[1, 2]
    c[2, 2] = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return c


def frob(m) -> float:
    return float(np.sqrt(np.sum(np.square(m))))


@dataclass(frozen=True)
class SignedSvd:
    """F = u_hat @ diag(nu) @ v_hat.T with both factors in SO(3).

    ``nu`` is ordered nu[0] >= nu[1] >= |nu[2]|; any reflection in F is
    carried by the sign of nu[2].
    """

    u_hat: np.ndarray
    v_hat: np.ndarray
    nu: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u_hat * self.nu) @ self.v_hat.T


def signed_svd(f) -> SignedSvd:
    """Signed singular value decomposition of a 3x3 matrix.

    Backed by LAPACK's SVD. Whenever a left or right orthogonal factor has
    determinant -1 its third column is negated together with nu[2], so
    both returned factors are proper rotations.
    """
    a = as_mat3(f)
    u, s, vt = np.linalg.svd(a)
    v = vt.T.copy()
    u = u.copy()
    nu = s.copy()
    if np.linalg.det(u) < 0.0:
        u[:, 2] = -u[:, 2]
        nu[2] = -nu[2]
    if np.linalg.det(v) < 0.0:
        v[:, 2] = -v[:, 2]
        nu[2] = -nu[2]
    return SignedSvd(u_hat=u, v_hat=v, nu=nu)


def ssv_frames(s: SignedSvd) -> np.ndarray:
    """The rank-one tensors u_k (x) v_k, stacked as shape (3, 3, 3).

    Entry ``[k]`` is d nu_k / dF at points with distinct singular values.
    At ties the split between tied k is not unique, only their sum is.
    """
    return np.einsum("ik,jk->kij", s.u_hat, s.v_hat)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_defgrad(rng: np.random.Generator, scale: float = 0.5, min_det: float = 0.05) -> np.ndarray:
    """Random deformation gradient I + scale*G, rejected until det > min_det."""
    while True:
        f = np.eye(3) + scale * rng.standard_normal((3, 3))
        if det(f) > min_det:
            return f

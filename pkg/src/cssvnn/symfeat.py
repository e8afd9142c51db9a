"""Elementary-polynomial lift of signed singular values and the group Pi_3.

The 24 inputs fed to the network are ``lift(tau(nu))`` for the 24
orientation-preserving signed permutations ``tau``. Their order follows
the reference variant table: six permutations, each with the sign patterns
(+++), (--+), (-+-), (+--).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

FEATURE_ORDER = "nu1,nu2,nu3,nu1nu2,nu1nu3,nu2nu3,nu1nu2nu3"
FEATURE_VERSION = 1
N_VARIANTS = 24

# 0-based index maps; x^(j) takes (nu[p0], nu[p1], nu[p2]) before signs.
_PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (2, 0, 1), (1, 2, 0), (2, 1, 0))
_SIGNS = ((1, 1, 1), (-1, -1, 1), (-1, 1, -1), (1, -1, -1))


@dataclass(frozen=True)
class Pi3Element:
    perm: tuple[int, int, int]
    signs: tuple[int, int, int]

    def __post_init__(self):
        if self.signs[0] * self.signs[1] * self.signs[2] != 1:
            raise ValueError("sign product must be +1")

    def act(self, nu) -> np.ndarray:
        nu = np.asarray(nu, dtype=np.float64)
        return np.asarray(self.signs, dtype=np.float64) * nu[list(self.perm)]

    def matrix(self) -> np.ndarray:
        """3x3 signed permutation matrix M with act(nu) = M @ nu."""
        m = np.zeros((3, 3))
        for r, (c, s) in enumerate(zip(self.perm, self.signs)):
            m[r, c] = s
        return m


def pi3_group() -> list[Pi3Element]:
    return [Pi3Element(p, s) for p, s in product(_PERMS, _SIGNS)]


_GROUP = pi3_group()
_MATS = np.stack([g.matrix() for g in _GROUP])  # (24, 3, 3)


def lift(nu) -> np.ndarray:
    n1, n2, n3 = np.asarray(nu, dtype=np.float64)
    return np.array([n1, n2, n3, n1 * n2, n1 * n3, n2 * n3, n1 * n2 * n3])


def lift_jacobian(nu) -> np.ndarray:
    """d lift / d nu, shape (7, 3)."""
    n1, n2, n3 = np.asarray(nu, dtype=np.float64)
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [n2, n1, 0.0],
            [n3, 0.0, n1],
            [0.0, n3, n2],
            [n2 * n3, n1 * n3, n1 * n2],
        ]
    )


def _check_index(j: int) -> None:
    if not 1 <= j <= N_VARIANTS:
        raise IndexError(f"variant index must be in 1..24, got {j}")


def apply_variant(j: int, nu) -> np.ndarray:
    """x^(j) for 1-based table row ``j``."""
    _check_index(j)
    return lift(_GROUP[j - 1].act(nu))


def variant_jacobian(j: int, nu) -> np.ndarray:
    """d x^(j) / d nu, shape (7, 3)."""
    _check_index(j)
    g = _GROUP[j - 1]
    return lift_jacobian(g.act(nu)) @ g.matrix()


def all_variants(nu) -> np.ndarray:
    """All 24 inputs stacked, shape (24, 7)."""
    t = _MATS @ np.asarray(nu, dtype=np.float64)
    n1, n2, n3 = t[:, 0], t[:, 1], t[:, 2]
    return np.stack([n1, n2, n3, n1 * n2, n1 * n3, n2 * n3, n1 * n2 * n3], axis=1)


def all_jacobians(nu) -> np.ndarray:
    """All 24 Jacobians d x^(j)/d nu stacked, shape (24, 7, 3)."""
    t = _MATS @ np.asarray(nu, dtype=np.float64)
    n1, n2, n3 = t[:, 0], t[:, 1], t[:, 2]
    one, zero = np.ones(24), np.zeros(24)
    dl = np.stack(
        [
            np.stack([one, zero, zero], 1),
            np.stack([zero, one, zero], 1),
            np.stack([zero, zero, one], 1),
            np.stack([n2, n1, zero], 1),
            np.stack([n3, zero, n1], 1),
            np.stack([zero, n3, n2], 1),
            np.stack([n2 * n3, n1 * n3, n1 * n2], 1),
        ],
        axis=1,
    )
    return dl @ _MATS


def _table_rows(n1, n2, n3):
    """The 24 rows written out term by term, as printed."""
    p = n1 * n2 * n3
    return [
        (n1, n2, n3, n1 * n2, n1 * n3, n2 * n3, p),
        (-n1, -n2, n3, n1 * n2, -n1 * n3, -n2 * n3, p),
        (-n1, n2, -n3, -n1 * n2, n1 * n3, -n2 * n3, p),
        (n1, -n2, -n3, -n1 * n2, -n1 * n3, n2 * n3, p),
        (n1, n3, n2, n1 * n3, n1 * n2, n2 * n3, p),
        (-n1, -n3, n2, n1 * n3, -n1 * n2, -n2 * n3, p),
        (-n1, n3, -n2, -n1 * n3, n1 * n2, -n2 * n3, p),
        (n1, -n3, -n2, -n1 * n3, -n1 * n2, n2 * n3, p),
        (n2, n1, n3, n1 * n2, n2 * n3, n1 * n3, p),
        # Printed with +n2n3, +n1n3, which contradicts its own first three
        # entries (entry 5 must be entry 1 * entry 3); signs corrected.
        (-n2, -n1, n3, n1 * n2, -n2 * n3, -n1 * n3, p),
        (-n2, n1, -n3, -n1 * n2, n2 * n3, -n1 * n3, p),
        (n2, -n1, -n3, -n1 * n2, -n2 * n3, n1 * n3, p),
        (n3, n1, n2, n3 * n1, n3 * n2, n1 * n2, p),
        (-n3, -n1, n2, n3 * n1, -n3 * n2, -n1 * n2, p),
        (-n3, n1, -n2, -n3 * n1, n3 * n2, -n1 * n2, p),
        (n3, -n1, -n2, -n3 * n1, -n3 * n2, n1 * n2, p),
        (n2, n3, n1, n2 * n3, n2 * n1, n3 * n1, p),
        (-n2, -n3, n1, n2 * n3, -n2 * n1, -n3 * n1, p),
        (-n2, n3, -n1, -n2 * n3, n2 * n1, -n3 * n1, p),
        (n2, -n3, -n1, -n2 * n3, -n2 * n1, n3 * n1, p),
        (n3, n2, n1, n3 * n2, n3 * n1, n2 * n1, p),
        (-n3, -n2, n1, n3 * n2, -n3 * n1, -n2 * n1, p),
        (-n3, n2, -n1, -n3 * n2, n3 * n1, -n2 * n1, p),
        (n3, -n2, -n1, -n3 * n2, -n3 * n1, n2 * n1, p),
    ]


def table_selfcheck(nu=(1.3, -0.7, 2.9)) -> list[bool]:
    """Per-row agreement of the signed-permutation encoding with the written-out table.

    A row passes when it matches ``apply_variant`` and is itself a valid
    lift (entries 4-7 are the products of entries 1-3).
    """
    ok = []
    for j, row in enumerate(_table_rows(*nu), start=1):
        row = np.array(row)
        # Only reassociation of the triple product may differ.
        same = np.allclose(apply_variant(j, nu), row, rtol=1e-15, atol=0.0)
        ok.append(bool(same and np.allclose(lift(row[:3]), row, rtol=1e-15, atol=0.0)))
    return ok


if not all(table_selfcheck()):
    raise RuntimeError("Pi_3 variant table failed its self-check")

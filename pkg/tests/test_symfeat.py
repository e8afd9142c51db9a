import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cssvnn import symfeat

from .conftest import fd_grad, rel_err

reals = st.floats(-5, 5, allow_nan=False)
nus = st.tuples(reals, reals, reals).map(np.array)


@pytest.mark.parametrize(
    "nu,expected",
    [((1, 1, 1), (1,) * 7), ((2, 1, 1), (2, 1, 1, 2, 2, 1, 2)), ((1, 2, 3), (1, 2, 3, 2, 3, 6, 6))],
)
def test_lift_examples(nu, expected):
    np.testing.assert_array_equal(symfeat.lift(nu), expected)


def test_group_structure():
    g = symfeat.pi3_group()
    assert len(g) == 24
    assert g[0].perm == (0, 1, 2) and g[0].signs == (1, 1, 1)
    assert all(np.prod(e.signs) == 1 for e in g)
    mats = {tuple(e.matrix().ravel()) for e in g}
    assert len(mats) == 24
    for a in g:
        for b in g:
            assert tuple((a.matrix() @ b.matrix()).ravel()) in mats


def test_rejects_odd_sign_pattern():
    with pytest.raises(ValueError):
        symfeat.Pi3Element((0, 1, 2), (-1, 1, 1))


def test_variant_examples():
    nu = (1.0, 2.0, 3.0)
    np.testing.assert_array_equal(symfeat.apply_variant(2, nu), (-1, -2, 3, 2, -3, -6, 6))
    np.testing.assert_array_equal(symfeat.apply_variant(9, nu), (2, 1, 3, 2, 6, 3, 6))
    np.testing.assert_array_equal(symfeat.apply_variant(1, (0.3, -2, 5)), symfeat.lift((0.3, -2, 5)))
    for j in (0, 25):
        with pytest.raises(IndexError):
            symfeat.apply_variant(j, nu)


def test_table_selfcheck_all_rows():
    ok = symfeat.table_selfcheck()
    assert len(ok) == 24 and all(ok)


def test_jacobian_examples():
    np.testing.assert_array_equal(symfeat.variant_jacobian(1, (1, 1, 1))[6], (1, 1, 1))
    np.testing.assert_array_equal(symfeat.variant_jacobian(1, (0, 0, 0))[3:], np.zeros((4, 3)))


def test_jacobian_matches_fd(rng):
    for _ in range(30):
        j = int(rng.integers(1, 25))
        nu = rng.uniform(-3, 3, size=3)
        fd = np.stack([fd_grad(lambda v: symfeat.apply_variant(j, v)[c], nu) for c in range(7)])
        assert rel_err(symfeat.variant_jacobian(j, nu), fd) <= 1e-7


@settings(max_examples=50, deadline=None)
@given(nus)
def test_vectorized_forms_match(nu):
    np.testing.assert_array_equal(symfeat.all_variants(nu), np.stack([symfeat.apply_variant(j, nu) for j in range(1, 25)]))
    np.testing.assert_allclose(
        symfeat.all_jacobians(nu), np.stack([symfeat.variant_jacobian(j, nu) for j in range(1, 25)]), rtol=1e-14, atol=1e-14
    )


@settings(max_examples=50, deadline=None)
@given(nus)
def test_variant_set_is_orbit_invariant(nu):
    # Acting on nu only permutes the 24 rows.
    base = {tuple(np.round(r, 9)) for r in symfeat.all_variants(nu)}
    for g in symfeat.pi3_group():
        assert {tuple(np.round(r, 9)) for r in symfeat.all_variants(g.act(nu))} == base

import numpy as np
import pytest

from cssvnn.tensor3 import as_mat3, cof, det, random_defgrad, random_rotation, signed_svd, ssv_frames

from .conftest import rel_err


@pytest.mark.parametrize("m,expected", [(np.eye(3), 1.0), (np.diag([2.0, 3, 4]), 24.0), (np.diag([-1.0, 1, 1]), -1.0)])
def test_det_examples(m, expected):
    assert det(m) == pytest.approx(expected, abs=1e-15)


def test_cof_examples(rng):
    np.testing.assert_array_equal(cof(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(cof(np.diag([2.0, 3, 4])), np.diag([12.0, 8, 6]))
    for _ in range(50):
        m = rng.normal(size=(3, 3))
        assert rel_err(cof(m), det(m) * np.linalg.inv(m).T) <= 1e-12


def test_as_mat3_rejects_bad_input():
    with pytest.raises(ValueError):
        as_mat3(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        as_mat3(np.full((3, 3), np.nan))


def test_signed_svd_examples():
    s = signed_svd(np.eye(3))
    np.testing.assert_allclose(s.nu, [1, 1, 1])
    np.testing.assert_allclose(s.u_hat, s.v_hat, atol=1e-15)
    np.testing.assert_allclose(signed_svd(np.diag([2.0, 0.5, 1])).nu, [2, 1, 0.5])
    s = signed_svd(np.diag([-1.0, 1, 1]))
    np.testing.assert_allclose(s.nu, [1, 1, -1])
    assert np.prod(s.nu) == pytest.approx(-1.0)


def test_signed_svd_reconstruction_and_rotations(rng):
    for _ in range(100):
        f = rng.uniform(-2, 2, size=(3, 3))
        s = signed_svd(f)
        assert np.max(np.abs(s.reconstruct() - f)) <= 1e-11
        for r in (s.u_hat, s.v_hat):
            assert det(r) == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert s.nu[0] >= s.nu[1] >= abs(s.nu[2])
        assert np.sign(np.prod(s.nu)) == np.sign(det(f))


def test_frames():
    np.testing.assert_allclose(ssv_frames(signed_svd(np.eye(3))), np.stack([np.diag(e) for e in np.eye(3)]), atol=1e-15)
    f = np.diag([3.0, 2, 1])
    h = 1e-6
    fp, fm = f.copy(), f.copy()
    fp[0, 0] += h
    fm[0, 0] -= h
    assert (signed_svd(fp).nu[0] - signed_svd(fm).nu[0]) / (2 * h) == pytest.approx(1.0, abs=1e-6)


def test_frames_are_singular_value_derivatives(rng):
    from .conftest import fd_grad

    for _ in range(20):
        f = random_defgrad(rng)
        fr = ssv_frames(signed_svd(f))
        for k in range(3):
            assert np.linalg.norm(fr[k]) == pytest.approx(1.0, abs=1e-12)
            g = fd_grad(lambda x: signed_svd(x).nu[k], f)
            assert rel_err(fr[k], g) <= 1e-6


def test_random_rotation_orthogonal(rng):
    for _ in range(100):
        q = random_rotation(rng)
        assert np.max(np.abs(q.T @ q - np.eye(3))) <= 1e-14
        assert det(q) == pytest.approx(1.0, abs=1e-14)


def test_random_defgrad_admissible(rng):
    assert all(det(random_defgrad(rng)) > 0.05 for _ in range(200))

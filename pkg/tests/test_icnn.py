import json

import numpy as np
import pytest

from cssvnn import icnn

from .conftest import fd_grad, rel_err

REFERENCE_COUNTS = {
    "7-4-1": 36,
    "7-8-1": 72,
    "7-12-1": 108,
    "7-4-2-1": 72,
    "7-8-4-1": 160,
    "7-12-8-1": 320,
    "7-8-4-4-1": 236,
    "7-12-8-4-1": 408,
}

ARCHS = ["7-1-1", "7-5-1", "7-4-3-1", "3-6-4-2-1"]


@pytest.mark.parametrize("arch,count", REFERENCE_COUNTS.items())
def test_param_count_matches_reference_counts(arch, count):
    a = icnn.IcnnArch.parse(arch)
    assert icnn.param_count(a) == count
    assert icnn.init(a, 0).to_vector().size == count


@pytest.mark.parametrize("text", ["7", "7-4", "7-4-2", "7-0-1", "7-x-1"])
def test_bad_architectures(text):
    with pytest.raises(ValueError):
        icnn.IcnnArch.parse(text)


def unit_711():
    p = icnn.init(icnn.IcnnArch((7, 1, 1)), 0).zeros_like()
    p.wx[0][0, 0] = 1.0
    p.w_out[0] = 1.0
    return p


def test_forward_examples(rng):
    assert icnn.forward(unit_711(), np.zeros(7)) == pytest.approx(np.log(2.0), abs=1e-15)
    z = icnn.init(icnn.IcnnArch.parse("7-4-3-1"), 0).zeros_like()
    assert icnn.forward(z, rng.normal(size=7)) == 0.0
    p = icnn.init(icnn.IcnnArch.parse("7-4-3-1"), 5)
    x = rng.normal(size=7)
    assert icnn.forward(p, x) == icnn.forward(p, x.copy())


def test_forward_batch_and_shape_errors(rng):
    p = icnn.init(icnn.IcnnArch.parse("7-4-3-1"), 5)
    x = rng.normal(size=(5, 7))
    np.testing.assert_allclose(icnn.forward(p, x), [icnn.forward(p, r) for r in x], rtol=1e-14)
    with pytest.raises(ValueError):
        icnn.forward(p, np.zeros(6))


def test_softplus_is_stable():
    a = np.array([-800.0, -30.0, 0.0, 30.0, 800.0])
    v = icnn.softplus(a)
    assert np.all(np.isfinite(v)) and v[-1] == 800.0 and v[2] == pytest.approx(np.log(2))
    s = icnn.sigmoid(a)
    assert np.all(np.isfinite(s)) and s[2] == 0.5


def test_grad_input_examples(rng):
    np.testing.assert_allclose(icnn.grad_input(unit_711(), np.zeros(7)), [0.5, 0, 0, 0, 0, 0, 0])
    for arch in ARCHS:
        a = icnn.IcnnArch.parse(arch)
        p = icnn.init(a, 2)
        x = rng.normal(size=a.n_in)
        assert rel_err(icnn.grad_input(p, x), fd_grad(lambda v: icnn.forward(p, v), x)) <= 1e-6


def test_gradient_is_monotone(rng):
    p = icnn.init(icnn.IcnnArch.parse("7-8-4-4-1"), 11)
    for _ in range(200):
        x, y = rng.uniform(-3, 3, size=(2, 7))
        assert (icnn.grad_input(p, x) - icnn.grad_input(p, y)) @ (x - y) >= -1e-10


def _params_fd(p, fun):
    v = p.to_vector()
    return fd_grad(lambda t: fun(p.from_vector(t)), v)


@pytest.mark.parametrize("arch", ARCHS)
def test_grad_params_value_matches_fd(arch, rng):
    a = icnn.IcnnArch.parse(arch)
    p = icnn.init(a, 4)
    for mat in p.b:
        mat[...] = rng.normal(size=mat.shape)
    x = rng.normal(size=(3, a.n_in))
    c = rng.normal(size=3)
    g = icnn.grad_params_value(p, x, c).to_vector()
    assert rel_err(g, _params_fd(p, lambda q: float(c @ icnn.forward(q, x)))) <= 1e-6


def test_grad_params_value_examples(rng):
    p = icnn.init(icnn.IcnnArch.parse("7-4-3-1"), 1)
    x = rng.normal(size=7)
    assert not np.any(icnn.grad_params_value(p, x, 0.0).to_vector())
    # Linear, bias-free output layer: d y / d w_out equals the last hidden activations.
    z = p.zeros_like()
    z.b[-1][...] = 1.0
    g = icnn.grad_params_value(z, x, 1.0)
    np.testing.assert_allclose(g.w_out, icnn.softplus(np.ones(3)))


@pytest.mark.parametrize("arch", ARCHS)
def test_grad_params_of_input_gradient_matches_fd(arch, rng):
    a = icnn.IcnnArch.parse(arch)
    p = icnn.init(a, 6)
    for mat in p.b:
        mat[...] = rng.normal(size=mat.shape)
    x = rng.normal(size=(3, a.n_in))
    u = rng.normal(size=(3, a.n_in))
    g = icnn.grad_params_of_input_gradient(p, x, u).to_vector()
    fd = _params_fd(p, lambda q: float(np.sum(u * icnn.grad_input(q, x))))
    assert rel_err(g, fd) <= 1e-5


def test_grad_params_of_input_gradient_examples(rng):
    p = icnn.init(icnn.IcnnArch.parse("7-4-3-1"), 1)
    x = rng.normal(size=7)
    assert not np.any(icnn.grad_params_of_input_gradient(p, x, np.zeros(7)).to_vector())
    # Network constant in x: the functional vanishes for every bias value.
    for i in range(p.n_hidden_layers):
        p.wx[i][...] = 0.0
        if p.wxa[i] is not None:
            p.wxa[i][...] = 0.0
    g = icnn.grad_params_of_input_gradient(p, x, rng.normal(size=7))
    for i in range(p.n_hidden_layers):
        assert not np.any(g.b[i])
        if g.wz[i] is not None:
            assert not np.any(g.wz[i])
    assert not np.any(g.w_out)


def test_projection():
    p = icnn.init(icnn.IcnnArch.parse("7-2-2-1"), 0)
    p.wz[1][0, 0] = -0.3
    p.wz[1][0, 1] = 0.7
    p.wx[1][0, 0] = -0.5
    q = icnn.project_nonneg(p)
    assert q.wz[1][0, 0] == 0.0 and q.wz[1][0, 1] == 0.7
    assert q.wx[1][0, 0] == -0.5
    np.testing.assert_array_equal(icnn.project_nonneg(q).to_vector(), q.to_vector())
    assert p.wz[1][0, 0] == -0.3


def test_projection_masked_inputs():
    p = icnn.init(icnn.IcnnArch.parse("3-4-4-1"), 0, nonneg_inputs=(0, 1))
    for i in range(2):
        assert np.all(p.wx[i][:, :2] >= 0)
    assert np.all(p.wxa[1][:, :2] >= 0)
    assert np.any(p.wx[0][:, 2] < 0)


def test_init_contract():
    a = icnn.IcnnArch.parse("7-8-4-4-1")
    p, q, r = icnn.init(a, 3), icnn.init(a, 3), icnn.init(a, 4)
    np.testing.assert_array_equal(p.to_vector(), q.to_vector())
    assert not np.array_equal(p.to_vector(), r.to_vector())
    assert p.nonneg_violation() == 0.0
    assert all(np.all(w >= 0) for w in p.wz[1:]) and np.all(p.w_out >= 0)


def test_vector_roundtrip_and_offsets():
    p = icnn.init(icnn.IcnnArch.parse("7-5-3-1"), 0)
    v = p.to_vector()
    np.testing.assert_array_equal(p.from_vector(v).to_vector(), v)
    offs = p.layer_offsets()
    assert offs[0, 0] == -1 and offs[0, 2] == -1
    np.testing.assert_array_equal(v[offs[1, 0] : offs[1, 0] + 15], p.wz[1].ravel())
    np.testing.assert_array_equal(v[offs[-1, 0] :], p.w_out)
    with pytest.raises(ValueError):
        p.from_vector(v[:-1])


def test_checkpoint_roundtrip_is_exact():
    p = icnn.init(icnn.IcnnArch.parse("3-4-2-1"), 9, nonneg_inputs=(0, 1))
    doc = json.loads(icnn.dumps_checkpoint(icnn.params_to_dict(p)))
    q = icnn.params_from_dict(doc)
    np.testing.assert_array_equal(p.to_vector(), q.to_vector())
    assert q.nonneg_inputs == (0, 1)


def test_checkpoint_errors():
    doc = icnn.params_to_dict(icnn.init(icnn.IcnnArch.parse("7-4-2-1"), 0))
    bad = json.loads(json.dumps(doc))
    bad["layers"][1]["wz"] = bad["layers"][1]["wz"][:-1]
    with pytest.raises(ValueError):
        icnn.params_from_dict(bad)
    bad = json.loads(json.dumps(doc))
    bad["activation"] = "relu"
    with pytest.raises(ValueError):
        icnn.params_from_dict(bad)
    bad = json.loads(json.dumps(doc))
    bad["layers"][0]["b"][0] = float("nan")
    with pytest.raises(ValueError):
        icnn.params_from_dict(bad)
    with pytest.raises(ValueError):
        icnn.dumps_checkpoint({"x": float("inf")})

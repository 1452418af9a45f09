import math

import numpy as np
import pytest

from oracles import fd_laplacian, fd_param_jacobian, random_disk_points
from tengpp.ansatz import (FrozenDifferenceAnsatz, LinearAdapter, MLPAnsatz, ModelSpec,
                           init_params, load_snapshot, pack, save_snapshot, unpack)
from tengpp.special import DiskHarmonic, experiment1_expansion, harmonic_eval


def perturbed(spec, seed=0, scale=0.3):
    rng = np.random.default_rng(seed)
    return init_params(spec) + scale * rng.standard_normal(spec.n_params)


def test_parameter_count():
    assert ModelSpec((32, 32)).n_params == 1185
    assert ModelSpec((8,)).n_params == 2 * 8 + 8 + 8 + 1


def test_init_is_deterministic():
    spec = ModelSpec((32, 32), init_seed=1234)
    np.testing.assert_array_equal(init_params(spec), init_params(spec))
    other = init_params(ModelSpec((32, 32), init_seed=1235))
    assert np.any(other != init_params(spec))


def test_init_biases_zero_and_scaled_weights():
    spec = ModelSpec((64, 64), init_scale=2.0)
    layers = unpack(init_params(spec), spec)
    for W, b in layers:
        assert np.all(b == 0)
    W1 = layers[1][0]
    assert np.std(W1) == pytest.approx(2.0 / 8.0, rel=0.1)


def test_pack_unpack_round_trip():
    spec = ModelSpec((5, 3))
    th = np.random.default_rng(0).standard_normal(spec.n_params)
    np.testing.assert_array_equal(pack(unpack(th, spec), spec), th)
    zeros = [(np.zeros((o, i)), np.zeros(o)) for o, i in spec.layer_sizes]
    np.testing.assert_array_equal(pack(zeros, spec), np.zeros(spec.n_params))
    th2 = th.copy()
    th2[7] += 1.0
    diffs = sum(int(np.sum(a[0] != b[0]) + np.sum(a[1] != b[1]))
                for a, b in zip(unpack(th, spec), unpack(th2, spec)))
    assert diffs == 1
    with pytest.raises(ValueError):
        unpack(th[:-1], spec)


def test_zero_output_layer_gives_zero_field():
    spec = ModelSpec((8, 8))
    th = perturbed(spec)
    W, b = unpack(th, spec)[-1]
    W[:] = 0.0
    b[:] = 0.0
    net = MLPAnsatz(spec)
    X = random_disk_points(30, 0)
    assert np.all(net.eval(th, X) == 0.0)
    assert np.all(net.laplacian(th, X) == 0.0)


def test_one_unit_hand_evaluation():
    spec = ModelSpec((1,))
    w1, b1, w2, b2 = np.array([0.7, -1.3]), 0.2, 1.5, -0.4
    th = pack([(w1[None, :], [b1]), ([[w2]], [b2])], spec)
    net = MLPAnsatz(spec)
    x = np.array([[0.3, 0.5], [-0.8, 0.1]])
    expected = [w2 * math.tanh(w1 @ p + b1) + b2 for p in x]
    np.testing.assert_allclose(net.eval(th, x), expected, rtol=1e-15)


def test_single_tanh_unit_laplacian():
    spec = ModelSpec((1,))
    th = pack([([[1.0, 0.0]], [0.0]), ([[1.0]], [0.0])], spec)
    x = random_disk_points(10, 2)
    t = np.tanh(x[:, 0])
    np.testing.assert_allclose(MLPAnsatz(spec).laplacian(th, x), -2 * t * (1 - t * t),
                               rtol=1e-14, atol=1e-16)


def test_output_bias_column_is_ones():
    spec = ModelSpec((8, 8))
    J = MLPAnsatz(spec).param_jacobian(perturbed(spec), random_disk_points(20, 1))
    assert np.all(J[:, -1] == 1.0)


def test_jacobian_against_finite_differences():
    spec = ModelSpec((8,), init_seed=5)
    net = MLPAnsatz(spec)
    th = perturbed(spec, 1)
    X = random_disk_points(12, 3)
    J = net.param_jacobian(th, X)
    ref = fd_param_jacobian(net.eval, th, X)
    big = np.abs(J) > 1e-8
    assert np.max(np.abs(J - ref)[big] / np.abs(J)[big]) <= 1e-5


def test_jacobian_directional_derivative_order():
    spec = ModelSpec((8, 8), init_seed=9)
    net = MLPAnsatz(spec)
    th = perturbed(spec, 4)
    X = random_disk_points(5, 6)
    v = np.random.default_rng(7).standard_normal(spec.n_params)
    Jv = net.param_jacobian(th, X) @ v
    errs = []
    for eps in (1e-2, 1e-3):
        fd = (net.eval(th + eps * v, X) - net.eval(th - eps * v, X)) / (2 * eps)
        errs.append(np.abs(fd - Jv).max())
    # central differences are O(eps^2): a 10x smaller eps gives ~100x smaller error
    assert 100 / 3 <= errs[0] / errs[1] <= 100 * 3


def test_laplacian_against_stencil():
    spec = ModelSpec((8, 8), init_seed=2)
    net = MLPAnsatz(spec)
    th = perturbed(spec, 8)
    X = random_disk_points(25, 9, rmax=0.9)
    got = net.laplacian(th, X)
    ref = fd_laplacian(lambda P: net.eval(th, P), X)
    np.testing.assert_allclose(got, ref, rtol=1e-4, atol=1e-4 * np.abs(got).max())


def test_eval_independent_of_batching():
    spec = ModelSpec((16, 16))
    net = MLPAnsatz(spec)
    th = perturbed(spec)
    X = random_disk_points(40, 10)
    whole = net.eval(th, X)
    parts = np.concatenate([net.eval(th, X[:13]), net.eval(th, X[13:])])
    np.testing.assert_allclose(whole, parts, rtol=1e-15, atol=1e-15)
    Jw = net.param_jacobian(th, X)
    Jp = np.vstack([net.param_jacobian(th, X[:13]), net.param_jacobian(th, X[13:])])
    np.testing.assert_allclose(Jw, Jp, rtol=1e-15, atol=1e-15)


def test_frozen_difference_reproduces_u0():
    u0 = experiment1_expansion()
    spec = ModelSpec((32, 32))
    th = init_params(spec)
    fd = FrozenDifferenceAnsatz(MLPAnsatz(spec), th, u0)
    X = random_disk_points(1000, 11, rmax=1.0)
    assert np.abs(fd.eval(th, X) - u0.eval(X)).max() <= 1e-12
    np.testing.assert_allclose(fd.laplacian(th, X), u0.laplacian(X), atol=1e-10)


def test_frozen_difference_jacobian_is_live_network_only():
    u0 = experiment1_expansion()
    spec = ModelSpec((8,))
    net = MLPAnsatz(spec)
    frozen = init_params(spec)
    fd = FrozenDifferenceAnsatz(net, frozen, u0)
    th = perturbed(spec)
    X = random_disk_points(10, 12)
    assert fd.n_params == spec.n_params
    np.testing.assert_array_equal(fd.param_jacobian(th, X), net.param_jacobian(th, X))
    ref = fd_param_jacobian(fd.eval, th, X)
    big = np.abs(ref) > 1e-6
    assert np.max(np.abs(fd.param_jacobian(th, X) - ref)[big] / np.abs(ref)[big]) <= 1e-5


def test_linear_adapter():
    basis = [DiskHarmonic.of(0, 1), DiskHarmonic.of(1, 2), DiskHarmonic.of(3, 1)]
    ad = LinearAdapter(basis)
    X = random_disk_points(30, 13)
    J = ad.param_jacobian([1.0, 2.0, 3.0], X)
    for k, h in enumerate(basis):
        np.testing.assert_array_equal(J[:, k], harmonic_eval(h, X))
    th = np.array([0.5, -1.0, 2.0])
    np.testing.assert_allclose(ad.eval(2 * th, X), 2 * ad.eval(th, X))
    ref = fd_laplacian(lambda P: ad.eval(th, P), X)
    np.testing.assert_allclose(ad.laplacian(th, X), ref, rtol=1e-4, atol=1e-4)


def test_radial_adapter_laplacian_is_rotation_invariant():
    ad = LinearAdapter([DiskHarmonic.of(0, 1), DiskHarmonic.of(0, 3)])
    th = [1.0, -0.7]
    X = random_disk_points(50, 14)
    a = 0.9
    R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    np.testing.assert_allclose(ad.laplacian(th, X), ad.laplacian(th, X @ R.T), atol=1e-10)


def test_snapshot_round_trip(tmp_path):
    spec = ModelSpec((7, 5), init_seed=99, init_scale=0.3)
    th = perturbed(spec)
    th[0] = 1 / 3
    th[1] = -0.0
    path = tmp_path / "m.snapshot"
    save_snapshot(path, spec, th)
    spec2, th2 = load_snapshot(path)
    assert spec2 == spec
    assert th2.tobytes() == th.tobytes()
    path.write_text("garbage\n")
    with pytest.raises(ValueError):
        load_snapshot(path)

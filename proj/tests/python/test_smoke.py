"""Smoke tests for the python bindings: each exposed op against a numpy oracle."""

import numpy as np
import pytest

core = pytest.importorskip("_core")


def test_binary_conv_matches_numpy_oracle():
    rng = np.random.default_rng(3)
    x = np.where(rng.random((2, 4, 6, 6)) < 0.5, -1.0, 1.0)
    w = rng.normal(size=(4, 4, 3, 3))

    out = core.binary_conv2d(x, w, 1, 1)

    scale = np.abs(w).reshape(4, -1).mean(axis=1)
    wb = scale[:, None, None, None] * np.where(w >= 0, 1.0, -1.0)
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)), constant_values=-1.0)
    ref = np.zeros_like(out)
    for n in range(2):
        for o in range(4):
            for i in range(6):
                for j in range(6):
                    ref[n, o, i, j] = np.sum(xp[n, :, i : i + 3, j : j + 3] * wb[o])
    np.testing.assert_allclose(out, ref, atol=1e-9)


def test_rsign_threshold_and_gradient():
    x = np.array([[[[-0.5, 0.2]], [[0.3, -0.1]]]])
    alpha = [0.0, 0.25]
    out = core.rsign(x, alpha)
    np.testing.assert_array_equal(out[0, 0, 0], [-1.0, 1.0])
    np.testing.assert_array_equal(out[0, 1, 0], [1.0, -1.0])

    up = np.ones_like(x)
    _, galpha = core.rsign_backward(x, alpha, up)
    np.testing.assert_allclose(galpha, [-2.0, -2.0])  # exact -sum(upstream)


def test_rprelu_matches_piecewise_formula():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(2, 3, 4, 4))
    beta, gamma, zeta = [0.25, 0.5, -0.3], [0.1, -0.2, 0.0], [0.05, 0.0, -0.1]
    out = core.rprelu(x, beta, gamma, zeta)
    b = np.array(beta)[None, :, None, None]
    g = np.array(gamma)[None, :, None, None]
    z = np.array(zeta)[None, :, None, None]
    ref = np.where(x > g, x - g + z, b * (x - g) + z)
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_distributional_loss_oracle():
    rng = np.random.default_rng(7)
    logits = rng.normal(size=(4, 10))
    t = rng.random((4, 10))
    t /= t.sum(axis=1, keepdims=True)
    p = np.exp(logits - logits.max(axis=1, keepdims=True))
    p /= p.sum(axis=1, keepdims=True)
    ref = np.mean(np.sum(t * (np.log(t) - np.log(p)), axis=1))
    assert core.distributional_loss(logits, t) == pytest.approx(ref, abs=1e-10)
    grad = core.distributional_loss_backward(logits, t)
    np.testing.assert_allclose(grad, (p - t) / 4.0, atol=1e-10)


def test_count_ops_matches_paper_table():
    a = core.count_ops("reactnet-a", 224)
    assert a["ops"] == pytest.approx(0.87e8, rel=0.01)
    c = core.count_ops("reactnet-c", 224)
    assert c["ops"] == pytest.approx(2.14e8, rel=0.01)


def test_network_forward_shape_and_determinism():
    net = core.Network("reactnet-a", "desk", 1, 10, seed=3)
    x = np.random.default_rng(0).normal(size=(2, 1, 32, 32))
    out1 = net.forward(x)
    out2 = net.forward(x)
    assert out1.shape == (2, 10)
    np.testing.assert_array_equal(out1, out2)
    assert net.num_params() > 0


def test_grad_check_all_pass():
    results = core.grad_check(1)
    kinds = " ".join(r["name"] for r in results)
    for needle in ["alpha", "beta", "gamma", "zeta", "batchnorm", "fc", "weight"]:
        assert needle in kinds
    assert all(r["passed"] for r in results)

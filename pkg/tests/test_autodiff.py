"""Tape mechanics and per-op gradients against central differences."""
import numpy as np
import pytest

from lstep.autodiff import (
    GradientTape,
    Tensor,
    add,
    add_n,
    backward,
    clamp,
    concat,
    elementwise_mul,
    log,
    matmul,
    mean_rows,
    norm2,
    relu,
    scale,
    sigmoid,
    sub,
    sum_all,
    tanh,
    transpose,
    weighted_sum_cols,
)


def _fd_check(build, params, h=1e-6, tol=1e-6):
    """Compare tape gradients of a scalar loss to central differences."""
    with GradientTape() as tape:
        loss = build()
    grads = backward(tape, loss, params)
    for name, t in params.items():
        flat = t.data.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            with GradientTape():
                up = float(build().data.ravel()[0])
            flat[i] = orig - h
            with GradientTape():
                dn = float(build().data.ravel()[0])
            flat[i] = orig
            fd = (up - dn) / (2.0 * h)
            an = float(grads[name].ravel()[i])
            err = abs(an - fd) / max(abs(an), abs(fd), 1e-6)
            assert err < tol, f"{name}[{i}]: analytic {an} vs fd {fd}"


def test_matmul_forward_matches_triple_loop():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 5))
    got = matmul(Tensor(a), Tensor(b)).data
    want = np.zeros((3, 5))
    for i in range(3):
        for j in range(5):
            for k in range(4):
                want[i, j] += a[i, k] * b[k, j]
    assert np.allclose(got, want, atol=1e-12)


def test_matmul_vector_cases():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4,))
    m = rng.normal(size=(4, 3))
    assert np.allclose(matmul(Tensor(a), Tensor(m)).data, a @ m)
    assert np.allclose(matmul(Tensor(m.T), Tensor(a)).data, m.T @ a)


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_add_shape_error():
    with pytest.raises(ValueError, match=r"\(2,\) vs \(3,\)"):
        add(Tensor(np.zeros(2)), Tensor(np.zeros(3)))


def test_elementwise_op_gradients():
    rng = np.random.default_rng(2)
    x = Tensor(rng.normal(size=(5,)), learnable=True)
    y = Tensor(rng.normal(size=(5,)), learnable=True)

    def build():
        z = elementwise_mul(add(x, y), sub(x, y))
        z = add(tanh(z), sigmoid(scale(z, 0.5)))
        return sum_all(z)

    _fd_check(build, {"x": x, "y": y})


def test_matmul_concat_relu_gradients():
    rng = np.random.default_rng(3)
    w = Tensor(rng.normal(size=(3, 6)), learnable=True)
    a = Tensor(rng.normal(size=(4,)), learnable=True)
    b = Tensor(rng.normal(size=(2,)), learnable=True)

    def build():
        v = matmul(w, concat(a, b))
        return sum_all(relu(v))

    _fd_check(build, {"w": w, "a": a, "b": b})


def test_pooling_op_gradients():
    rng = np.random.default_rng(4)
    x = Tensor(rng.normal(size=(4, 5)), learnable=True)
    w = Tensor(rng.normal(size=(5, 1)), learnable=True)

    def build():
        pooled = weighted_sum_cols(x, w)
        rowmean = mean_rows(transpose(x))
        return add(norm2(pooled), norm2(rowmean))

    _fd_check(build, {"x": x, "w": w})


def test_log_clamp_gradients():
    x = Tensor(np.array([0.2, 0.8, 0.5]), learnable=True)

    def build():
        return sum_all(log(clamp(x, 1e-12, 1.0 - 1e-12)))

    _fd_check(build, {"x": x})


def test_clamp_blocks_gradient_outside_interior():
    x = Tensor(np.array([-1.0, 0.5, 2.0]), learnable=True)
    with GradientTape() as tape:
        loss = sum_all(clamp(x, 0.0, 1.0))
    g = backward(tape, loss, {"x": x})["x"]
    assert np.array_equal(g, np.array([0.0, 1.0, 0.0]))


def test_weighted_sum_cols_matches_matmul():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(3, 7))
    w = rng.normal(size=(7, 1))
    got = weighted_sum_cols(Tensor(x), Tensor(w)).data
    assert np.allclose(got, (x @ w).ravel(), atol=1e-14)


def test_norm2_zero_input_has_zero_gradient():
    x = Tensor(np.zeros(4), learnable=True)
    with GradientTape() as tape:
        loss = norm2(x)
    g = backward(tape, loss, {"x": x})["x"]
    assert float(loss.data) == 0.0
    assert np.array_equal(g, np.zeros(4))


def test_fanout_gradients_accumulate():
    # x feeds two branches; grad is the sum of both contributions
    x = Tensor(np.array([1.5, -0.5]), learnable=True)
    with GradientTape() as tape:
        loss = sum_all(add(elementwise_mul(x, x), scale(x, 3.0)))
    g = backward(tape, loss, {"x": x})["x"]
    assert np.allclose(g, 2.0 * x.data + 3.0, atol=1e-12)


def test_add_n_matches_repeated_add():
    rng = np.random.default_rng(6)
    ts = [Tensor(rng.normal(size=(3,)), learnable=True) for _ in range(4)]
    with GradientTape() as tape:
        loss = sum_all(add_n(ts))
    grads = backward(tape, loss, {str(i): t for i, t in enumerate(ts)})
    for i in range(4):
        assert np.array_equal(grads[str(i)], np.ones(3))


def test_backward_rejects_loss_off_tape():
    x = Tensor(np.ones(2), learnable=True)
    loss = sum_all(x)  # built outside any tape
    tape = GradientTape()
    with pytest.raises(ValueError, match="not recorded"):
        backward(tape, loss, {"x": x})


def test_backward_rejects_non_scalar_loss():
    x = Tensor(np.ones(3), learnable=True)
    with GradientTape() as tape:
        y = scale(x, 2.0)
    with pytest.raises(ValueError, match="scalar"):
        backward(tape, y, {"x": x})


def test_constant_loss_gives_zero_gradients():
    x = Tensor(np.ones(3), learnable=True)
    with GradientTape() as tape:
        loss = sum_all(add(Tensor(np.ones(2)), Tensor(np.ones(2))))
    g = backward(tape, loss, {"x": x})["x"]
    assert np.array_equal(g, np.zeros(3))


def test_nested_tape_rejected():
    with GradientTape():
        with pytest.raises(RuntimeError, match="already active"):
            with GradientTape():
                pass


def test_detach_cuts_history():
    x = Tensor(np.ones(2), learnable=True)
    with GradientTape() as tape:
        y = scale(x, 2.0).detach()
        loss = sum_all(elementwise_mul(y, y))
    g = backward(tape, loss, {"x": x})["x"]
    assert np.array_equal(g, np.zeros(2))

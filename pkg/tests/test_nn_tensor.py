import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmreader import nn
from gradcheck_util import assert_grads_match, max_rel_error, numeric_grad


def test_softmax_uniform_on_zeros():
    out = nn.softmax(nn.Tensor([0.0, 0.0, 0.0, 0.0]))
    np.testing.assert_allclose(out.data, [0.25, 0.25, 0.25, 0.25], atol=1e-15)


def test_softmax_stabilized_on_large_inputs():
    out = nn.softmax(nn.Tensor([1000.0, 1000.0]))
    np.testing.assert_allclose(out.data, [0.5, 0.5], atol=1e-15)


def test_softmax_matches_exp_sum_oracle():
    v = np.array([1.0, 2.0, 3.0])
    expected = np.exp(v) / np.exp(v).sum()  # direct formula, small values are safe
    out = nn.softmax(nn.Tensor(v))
    np.testing.assert_allclose(out.data, expected, atol=1e-12)


def test_softmax_rejects_non_finite():
    with pytest.raises(ValueError):
        nn.softmax(nn.Tensor([1.0, np.nan]))
    with pytest.raises(ValueError):
        nn.softmax(nn.Tensor([np.inf, 0.0]))


@given(st.lists(st.floats(-30, 30), min_size=1, max_size=8))
def test_softmax_rows_sum_to_one(values):
    out = nn.softmax(nn.Tensor(values))
    assert abs(out.data.sum() - 1.0) <= 1e-9
    assert (out.data >= 0).all()


def test_cross_entropy_uniform_case():
    loss = nn.cross_entropy(nn.Tensor([0.0, 0.0]), 0)
    assert loss.item() == pytest.approx(np.log(2), abs=1e-12)


def test_cross_entropy_vanishes_for_dominant_target():
    loss = nn.cross_entropy(nn.Tensor([50.0, 0.0, 0.0]), 0)
    assert loss.item() < 1e-8


def test_cross_entropy_matches_softmax_definition():
    rng = np.random.default_rng(7)
    logits = rng.normal(size=4)
    target = 2
    p = np.exp(logits) / np.exp(logits).sum()
    expected = -np.log(p[target])
    loss = nn.cross_entropy(nn.Tensor(logits), target)
    assert loss.item() == pytest.approx(expected, abs=1e-12)


def test_cross_entropy_rejects_out_of_range_target():
    with pytest.raises(IndexError):
        nn.cross_entropy(nn.Tensor([0.0, 1.0]), 2)


def test_cross_entropy_rows_is_mean_of_rows():
    rng = np.random.default_rng(3)
    logits = rng.normal(size=(5, 3))
    targets = np.array([0, 2, 1, 1, 0])
    per_row = [nn.cross_entropy(nn.Tensor(logits[i]), int(targets[i])).item() for i in range(5)]
    batched = nn.cross_entropy_rows(nn.Tensor(logits), targets, reduction="mean")
    assert batched.item() == pytest.approx(np.mean(per_row), abs=1e-12)


def test_backward_of_sum_is_ones():
    p = nn.parameter(np.array([1.0, -2.0, 3.0]))
    nn.backward(p.sum())
    np.testing.assert_array_equal(p.grad, np.ones(3))


def test_backward_of_half_squared_norm_is_identity():
    p = nn.parameter(np.array([1.5, -0.5, 2.0]))
    nn.backward((p * p).sum() * 0.5)
    np.testing.assert_allclose(p.grad, p.data, atol=1e-15)


def test_backward_requires_scalar_loss():
    p = nn.parameter(np.ones(3))
    with pytest.raises(ValueError):
        nn.backward(p * 2.0)


def test_backward_zero_fills_unreachable_params():
    used = nn.parameter(np.ones(2))
    unused = nn.parameter(np.ones(2))
    loss = used.sum()
    nn.backward(loss, params=[used, unused])
    np.testing.assert_array_equal(unused.grad, np.zeros(2))


def test_backward_accumulates_through_shared_subexpression():
    p = nn.parameter(np.array([2.0]))
    q = p * 3.0
    loss = (q + q).sum()  # dloss/dp = 6
    nn.backward(loss)
    np.testing.assert_allclose(p.grad, [6.0])


def test_matmul_gradcheck_shapes():
    rng = np.random.default_rng(0)
    a = nn.parameter(rng.normal(size=(3, 4)))
    b = nn.parameter(rng.normal(size=(4, 2)))
    assert_grads_match(lambda: ((a @ b) * (a @ b)).sum(), {"a": a, "b": b})


def test_batched_matmul_gradcheck():
    rng = np.random.default_rng(1)
    a = nn.parameter(rng.normal(size=(2, 3, 4)))
    b = nn.parameter(rng.normal(size=(2, 4, 3)))
    assert_grads_match(lambda: ((a @ b).sum()), {"a": a, "b": b})


def test_take_rows_gradient_accumulates_repeats():
    w = nn.parameter(np.arange(6, dtype=float).reshape(3, 2))
    out = nn.take_rows(w, np.array([1, 1, 0]))
    nn.backward(out.sum())
    np.testing.assert_array_equal(w.grad, [[1.0, 1.0], [2.0, 2.0], [0.0, 0.0]])


def test_concat_splits_gradient():
    a = nn.parameter(np.ones((2, 2)))
    b = nn.parameter(np.ones((2, 3)))
    out = nn.concat([a, b], axis=1)
    nn.backward((out * out).sum())
    np.testing.assert_allclose(a.grad, 2 * np.ones((2, 2)))
    np.testing.assert_allclose(b.grad, 2 * np.ones((2, 3)))


def test_layer_norm_gradcheck():
    rng = np.random.default_rng(2)
    x = nn.parameter(rng.normal(size=(3, 5)))
    g = nn.parameter(rng.normal(size=5))
    b = nn.parameter(rng.normal(size=5))
    assert_grads_match(lambda: (nn.layer_norm(x, g, b) * nn.layer_norm(x, g, b)).sum(),
                       {"x": x, "g": g, "b": b})


def test_masked_softmax_masked_entries_exactly_zero():
    x = nn.Tensor(np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]]))
    mask = np.array([True, False, True])
    out = nn.masked_softmax(x, mask)
    assert out.data[0, 1] == 0.0
    assert out.data[1, 1] == 0.0
    np.testing.assert_allclose(out.data.sum(axis=-1), [1.0, 1.0], atol=1e-12)


def test_masked_softmax_rejects_fully_masked_row():
    with pytest.raises(ValueError):
        nn.masked_softmax(nn.Tensor([[1.0, 2.0]]), np.array([False, False]))


def test_dropout_eval_mode_is_identity():
    x = nn.Tensor(np.ones(10))
    out = nn.dropout(x, 0.5, np.random.default_rng(0), training=False)
    np.testing.assert_array_equal(out.data, x.data)


def test_dropout_preserves_expectation():
    # Inverted dropout: E[drop(x)] == x. Averaged over >=1e5 samples within 1%.
    rng = np.random.default_rng(123)
    rate = 0.35
    n = 200_000
    x = nn.Tensor(np.full(n, 2.0))
    out = nn.dropout(x, rate, rng, training=True)
    assert out.data.mean() == pytest.approx(2.0, rel=0.01)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_composite_expression_gradcheck(seed):
    rng = np.random.default_rng(seed)
    w = nn.parameter(rng.normal(size=(4, 3)))
    v = nn.parameter(rng.normal(size=3))
    x = nn.Tensor(rng.normal(size=(2, 4)))

    def loss():
        h = nn.relu(x @ w)
        return (nn.softmax(h + v) * (h + v)).sum()

    assert_grads_match(loss, {"w": w, "v": v})


def test_numeric_grad_helper_on_quadratic():
    p = nn.parameter(np.array([1.0, 2.0]))
    numeric = numeric_grad(lambda: (p * p).sum() * 0.5, p)
    assert max_rel_error(p.data, numeric) < 1e-6

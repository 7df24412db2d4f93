import numpy as np
import pytest

from zitd_gnn.core import (
    Module,
    Parameter,
    Tensor,
    backward,
    concat,
    grad_check,
    logaddexp,
    masked_softmax,
    no_grad,
    stack,
)
from zitd_gnn.errors import ContractError, NonFiniteError, ShapeError


class TestArithmetic:
    def test_broadcast_gradients(self):
        x = Parameter([[1.0, 2.0], [3.0, 4.0]], "x")
        b = Parameter([1.0, 1.0], "b")
        backward((x * b + b).sum())
        np.testing.assert_allclose(x.grad, np.ones((2, 2)))
        np.testing.assert_allclose(b.grad, [6.0, 8.0])

    def test_matmul_gradients(self):
        a = Parameter([[1.0, 2.0]], "a")
        w = Parameter([[3.0], [4.0]], "w")
        out = a @ w
        assert out.item() == 11.0
        backward(out.sum())
        np.testing.assert_allclose(a.grad, [[3.0, 4.0]])
        np.testing.assert_allclose(w.grad, [[1.0], [2.0]])

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ShapeError) as info:
            Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))
        assert isinstance(info.value, ValueError)
        assert info.value.shapes == ((2, 3), (2, 3))

    def test_numpy_operand_on_the_left(self):
        x = Parameter([1.0, 2.0], "x")
        out = np.array([2.0, 3.0]) * x
        assert isinstance(out, Tensor)
        backward(out.sum())
        np.testing.assert_allclose(x.grad, [2.0, 3.0])

    def test_log_of_nonpositive(self):
        with pytest.raises(ContractError):
            Tensor([1.0, 0.0]).log()

    def test_overflow_raises(self):
        with pytest.raises(NonFiniteError) as info:
            Tensor([0.0, 1000.0]).exp()
        assert info.value.index == (1,)

    def test_repeated_index_accumulates(self):
        x = Parameter([1.0, 2.0, 3.0], "x")
        backward(x[np.array([0, 0, 2])].sum())
        np.testing.assert_allclose(x.grad, [2.0, 0.0, 1.0])

    def test_concat_and_stack(self):
        a = Parameter([[1.0], [2.0]], "a")
        b = Parameter([[3.0], [4.0]], "b")
        backward((concat([a, b], axis=1) * np.array([1.0, 2.0])).sum() + stack([a, b]).sum())
        np.testing.assert_allclose(a.grad, [[2.0], [2.0]])
        np.testing.assert_allclose(b.grad, [[3.0], [3.0]])

    def test_logaddexp_matches_numpy(self):
        a = Parameter([0.0, -800.0], "a")
        out = logaddexp(a, Tensor([0.0, -800.0]))
        np.testing.assert_allclose(out.values, np.logaddexp([0.0, -800.0], [0.0, -800.0]))
        backward(out.sum())
        np.testing.assert_allclose(a.grad, [0.5, 0.5])


class TestBackward:
    def test_non_scalar_loss(self):
        with pytest.raises(ContractError):
            backward(Parameter([1.0, 2.0], "x") * 2.0)

    def test_leaf_loss(self):
        p = Parameter([2.0], "p")
        backward(p)
        np.testing.assert_allclose(p.grad, [1.0])

    def test_grads_reset_between_passes(self):
        p = Parameter([1.0], "p")
        backward((p * 3.0).sum())
        backward((p * 3.0).sum())
        np.testing.assert_allclose(p.grad, [3.0])

    def test_no_grad_records_nothing(self):
        p = Parameter([1.0], "p")
        with no_grad():
            out = p * 2.0
        assert not out.requires_grad

    def test_shared_subexpression(self):
        p = Parameter([3.0], "p")
        q = p * p
        backward((q + q).sum())
        np.testing.assert_allclose(p.grad, [12.0])


class TestMaskedSoftmax:
    def test_rows_sum_to_one(self):
        scores = Tensor(np.arange(9.0).reshape(3, 3))
        mask = np.array([[1, 1, 0], [0, 1, 0], [1, 1, 1]], dtype=bool)
        out = masked_softmax(scores, mask).values
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)
        assert out[0, 2] == 0.0
        assert out[1, 1] == 1.0

    def test_empty_row(self):
        with pytest.raises(ContractError):
            masked_softmax(Tensor(np.zeros((2, 2))), np.array([[1, 0], [0, 0]], dtype=bool))


class TestGradCheck:
    def test_composite_expression(self, rng):
        w = Parameter(rng.normal(size=(3, 2)), "w")
        b = Parameter(rng.normal(size=2), "b")
        x = Tensor(rng.normal(size=(4, 3)))
        mask = np.ones((4, 4), dtype=bool)

        def closure():
            h = (x @ w + b).tanh()
            attn = masked_softmax(h @ h.T, mask)
            return ((attn @ h).sigmoid() * 2.0 + (h * h).exp()).sum()

        report = grad_check(closure, [w, b])
        assert report.passed, report.worst
        assert report.n_checked == 8

    def test_empty_parameter_list(self):
        report = grad_check(lambda: Tensor(1.0), [])
        assert report.passed and report.n_checked == 0


class _Pair(Module):
    def __init__(self):
        self.w = Parameter(np.ones((2, 2)), "w")
        self.children = [_Leaf(), _Leaf()]

    def forward(self, x):
        return x @ self.w


class _Leaf(Module):
    def __init__(self):
        self.b = Parameter(np.zeros(2), "b")

    def forward(self, x):
        return x + self.b


class TestModule:
    def test_named_parameters(self):
        names = [name for name, _ in _Pair().named_parameters()]
        assert names == ["w", "children.0.b", "children.1.b"]

    def test_state_dict_roundtrip(self):
        source, target = _Pair(), _Pair()
        source.w.values[0, 0] = 5.0
        target.load_state_dict(source.state_dict())
        assert target.w.values[0, 0] == 5.0

    def test_load_rejects_mismatch(self):
        pair = _Pair()
        state = pair.state_dict()
        state["w"] = np.ones(3)
        with pytest.raises(ShapeError):
            pair.load_state_dict(state)
        del state["w"]
        with pytest.raises(ContractError):
            pair.load_state_dict(state)

    def test_train_eval_flags(self):
        pair = _Pair().eval()
        assert all(not m.training for m in pair.modules())

"""
Unit tests for the layer kernels of the engine.
"""
import numpy as np
import pytest

from hydrodeep.engine import functional as F
from hydrodeep.engine.graph import ModelGraph, backward
from hydrodeep.engine.layers import Dense, Flatten
from hydrodeep.utils.enums import LayerGroup, Mode
from hydrodeep.utils.exceptions import (
    DimensionError,
    EmptySequenceError,
    NonFiniteError,
    ParameterError,
    StateError,
    WindowError,
)


def lstm_params(rng, n_h, n_in, scale=1.0):
    params = {}
    for gate in F.LSTM_GATES:
        params[f"W_{gate}"] = rng.uniform(-scale, scale, (n_h, n_h + n_in))
        params[f"b_{gate}"] = rng.uniform(-scale, scale, n_h)
    return params


def zero_params(gates, n_h, n_in):
    params = {}
    for gate in gates:
        params[f"W_{gate}"] = np.zeros((n_h, n_h + n_in))
        params[f"b_{gate}"] = np.zeros(n_h)
    return params


class TestConv1D:
    """Test cases for the 1D convolution."""

    def test_identity_kernel(self):
        """A width-1 unit kernel copies the input."""
        out = F.conv1d_forward(np.array([[1.0], [2.0], [3.0], [4.0]]), np.ones((1, 1, 1)), np.zeros(1))
        np.testing.assert_array_equal(out[:, 0], [1.0, 2.0, 3.0, 4.0])

    def test_hand_sum(self):
        """Kernel [1, 1] sums neighbouring days."""
        out = F.conv1d_forward(np.array([[1.0], [2.0], [3.0]]), np.ones((1, 1, 2)), np.zeros(1))
        np.testing.assert_array_equal(out[:, 0], [3.0, 5.0])

    def test_tanh_range(self, rng):
        """tanh outputs stay inside (-1, 1) and squash the linear response."""
        x, k, b = rng.normal(size=(9, 3)), 0.5 * rng.normal(size=(4, 3, 3)), rng.normal(size=4)
        out = F.conv1d_forward(x, k, b, "tanh")
        assert out.shape == (7, 4)
        assert np.all(np.abs(out) < 1.0)
        np.testing.assert_allclose(out, np.tanh(F.conv1d_forward(x, k, b)), rtol=1e-12)

    def test_batched_matches_unbatched(self, rng):
        """Each batch row equals the unbatched result."""
        x = rng.normal(size=(2, 6, 3))
        k = rng.normal(size=(2, 3, 2))
        b = rng.normal(size=2)
        out = F.conv1d_forward(x, k, b, "relu")
        for n in range(2):
            np.testing.assert_allclose(out[n], F.conv1d_forward(x[n], k, b, "relu"))

    def test_short_sequence_raises_window_error(self):
        """A sequence shorter than the kernel is rejected."""
        with pytest.raises(WindowError):
            F.conv1d_forward(np.ones((2, 1)), np.ones((1, 1, 3)), np.zeros(1))

    def test_channel_mismatch_raises_dimension_error(self):
        """Kernel channels must match input channels."""
        with pytest.raises(DimensionError):
            F.conv1d_forward(np.ones((5, 2)), np.ones((1, 3, 2)), np.zeros(1))

    def test_nan_input_rejected(self):
        """NaN never enters a public op."""
        with pytest.raises(NonFiniteError):
            F.conv1d_forward(np.array([[np.nan], [1.0]]), np.ones((1, 1, 1)), np.zeros(1))


class TestMaxPool1D:
    """Test cases for max pooling."""

    def test_pairs(self):
        """Max of non-overlapping pairs."""
        out = F.maxpool1d_forward(np.array([[1.0], [3.0], [2.0], [8.0]]), 2)
        np.testing.assert_array_equal(out[:, 0], [3.0, 8.0])

    def test_pool_one_is_identity(self, rng):
        """pool=1 returns the input."""
        x = rng.normal(size=(5, 3))
        np.testing.assert_array_equal(F.maxpool1d_forward(x, 1), x)

    def test_remainder_dropped(self):
        """Trailing rows that do not fill a window are dropped."""
        out = F.maxpool1d_forward(np.array([[5.0], [1.0], [1.0], [1.0], [9.0]]), 2)
        np.testing.assert_array_equal(out[:, 0], [5.0, 1.0])

    def test_permutation_invariant_within_window(self, rng):
        """Shuffling inside a window does not change its maximum."""
        x = rng.normal(size=(6, 2))
        shuffled = x.copy()
        shuffled[0:3] = x[[2, 0, 1]]
        np.testing.assert_array_equal(F.maxpool1d_forward(x, 3), F.maxpool1d_forward(shuffled, 3))

    @pytest.mark.parametrize("pool", [0, -2])
    def test_non_positive_pool(self, pool):
        """pool <= 0 is a parameter error."""
        with pytest.raises(ParameterError):
            F.maxpool1d_forward(np.ones((4, 1)), pool)


class TestLSTM:
    """Test cases for the LSTM cell and layer."""

    def test_zero_params_halve_cell_state(self):
        """With zero weights every gate is 0.5."""
        c0 = np.array([0.4, -1.0])
        h, c = F.lstm_cell_step(np.ones(3), np.zeros(2), c0, zero_params(F.LSTM_GATES, 2, 3))
        np.testing.assert_allclose(c, 0.5 * c0)
        np.testing.assert_allclose(h, 0.5 * np.tanh(0.5 * c0))

    def test_saturated_gates(self):
        """Open forget and output gates with a closed input gate keep the cell state."""
        params = zero_params(F.LSTM_GATES, 1, 1)
        params["b_f"][:] = 20.0
        params["b_i"][:] = -20.0
        params["b_o"][:] = 20.0
        h, c = F.lstm_cell_step(np.array([0.7]), np.zeros(1), np.array([0.3]), params)
        assert c[0] == pytest.approx(0.3, abs=1e-6)
        assert h[0] == pytest.approx(np.tanh(0.3), abs=1e-6)
        assert h[0] == pytest.approx(0.2913, abs=1e-4)

    def test_hidden_state_in_open_interval(self, rng):
        """Hidden components stay strictly inside (-1, 1)."""
        params = lstm_params(rng, 4, 3, scale=5.0)
        out = F.lstm_layer_forward(rng.normal(size=(20, 3)) * 5, params, return_sequence=True)
        assert np.all(np.abs(out) < 1.0)

    def test_single_step_layer_equals_cell(self, rng):
        """T=1 equals one cell step from zero state."""
        params = lstm_params(rng, 3, 2)
        x = rng.normal(size=2)
        h, _ = F.lstm_cell_step(x, np.zeros(3), np.zeros(3), params)
        np.testing.assert_allclose(F.lstm_layer_forward(x[None], params), h)

    def test_zero_params_zero_output(self, rng):
        """Zero weights keep the state at the zero fixpoint."""
        out = F.lstm_layer_forward(rng.normal(size=(6, 2)), zero_params(F.LSTM_GATES, 3, 2))
        np.testing.assert_array_equal(out, np.zeros(3))

    def test_sequence_last_row_equals_final(self, rng):
        """The last row of the full sequence is the final output."""
        params = lstm_params(rng, 3, 2)
        seq = rng.normal(size=(5, 2))
        full = F.lstm_layer_forward(seq, params, return_sequence=True)
        np.testing.assert_array_equal(full[-1], F.lstm_layer_forward(seq, params))

    def test_empty_sequence(self, rng):
        """T=0 is rejected."""
        with pytest.raises(EmptySequenceError):
            F.lstm_layer_forward(np.zeros((0, 2)), lstm_params(rng, 3, 2))

    def test_dimension_mismatch(self, rng):
        """Weights sized for another input width are rejected."""
        with pytest.raises(DimensionError):
            F.lstm_cell_step(np.ones(4), np.zeros(3), np.zeros(3), lstm_params(rng, 3, 2))


class TestGRU:
    """Test cases for the GRU cell."""

    def gru_params(self, rng, n_h, n_in):
        params = {}
        for gate in F.GRU_GATES:
            params[f"W_{gate}"] = rng.uniform(-1, 1, (n_h, n_h + n_in))
            params[f"b_{gate}"] = rng.uniform(-1, 1, n_h)
        return params

    def test_zero_params_halve_state(self):
        """Zero weights give z=0.5 and a zero candidate."""
        h_prev = np.array([0.8, -0.4])
        h = F.gru_cell_step(np.ones(3), h_prev, zero_params(F.GRU_GATES, 2, 3))
        np.testing.assert_allclose(h, 0.5 * h_prev)

    def test_closed_update_gate_copies_state(self, rng):
        """b_z=-20 with zero W_z keeps the previous state."""
        params = self.gru_params(rng, 2, 3)
        params["W_z"][:] = 0.0
        params["b_z"][:] = -20.0
        h_prev = np.array([0.3, -0.6])
        np.testing.assert_allclose(F.gru_cell_step(rng.normal(size=3), h_prev, params), h_prev, atol=1e-7)

    def test_convex_combination_bound(self, rng):
        """The new state is bounded by max(|h_prev|, 1) componentwise."""
        for _ in range(20):
            params = self.gru_params(rng, 3, 2)
            h_prev = rng.uniform(-2, 2, 3)
            h = F.gru_cell_step(rng.normal(size=2), h_prev, params)
            assert np.all(np.abs(h) < np.maximum(np.abs(h_prev), 1.0))


class TestBiLSTM:
    """Test cases for the bidirectional LSTM."""

    def test_matches_two_lstm_runs(self, rng):
        """Output equals a forward run and a run over the reversed sequence."""
        pf, pb = lstm_params(rng, 3, 2), lstm_params(rng, 3, 2)
        seq = rng.normal(size=(6, 2))
        expected = np.concatenate([F.lstm_layer_forward(seq, pf), F.lstm_layer_forward(seq[::-1], pb)])
        np.testing.assert_allclose(F.bidirectional_lstm_forward(seq, pf, pb), expected)

    def test_palindrome_with_shared_params(self, rng):
        """A palindromic input with shared weights gives equal halves."""
        params = lstm_params(rng, 3, 2)
        half = rng.normal(size=(3, 2))
        seq = np.concatenate([half, half[::-1]])
        out = F.bidirectional_lstm_forward(seq, params, params)
        np.testing.assert_allclose(out[:3], out[3:])

    def test_zero_params(self, rng):
        """Zero weights give the zero vector of width 2 n_h."""
        zero = zero_params(F.LSTM_GATES, 3, 2)
        out = F.bidirectional_lstm_forward(rng.normal(size=(4, 2)), zero, zero)
        np.testing.assert_array_equal(out, np.zeros(6))


class TestDenseDropoutLoss:
    """Test cases for dense, dropout and the loss."""

    def test_dense_identity(self, rng):
        """Identity weights with zero bias copy the input."""
        x = rng.normal(size=4)
        np.testing.assert_array_equal(F.dense_forward(x, np.eye(4), np.zeros(4)), x)

    def test_dense_relu_negative(self):
        """relu of negative pre-activations is zero."""
        out = F.dense_forward(np.ones(2), -np.eye(2), np.zeros(2), "relu")
        np.testing.assert_array_equal(out, [0.0, 0.0])

    def test_dense_hand_case(self):
        """2x2 matrix-vector product."""
        out = F.dense_forward(np.array([1.0, 1.0]), np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([0.5, -1.0]))
        np.testing.assert_array_equal(out, [3.5, 6.0])

    def test_dense_shape_mismatch(self):
        """W must match the input width."""
        with pytest.raises(DimensionError):
            F.dense_forward(np.ones(3), np.ones((2, 2)), np.zeros(2))

    def test_dropout_identities(self, rng):
        """Rate 0 and eval mode are the identity."""
        x = rng.normal(size=50)
        np.testing.assert_array_equal(F.dropout_forward(x, 0.0, "train", rng), x)
        np.testing.assert_array_equal(F.dropout_forward(x, 0.5, Mode.EVAL), x)

    def test_dropout_preserves_mean(self, rng):
        """Inverted dropout keeps the expected value."""
        x = np.ones(100_000)
        out = F.dropout_forward(x, 0.5, "train", rng)
        assert set(np.unique(out)) <= {0.0, 2.0}
        assert abs(out.mean() - 1.0) < 0.02

    @pytest.mark.parametrize("rate", [-0.1, 1.0])
    def test_dropout_rate_range(self, rate):
        """Rates outside [0, 1) are rejected."""
        with pytest.raises(ParameterError):
            F.dropout_forward(np.ones(3), rate, "eval")

    def test_mse_examples(self):
        """Hand-computed losses."""
        assert F.mse_loss([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert F.mse_loss([1.0, 1.0, 1.0], [0.0, 0.0, 0.0]) == 1.0
        assert F.mse_loss([1.0, 2.0], [0.0, 0.0]) == 2.5

    def test_mse_shape_mismatch(self):
        """Predictions and targets must align."""
        with pytest.raises(DimensionError):
            F.mse_loss([1.0, 2.0], [1.0])

    @pytest.mark.parametrize("pred, target", [
        ([np.nan, 1.0], [0.0, 1.0]),
        ([0.0, 1.0], [0.0, np.inf]),
    ])
    def test_mse_rejects_non_finite(self, pred, target):
        """NaN or Inf on either side is an error, not a NaN loss."""
        with pytest.raises(NonFiniteError):
            F.mse_loss(pred, target)


class TestBackward:
    """Test cases for reverse-mode accumulation through a graph."""

    def single_weight_graph(self, w):
        graph = ModelGraph([Flatten("flat", LayerGroup.HEAD)], [], [Dense("out", LayerGroup.HEAD, 1)],
                           input1_shape=(1, 1), input2_width=None)
        graph.store["out.W"].value[...] = w
        graph.store["out.b"].value[...] = 0.0
        return graph

    @pytest.mark.parametrize("w", [0.5, -1.25, 3.0])
    def test_closed_form_gradient(self, w):
        """For pred = w x with x=1, t=0 the MSE gradient is 2w."""
        graph = self.single_weight_graph(w)
        pred, tape = graph.forward(np.ones((1, 1, 1)), None, Mode.EVAL)
        backward(tape, F.mse_grad(pred, np.zeros(1)))
        assert graph.store["out.W"].grad[0, 0] == pytest.approx(2.0 * w)
        assert graph.store["out.b"].grad[0] == pytest.approx(2.0 * w)

    def test_frozen_parameters_receive_gradients(self):
        """Freezing does not stop gradient accumulation."""
        graph = self.single_weight_graph(1.5)
        graph.store.set_trainable([])
        pred, tape = graph.forward(np.ones((1, 1, 1)))
        backward(tape, F.mse_grad(pred, np.zeros(1)))
        assert graph.store["out.W"].grad[0, 0] == pytest.approx(3.0)

    def test_backward_before_forward(self):
        """A graph without a recorded pass cannot run backward."""
        graph = self.single_weight_graph(1.0)
        with pytest.raises(StateError):
            graph.backward(np.zeros(1))
        with pytest.raises(StateError):
            backward(None, np.zeros(1))

    def test_seed_shape_checked(self):
        """The loss seed must match the recorded batch."""
        graph = self.single_weight_graph(1.0)
        _, tape = graph.forward(np.ones((2, 1, 1)))
        with pytest.raises(DimensionError):
            backward(tape, np.zeros(3))

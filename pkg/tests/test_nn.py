import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from textclf import nn
from textclf.nn import ShapeError, Tensor


class TestTensorBasics:
    def test_nonfinite_rejected(self):
        with pytest.raises(FloatingPointError):
            Tensor([np.inf, 1.0])

    def test_backward_requires_scalar(self):
        t = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ShapeError):
            (t * 2).backward()

    def test_gradient_accumulates_over_reuse(self):
        x = Tensor([2.0], requires_grad=True)
        y = (x * 3.0 + x).sum()
        y.backward()
        assert x.grad.tolist() == [4.0]

    def test_broadcast_add_unbroadcasts_grad(self):
        a = Tensor(np.ones((3, 4)), requires_grad=True)
        b = Tensor(np.ones(4), requires_grad=True)
        (a + b).sum().backward()
        assert a.grad.shape == (3, 4)
        assert b.grad.tolist() == [3.0] * 4

    def test_extreme_magnitudes_stay_finite(self):
        big = Tensor(np.array([1e4, -1e4]))
        assert np.all(np.isfinite(big.sigmoid().data))
        assert np.all(np.isfinite(big.tanh().data))
        assert np.all(np.isfinite(nn.softmax(big).data))
        assert np.all(np.isfinite(big.relu().data))

    def test_extreme_magnitudes_through_layers(self):
        rng = np.random.default_rng(0)
        x = Tensor(rng.choice([-1e4, 1e4], size=(6, 2)))
        k = Tensor(rng.choice([-1e4, 1e4], size=(3, 2, 2)).astype(np.float32))
        assert np.all(np.isfinite(nn.conv1d(x, k).data))
        assert np.all(np.isfinite(nn.maxpool1d(x, 4).data))
        assert np.all(np.isfinite(nn.global_maxpool(x).data))
        params = nn.init_lstm_params(2, 3, rng=rng)
        state = nn.LstmState(Tensor(np.full(3, 1e4)), Tensor(np.full(3, -1e4)))
        new, gates = nn.lstm_step(Tensor(np.full(2, 1e4)), state, params)
        assert np.all(np.isfinite(new.hidden.data))
        assert np.all(np.isfinite(new.cell.data))

    def test_extreme_probabilities_clamped_in_loss(self):
        pred = Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
        loss = nn.cross_entropy_loss(pred, np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.isfinite(float(loss.data))
        binary = nn.cross_entropy_loss(Tensor(np.array([0.0, 1.0])),
                                       np.array([1.0, 0.0]), kind="binary")
        assert np.isfinite(float(binary.data))

    def test_softmax_rows_sum_to_one_extreme_inputs(self):
        rng = np.random.default_rng(1)
        x = Tensor(rng.choice([-1e4, 0.0, 1e4], size=(10, 7)))
        np.testing.assert_allclose(nn.softmax(x).data.sum(axis=1), 1.0, atol=1e-6)


class TestConv1d:
    def test_hand_convolution(self):
        out = nn.conv1d(
            Tensor(np.ones((4, 1))), Tensor(np.ones((3, 1, 1))), Tensor(np.zeros(1))
        )
        assert out.data.ravel().tolist() == [2.0, 3.0, 3.0, 2.0]

    def test_zero_kernel_zero_output(self):
        out = nn.conv1d(Tensor(np.random.default_rng(0).normal(size=(5, 2))),
                        Tensor(np.zeros((3, 2, 4))))
        assert np.all(out.data == 0.0)

    def test_same_length_even_kernel(self):
        out = nn.conv1d(Tensor(np.ones((6, 1))), Tensor(np.ones((4, 1, 2))))
        assert out.data.shape == (6, 2)

    def test_linear_in_input(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(5, 2))
        k = Tensor(rng.normal(size=(3, 2, 2)))
        a = nn.conv1d(Tensor(2.0 * x), k).data
        b = nn.conv1d(Tensor(x), k).data
        np.testing.assert_allclose(a, 2.0 * b, rtol=1e-5)

    def test_channel_mismatch_names_shapes(self):
        with pytest.raises(ShapeError, match="channels"):
            nn.conv1d(Tensor(np.ones((4, 3))), Tensor(np.ones((3, 2, 1))))


class TestPooling:
    def test_hand_pool(self):
        x = Tensor(np.array([1, 3, 2, 4, 0, 0, 5, 1.0]).reshape(8, 1))
        assert nn.maxpool1d(x, 4).data.ravel().tolist() == [4.0, 5.0]

    def test_shape_contract_100x100(self):
        out = nn.maxpool1d(Tensor(np.zeros((100, 100))), 4)
        assert out.data.shape == (25, 100)

    def test_global_pool_shape(self):
        out = nn.global_maxpool(Tensor(np.zeros((25, 100))))
        assert out.data.shape == (100,)

    def test_ceiling_partial_window(self):
        out = nn.maxpool1d(Tensor(np.arange(7.0).reshape(7, 1)), 4)
        assert out.data.ravel().tolist() == [3.0, 6.0]

    def test_gradient_routes_to_first_argmax(self):
        x = Tensor(np.array([[1.0], [1.0], [0.0], [1.0]]), requires_grad=True)
        nn.maxpool1d(x, 4).sum().backward()
        assert x.grad.ravel().tolist() == [1.0, 0.0, 0.0, 0.0]

    @given(st.integers(1, 9), st.integers(1, 5), st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_length_algebra(self, length, pool, feats):
        out = nn.maxpool1d(Tensor(np.zeros((length, feats))), pool)
        assert out.data.shape == (-(-length // pool), feats)


class TestLstm:
    def _zero_params(self, input_dim=2, units=3, peephole=False):
        params = nn.init_lstm_params(input_dim, units, peephole=peephole,
                                     rng=np.random.default_rng(0))
        for table in (params.w_x, params.w_h, params.b):
            for gate in table:
                table[gate].data[...] = 0.0
        if peephole:
            for gate in params.w_c:
                params.w_c[gate].data[...] = 0.0
        return params

    def test_zero_params_zero_cell(self):
        params = self._zero_params()
        state = nn.LstmState(Tensor(np.zeros(3)), Tensor(np.zeros(3)))
        new, gates = nn.lstm_step(Tensor(np.zeros(2)), state, params)
        for g in ("i", "f", "o"):
            np.testing.assert_allclose(gates[g].data, 0.5)
        np.testing.assert_allclose(new.cell.data, 0.0)
        np.testing.assert_allclose(new.hidden.data, 0.0)

    def test_zero_params_carried_cell(self):
        params = self._zero_params()
        state = nn.LstmState(Tensor(np.zeros(3)), Tensor(np.full(3, 2.0)))
        new, _ = nn.lstm_step(Tensor(np.zeros(2)), state, params)
        np.testing.assert_allclose(new.cell.data, 1.0)
        np.testing.assert_allclose(new.hidden.data, 0.5 * np.tanh(1.0), rtol=1e-6)

    def test_gate_values_in_unit_interval(self):
        rng = np.random.default_rng(5)
        params = nn.init_lstm_params(4, 6, rng=rng)
        state = nn.LstmState(Tensor(rng.normal(size=6)), Tensor(rng.normal(size=6)))
        _, gates = nn.lstm_step(Tensor(rng.normal(size=4)), state, params)
        for g in ("i", "f", "o"):
            assert np.all(gates[g].data > 0) and np.all(gates[g].data < 1)

    def test_conv_mode_needs_odd_width(self):
        with pytest.raises(ValueError, match="odd"):
            nn.init_lstm_params(2, 3, mode="conv", kernel_width=4)

    def test_forward_over_sequence(self):
        params = nn.init_lstm_params(2, 3, rng=np.random.default_rng(1))
        xs = [Tensor(np.random.default_rng(i).normal(size=2)) for i in range(4)]
        states, final = nn.lstm_forward(xs, params)
        assert len(states) == 4
        assert final.hidden.data.shape == (3,)


class TestDropoutNoise:
    def test_eval_mode_identity(self):
        x = Tensor(np.ones((4, 4)))
        assert nn.dropout(x, 0.5, train_mode=False) is x
        assert nn.gaussian_noise(x, 0.3, train_mode=False) is x

    def test_rate_zero_identity(self):
        x = Tensor(np.ones(5))
        assert nn.dropout(x, 0.0, train_mode=True) is x

    def test_rate_bounds(self):
        with pytest.raises(ValueError):
            nn.dropout(Tensor(np.ones(2)), 1.0, train_mode=True)
        with pytest.raises(ValueError):
            nn.gaussian_noise(Tensor(np.ones(2)), -0.1, train_mode=True)

    def test_inverted_scaling_preserves_mean(self):
        x = Tensor(np.ones(100_000))
        out = nn.dropout(x, 0.5, train_mode=True, rng=np.random.default_rng(0))
        # mean of masked/rescaled values ~ N(1, sigma/sqrt(n)); 3 sigma band
        sigma = 1.0 / np.sqrt(100_000)
        assert abs(out.data.mean() - 1.0) < 3 * sigma

    def test_noise_statistics(self):
        x = Tensor(np.zeros(100_000))
        out = nn.gaussian_noise(x, 0.1, train_mode=True, rng=np.random.default_rng(1))
        assert abs(out.data.mean()) < 3 * 0.1 / np.sqrt(100_000)
        assert abs(out.data.std() - 0.1) < 0.005

    def test_seeded_mask_reproducible(self):
        x = Tensor(np.ones(64))
        a = nn.dropout(x, 0.3, True, rng=np.random.default_rng(9)).data
        b = nn.dropout(x, 0.3, True, rng=np.random.default_rng(9)).data
        assert np.array_equal(a, b)


class TestDenseSoftmaxLoss:
    def test_softmax_uniform(self):
        np.testing.assert_allclose(nn.softmax(Tensor([0.0, 0.0])).data, [0.5, 0.5])

    def test_relu(self):
        assert nn.relu(Tensor([-1.0, 2.0])).data.tolist() == [0.0, 2.0]

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        out = nn.softmax(Tensor(rng.normal(scale=100, size=(8, 5))))
        np.testing.assert_allclose(out.data.sum(axis=1), 1.0, atol=1e-6)

    def test_perfect_prediction_near_zero_loss(self):
        pred = Tensor(np.array([[1.0, 0.0]]))
        loss = nn.cross_entropy_loss(pred, np.array([[1.0, 0.0]]))
        assert 0.0 <= float(loss.data) < 1e-11

    def test_uniform_five_way(self):
        pred = Tensor(np.full((1, 5), 0.2))
        target = np.zeros((1, 5)); target[0, 3] = 1.0
        assert abs(float(nn.cross_entropy_loss(pred, target).data) - np.log(5)) < 1e-6

    def test_binary_half(self):
        loss = nn.cross_entropy_loss(Tensor(np.array([0.5])), np.array([1.0]), kind="binary")
        assert abs(float(loss.data) - np.log(2)) < 1e-7

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            nn.cross_entropy_loss(Tensor(np.ones((2, 3)) / 3), np.ones((3, 2)))


class TestAdagrad:
    def test_first_step_magnitude(self):
        param = np.array([1.0])
        state = nn.AdagradState((1,), learning_rate=0.01)
        nn.adagrad_update(param, np.array([3.0]), state)
        assert abs(param[0] - (1.0 - 0.01)) < 1e-8

    def test_zero_gradient_no_change(self):
        param = np.array([1.0, 2.0])
        state = nn.AdagradState((2,), learning_rate=0.5)
        nn.adagrad_update(param, np.zeros(2), state)
        assert param.tolist() == [1.0, 2.0]

    def test_steps_shrink(self):
        param = np.array([0.0])
        state = nn.AdagradState((1,), learning_rate=0.1)
        nn.adagrad_update(param, np.array([1.0]), state)
        first = abs(param[0])
        before = param[0]
        nn.adagrad_update(param, np.array([1.0]), state)
        second = abs(param[0] - before)
        assert second < first

    def test_accumulator_monotone(self):
        state = nn.AdagradState((1,), learning_rate=0.1)
        param = np.array([0.0])
        last = 0.0
        for g in (1.0, -2.0, 0.5):
            nn.adagrad_update(param, np.array([g]), state)
            assert state.accumulator[0] >= last
            last = state.accumulator[0]

    def test_shape_mismatch(self):
        state = nn.AdagradState((2,), learning_rate=0.1)
        with pytest.raises(ShapeError):
            nn.adagrad_update(np.zeros(3), np.zeros(3), state)


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        arrays = {
            "layer1": rng.normal(size=(3, 4)).astype(np.float32),
            "layer2": rng.normal(size=(5,)).astype(np.float32),
        }
        nn.save_checkpoint(tmp_path, arrays, meta={"seed": 7})
        loaded, meta = nn.load_checkpoint(tmp_path)
        assert meta["seed"] == 7
        for name in arrays:
            np.testing.assert_array_equal(loaded[name], arrays[name])

    def test_manifest_records_shapes(self, tmp_path):
        import json

        nn.save_checkpoint(tmp_path, {"w": np.zeros((2, 3), dtype=np.float32)})
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["layers"][0]["shape"] == [2, 3]
        assert manifest["format_version"] == 1

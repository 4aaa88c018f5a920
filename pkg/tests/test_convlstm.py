import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tccbench.errors import ShapeError
from tccbench.net.convlstm import ConvLstmParams, ConvLstmState, conv_lstm_step

# scalar peephole LSTM, hand-evaluated step by step (h, c)
SCALAR_WEIGHTS = dict(
    W_xi=0.5, W_hi=-0.3, W_xf=0.2, W_hf=0.4, W_xc=0.9, W_hc=-0.6, W_xo=-0.4, W_ho=0.7,
    W_ci=0.1, W_cf=-0.2, W_co=0.3, b_i=0.05, b_f=1.0, b_c=-0.1, b_o=0.2,
)
SCALAR_INPUTS = [0.5, -1.0, 2.0]
SCALAR_STATES = [
    (0.09819464099705767, 0.19322841428245446),
    (-0.1097114185146677, -0.17050614993308572),
    (0.19230622036904624, 0.5650121572794383),
]


def scalar_params():
    d = {}
    for name, v in SCALAR_WEIGHTS.items():
        shape = (1, 1, 1, 1) if name[2] in "xh" else (1,)
        d[name] = np.full(shape, v)
    return ConvLstmParams(**d)


def test_scalar_recurrence():
    params = scalar_params()
    state = ConvLstmState.zeros(1, 1, 1)
    for x, (h, c) in zip(SCALAR_INPUTS, SCALAR_STATES):
        state = conv_lstm_step(np.full((1, 1, 1), x), state, params)
        assert state.hidden.item() == pytest.approx(h, abs=1e-12)
        assert state.cell.item() == pytest.approx(c, abs=1e-12)


def test_zero_weights_give_half_gates():
    rng = np.random.default_rng(0)
    params = ConvLstmParams.zeros(4, 3, 3)
    c_prev = rng.normal(size=(3, 5, 6))
    state = ConvLstmState(rng.normal(size=(3, 5, 6)), c_prev)
    new, cache = conv_lstm_step(rng.normal(size=(4, 5, 6)), state, params, return_cache=True)
    for gate in "ifo":
        np.testing.assert_array_equal(cache[gate], 0.5)
    np.testing.assert_allclose(new.cell, 0.5 * c_prev, atol=1e-15)
    np.testing.assert_allclose(new.hidden, 0.5 * np.tanh(0.5 * c_prev), atol=1e-15)


def test_forget_gate_saturation():
    rng = np.random.default_rng(2)
    params = ConvLstmParams.zeros(2, 3, 3)
    params.b_f[...] = 10.0
    c_prev = rng.uniform(-2, 2, size=(3, 4, 4))
    new = conv_lstm_step(rng.normal(size=(2, 4, 4)), ConvLstmState(np.zeros_like(c_prev), c_prev), params)
    # with zero candidate weights tanh(0) = 0, so only the forget path remains
    assert np.max(np.abs(new.cell - c_prev)) < 1e-3


@given(seed=st.integers(0, 2**16), scale=st.floats(0.1, 50.0))
def test_gates_in_unit_interval(seed, scale):
    rng = np.random.default_rng(seed)
    params = ConvLstmParams.init(2, 3, 3, rng)
    for arr in params.as_dict().values():
        arr *= scale
    state = ConvLstmState(rng.uniform(-1, 1, (3, 5, 5)), rng.normal(size=(3, 5, 5)))
    new, cache = conv_lstm_step(rng.normal(size=(2, 5, 5)) * scale, state, params, return_cache=True)
    for gate in "ifo":
        assert np.all((cache[gate] >= 0) & (cache[gate] <= 1))
    assert np.all(np.abs(new.hidden) <= 1)
    assert new.hidden.shape == new.cell.shape == (3, 5, 5)


def test_same_padding_keeps_size():
    params = ConvLstmParams.init(2, 4, 5, np.random.default_rng(0))
    new = conv_lstm_step(np.ones((2, 7, 3)), ConvLstmState.zeros(4, 7, 3), params)
    assert new.hidden.shape == (4, 7, 3)


def test_shape_errors():
    params = ConvLstmParams.zeros(2, 3, 3)
    with pytest.raises(ShapeError):
        conv_lstm_step(np.ones((3, 4, 4)), ConvLstmState.zeros(3, 4, 4), params)
    with pytest.raises(ShapeError):
        conv_lstm_step(np.ones((2, 4, 4)), ConvLstmState.zeros(3, 4, 5), params)
    with pytest.raises(ShapeError):
        ConvLstmParams.zeros(2, 3, 4)
    bad = ConvLstmParams.zeros(2, 3, 3).as_dict()
    bad["W_ci"] = np.zeros(4)
    with pytest.raises(ShapeError):
        ConvLstmParams(**bad)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmcnn.activations import DEFAULT_FUNCTION_SET, Activation

from oracles import ACT


@pytest.mark.parametrize("act", list(Activation))
def test_derivative_matches_finite_differences(act):
    rng = np.random.default_rng(0)
    x = rng.uniform(-6, 6, size=1000)
    if act in (Activation.RELU, Activation.ELU):
        x = x[np.abs(x) > 1e-3]  # stay off the kink
    h = 1e-6
    numeric = (act.forward(x + h) - act.forward(x - h)) / (2 * h)
    assert np.max(np.abs(numeric - act.derivative(x))) <= 1e-6


@pytest.mark.parametrize("act", list(Activation))
def test_forward_matches_scalar_definition(act):
    x = np.linspace(-10, 10, 201)
    ref = np.array([ACT[act.value](v) for v in x])
    np.testing.assert_allclose(act.forward(x), ref, rtol=1e-12, atol=1e-15)


def test_derivative_accepts_precomputed_output():
    x = np.linspace(-3, 3, 50)
    for act in Activation:
        np.testing.assert_allclose(act.derivative(x, act.forward(x)), act.derivative(x))


def test_sigmoid_is_stable_at_extremes():
    with np.errstate(over="raise", invalid="raise"):
        y = Activation.SIG.forward(np.array([-1e4, -800.0, 0.0, 800.0, 1e4]))
    np.testing.assert_allclose(y, [0, 0, 0.5, 1, 1])


def test_kink_convention():
    zero = np.array([0.0])
    assert Activation.RELU.derivative(zero)[0] == 0
    assert Activation.ELU.derivative(zero)[0] == 1.0  # y + 1 with y = 0


def test_elu_unit_scale():
    assert Activation.ELU.forward(np.array([-50.0]))[0] == pytest.approx(-1.0)


def test_preserves_float32():
    x = np.ones(3, np.float32)
    for act in Activation:
        assert act.forward(x).dtype == np.float32
        assert act.derivative(x).dtype == np.float32


@given(st.sampled_from(["relu", " Sig", "TANH ", "elu"]))
def test_parse_is_case_and_space_insensitive(token):
    assert Activation.parse(token).value == token.strip().upper()


def test_parse_rejects_unknown():
    with pytest.raises(ValueError, match="unknown activation"):
        Activation.parse("SWISH")


def test_default_function_set():
    assert [a.value for a in DEFAULT_FUNCTION_SET] == ["RELU", "SIG", "TANH", "ELU"]

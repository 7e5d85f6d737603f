"""The four per-layer nonlinearities a genome chooses from."""

import enum

import numpy as np


def _sigmoid(x):
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Activation(str, enum.Enum):
    """Activation kind. The value is the token used in genome strings."""

    RELU = "RELU"
    SIG = "SIG"
    TANH = "TANH"
    ELU = "ELU"

    def __str__(self):
        return self.value

    def forward(self, x):
        x = np.asarray(x)
        if self is Activation.RELU:
            return np.maximum(x, 0)
        if self is Activation.SIG:
            return _sigmoid(x)
        if self is Activation.TANH:
            return np.tanh(x)
        # unit-scale ELU
        return np.where(x > 0, x, np.expm1(np.minimum(x, 0)))

    def derivative(self, x, y=None):
        """d(forward)/dx at ``x``.

        ``y`` may carry the already computed ``forward(x)`` to avoid
        recomputation. RELU and ELU use the right-continuous convention
        at the kink, i.e. the left branch at exactly 0.
        """
        x = np.asarray(x)
        if y is None:
            y = self.forward(x)
        if self is Activation.RELU:
            return (x > 0).astype(x.dtype)
        if self is Activation.SIG:
            return y * (1 - y)
        if self is Activation.TANH:
            return 1 - y * y
        return np.where(x > 0, 1, y + 1).astype(x.dtype)

    @classmethod
    def parse(cls, token):
        try:
            return cls(token.strip().upper())
        except ValueError:
            raise ValueError(
                f"unknown activation {token!r}; expected one of "
                f"{', '.join(a.value for a in cls)}") from None


DEFAULT_FUNCTION_SET = (Activation.RELU, Activation.SIG, Activation.TANH,
                        Activation.ELU)

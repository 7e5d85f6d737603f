"""Compressed architecture family.

A ``CM^n`` network is ``n`` blocks of (3x3 conv, stride 1, same padding,
activation) with a 2x2 max-pool after every second block. The channel count
of block ``i`` (0-based) is ``base_channels * 2 ** (i // 2)`` capped at
``max_channels``, i.e. it doubles after each pool. The head is global
average pooling followed by one dense layer and softmax.
"""

from dataclasses import dataclass

from ..exceptions import ConfigError

BYTES_PER_PARAM = 4
KERNEL = 3


@dataclass(frozen=True)
class ConvBlock:
    index: int
    in_channels: int
    out_channels: int
    height: int
    width: int
    pool_after: bool

    @property
    def n_params(self):
        return self.out_channels * self.in_channels * KERNEL * KERNEL + self.out_channels


@dataclass(frozen=True)
class ArchSpec:
    """Shape of one compressed network.

    Parameters
    ----------
    n_conv_layers : int
        Number of convolutional blocks (the genome length).
    reference_layers : int, default 10
        Depth of the non-compressed reference; the size ratio is
        ``n_conv_layers / reference_layers``.
    base_channels : int, default 16
    num_classes : int, default 10
    input_shape : tuple of int, default (3, 32, 32)
        ``(channels, height, width)`` of one image.
    max_channels : int, default 128
    """

    n_conv_layers: int
    reference_layers: int = 10
    base_channels: int = 16
    num_classes: int = 10
    input_shape: tuple = (3, 32, 32)
    max_channels: int = 128

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(d) for d in self.input_shape))
        if self.n_conv_layers < 1:
            raise ConfigError(f"n_conv_layers must be >= 1, got {self.n_conv_layers}")
        if self.reference_layers < 1:
            raise ConfigError("reference_layers must be >= 1")
        if self.n_conv_layers > self.reference_layers:
            raise ConfigError(
                f"n_conv_layers={self.n_conv_layers} exceeds "
                f"reference_layers={self.reference_layers}")
        if self.base_channels < 1 or self.max_channels < self.base_channels:
            raise ConfigError("need 1 <= base_channels <= max_channels")
        if self.num_classes < 2:
            raise ConfigError("num_classes must be >= 2")
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise ConfigError(f"bad input_shape {self.input_shape}")

    @property
    def name(self):
        prefix = "M" if self.n_conv_layers == self.reference_layers else "CM"
        return f"{prefix}{self.n_conv_layers}"

    def channels(self, i):
        return min(self.base_channels * 2 ** (i // 2), self.max_channels)

    def blocks(self):
        """Per-block shapes, in forward order."""
        c, h, w = self.input_shape
        out = []
        for i in range(self.n_conv_layers):
            oc = self.channels(i)
            pool = (i + 1) % 2 == 0 and h >= 2 and w >= 2
            out.append(ConvBlock(i, c, oc, h, w, pool))
            c = oc
            if pool:
                h, w = h // 2, w // 2
        return out

    @property
    def feature_channels(self):
        return self.channels(self.n_conv_layers - 1)

    def n_params(self):
        conv = sum(b.n_params for b in self.blocks())
        return conv + self.feature_channels * self.num_classes + self.num_classes

    def param_bytes(self):
        return self.n_params() * BYTES_PER_PARAM

    def to_dict(self):
        return {
            "n_conv_layers": self.n_conv_layers,
            "reference_layers": self.reference_layers,
            "base_channels": self.base_channels,
            "num_classes": self.num_classes,
            "input_shape": list(self.input_shape),
            "max_channels": self.max_channels,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**{**d, "input_shape": tuple(d["input_shape"])})

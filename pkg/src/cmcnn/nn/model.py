"""Forward and backward passes of the compressed multi-function CNN.

Everything is plain numpy in NCHW layout. Convolutions use im2col and a
single matrix product per layer; backward passes mirror the forward caches.
Models hold float32 parameters for training; ``Model.astype(np.float64)``
gives the high-precision copy used for gradient checking.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import GenomeArityError, LabelError, ShapeError
from ..genome import Genome
from .arch import BYTES_PER_PARAM, KERNEL

PAD = KERNEL // 2


class Model:
    """Parameters plus the (architecture, genome) pair that shapes them.

    Use :func:`build_model` to create one with initialized weights.
    """

    def __init__(self, arch, genome, params):
        if len(genome) != arch.n_conv_layers:
            raise GenomeArityError(
                f"genome has {len(genome)} genes but {arch.name} has "
                f"{arch.n_conv_layers} conv layers")
        self.arch = arch
        self.genome = genome
        self.params = params

    def __repr__(self):
        return f"Model({self.arch.name}, {self.genome}, {self.n_params} params)"

    @property
    def dtype(self):
        return self.params["dense.weight"].dtype

    @property
    def n_params(self):
        return int(sum(p.size for p in self.params.values()))

    @property
    def param_bytes(self):
        return self.n_params * BYTES_PER_PARAM

    def copy(self):
        return Model(self.arch, self.genome,
                     {k: v.copy() for k, v in self.params.items()})

    def astype(self, dtype):
        return Model(self.arch, self.genome,
                     {k: v.astype(dtype) for k, v in self.params.items()})

    def forward(self, batch):
        return forward(self, batch)

    def loss_and_grads(self, batch, labels):
        grads, loss = backward(self, batch, labels)
        return loss, grads


def parameter_names(arch):
    names = []
    for i in range(arch.n_conv_layers):
        names += [f"conv{i}.weight", f"conv{i}.bias"]
    return names + ["dense.weight", "dense.bias"]


def build_model(arch, genome, seed=0):
    """Create a model with freshly initialized weights.

    Weights are uniform in ``+-sqrt(6 / fan_in)``, biases zero. The draw
    order is fixed (layer order, weight before bias), so the same
    ``(arch, genome, seed)`` always gives bit-identical parameters.
    """
    if not isinstance(genome, Genome):
        genome = Genome(tuple(genome))
    if len(genome) != arch.n_conv_layers:
        raise GenomeArityError(
            f"genome has {len(genome)} genes but {arch.name} has "
            f"{arch.n_conv_layers} conv layers")
    rng = np.random.default_rng(seed)
    params = {}
    for b in arch.blocks():
        fan_in = b.in_channels * KERNEL * KERNEL
        bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(b.out_channels, b.in_channels, KERNEL, KERNEL))
        params[f"conv{b.index}.weight"] = w.astype(np.float32)
        params[f"conv{b.index}.bias"] = np.zeros(b.out_channels, np.float32)
    fan_in = arch.feature_channels
    bound = np.sqrt(6.0 / fan_in)
    w = rng.uniform(-bound, bound, size=(arch.num_classes, fan_in))
    params["dense.weight"] = w.astype(np.float32)
    params["dense.bias"] = np.zeros(arch.num_classes, np.float32)
    return Model(arch, genome, params)


def _check_batch(model, batch):
    batch = np.asarray(batch)
    if batch.ndim != 4 or batch.shape[1:] != model.arch.input_shape:
        raise ShapeError(
            f"expected batch of shape (B, {', '.join(map(str, model.arch.input_shape))}), "
            f"got {batch.shape}")
    return batch.astype(model.dtype, copy=False)


def _conv_forward(x, w, b):
    bsz, c, h, wd = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (PAD, PAD), (PAD, PAD)))
    win = sliding_window_view(xp, (KERNEL, KERNEL), axis=(2, 3))
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(bsz * h * wd, c * KERNEL * KERNEL)
    out = cols @ w.reshape(w.shape[0], -1).T
    out += b
    out = out.reshape(bsz, h, wd, -1).transpose(0, 3, 1, 2)
    return out, cols


def _conv_backward(dout, cols, w, x_shape, need_dx):
    bsz, c, h, wd = x_shape
    oc = w.shape[0]
    dflat = dout.transpose(0, 2, 3, 1).reshape(-1, oc)
    dw = (dflat.T @ cols).reshape(w.shape)
    db = dflat.sum(axis=0)
    if not need_dx:
        return None, dw, db
    dcols = (dflat @ w.reshape(oc, -1)).reshape(bsz, h, wd, c, KERNEL, KERNEL)
    dxp = np.zeros((bsz, c, h + 2 * PAD, wd + 2 * PAD), dtype=dout.dtype)
    for ki in range(KERNEL):
        for kj in range(KERNEL):
            dxp[:, :, ki:ki + h, kj:kj + wd] += dcols[..., ki, kj].transpose(0, 3, 1, 2)
    return dxp[:, :, PAD:PAD + h, PAD:PAD + wd], dw, db


def _pool_forward(x):
    bsz, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    win = (x[:, :, :2 * h2, :2 * w2]
           .reshape(bsz, c, h2, 2, w2, 2)
           .transpose(0, 1, 2, 4, 3, 5)
           .reshape(bsz, c, h2, w2, 4))
    idx = win.argmax(axis=-1)
    out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return out, idx


def _pool_backward(dout, idx, x_shape):
    bsz, c, h, w = x_shape
    h2, w2 = h // 2, w // 2
    dwin = np.zeros((bsz, c, h2, w2, 4), dtype=dout.dtype)
    np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=-1)
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, :, :2 * h2, :2 * w2] = (dwin.reshape(bsz, c, h2, w2, 2, 2)
                                  .transpose(0, 1, 2, 4, 3, 5)
                                  .reshape(bsz, c, 2 * h2, 2 * w2))
    return dx


def _logits(model, x, keep):
    caches = []
    p = model.params
    for blk, act in zip(model.arch.blocks(), model.genome):
        w, b = p[f"conv{blk.index}.weight"], p[f"conv{blk.index}.bias"]
        x_shape = x.shape
        z, cols = _conv_forward(x, w, b)
        a = act.forward(z)
        cache = {"x_shape": x_shape, "cols": cols, "z": z, "a": a} if keep else None
        if blk.pool_after:
            pre_pool_shape = a.shape
            a, idx = _pool_forward(a)
            if keep:
                cache.update(pool_idx=idx, pre_pool_shape=pre_pool_shape)
        caches.append(cache)
        x = a
    feat = x.mean(axis=(2, 3))
    logits = feat @ p["dense.weight"].T + p["dense.bias"]
    return logits, feat, x.shape, caches


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model, batch):
    """Class probabilities, one row per sample."""
    x = _check_batch(model, batch)
    logits, _, _, _ = _logits(model, x, keep=False)
    return softmax(logits)


def backward(model, batch, labels):
    """Mean softmax cross-entropy over the batch and its parameter gradients.

    Returns
    -------
    grads : dict
        Same keys and shapes as ``model.params``.
    loss : float
    """
    x = _check_batch(model, batch)
    labels = np.asarray(labels)
    k = model.arch.num_classes
    if labels.shape != (x.shape[0],):
        raise LabelError(f"need {x.shape[0]} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise LabelError(f"labels must lie in [0, {k})")
    labels = labels.astype(np.intp)

    logits, feat, last_shape, caches = _logits(model, x, keep=True)
    bsz = x.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(z).sum(axis=1))
    logp_true = z[np.arange(bsz), labels] - logz
    loss = float(-logp_true.mean())

    probs = np.exp(z - logz[:, None])
    dlogits = probs
    dlogits[np.arange(bsz), labels] -= 1
    dlogits /= bsz

    p = model.params
    grads = {
        "dense.weight": dlogits.T @ feat,
        "dense.bias": dlogits.sum(axis=0),
    }
    dfeat = dlogits @ p["dense.weight"]
    hw = last_shape[2] * last_shape[3]
    da = np.broadcast_to(dfeat[:, :, None, None] / hw, last_shape)

    blocks = model.arch.blocks()
    for blk, act, cache in reversed(list(zip(blocks, model.genome, caches))):
        if blk.pool_after:
            da = _pool_backward(da, cache["pool_idx"], cache["pre_pool_shape"])
        dz = da * act.derivative(cache["z"], cache["a"])
        w = p[f"conv{blk.index}.weight"]
        da, dw, db = _conv_backward(dz, cache["cols"], w, cache["x_shape"],
                                    need_dx=blk.index > 0)
        grads[f"conv{blk.index}.weight"] = dw
        grads[f"conv{blk.index}.bias"] = db
    return {name: grads[name].astype(model.dtype, copy=False)
            for name in parameter_names(model.arch)}, loss

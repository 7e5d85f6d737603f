"""Model checkpoint files.

A checkpoint is an uncompressed ``.npz`` archive (numpy's zip container).
Member ``__meta__`` is a UTF-8 JSON document stored as a uint8 array::

    {"format": "cmcnn-checkpoint", "version": 1,
     "arch": {...ArchSpec fields...}, "genome": "RELU-SIG-TANH-ELU",
     "param_names": [...], "dtype": "float32"}

Every other member is one parameter array named as in ``Model.params``
(``conv0.weight``, ``conv0.bias``, ..., ``dense.weight``, ``dense.bias``).
Readers reject other format names and any major version they do not know.
"""

import json
from pathlib import Path

import numpy as np

from ..exceptions import FormatError
from ..genome import Genome
from .arch import KERNEL, ArchSpec
from .model import Model, parameter_names

FORMAT = "cmcnn-checkpoint"
VERSION = 1


def save_checkpoint(model, path):
    path = Path(path)
    names = parameter_names(model.arch)
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "arch": model.arch.to_dict(),
        "genome": str(model.genome),
        "param_names": names,
        "dtype": str(model.dtype),
    }
    blob = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=blob, **{k: model.params[k] for k in names})
    return path


def load_checkpoint(path):
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(z["__meta__"].tobytes().decode("utf-8"))
            arrays = {k: z[k] for k in z.files if k != "__meta__"}
    except (OSError, KeyError, ValueError) as exc:
        raise FormatError(f"{path}: not a readable checkpoint ({exc})") from exc
    if meta.get("format") != FORMAT:
        raise FormatError(f"{path}: unknown format {meta.get('format')!r}")
    if meta.get("version") != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {meta.get('version')}")
    arch = ArchSpec.from_dict(meta["arch"])
    genome = Genome.parse(meta["genome"])
    expected = parameter_names(arch)
    if sorted(arrays) != sorted(expected):
        raise FormatError(f"{path}: parameter set does not match {arch.name}")
    model = Model(arch, genome, {k: arrays[k] for k in expected})
    ref = _shapes(arch)
    for k in expected:
        if model.params[k].shape != ref[k]:
            raise FormatError(f"{path}: {k} has shape {model.params[k].shape}, expected {ref[k]}")
    return model


def _shapes(arch):
    shapes = {}
    for b in arch.blocks():
        shapes[f"conv{b.index}.weight"] = (b.out_channels, b.in_channels, KERNEL, KERNEL)
        shapes[f"conv{b.index}.bias"] = (b.out_channels,)
    shapes["dense.weight"] = (arch.num_classes, arch.feature_channels)
    shapes["dense.bias"] = (arch.num_classes,)
    return shapes

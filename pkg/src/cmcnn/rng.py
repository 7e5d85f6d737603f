"""Labeled, reproducible random streams.

Every random decision in a search draws from a stream derived from the master
seed plus a label (``"init"``, ``"selection"``, ...) and optional integer keys
such as the generation index. Streams never share state, so evaluating models
in parallel cannot shift the evolutionary trajectory.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def _label_words(label):
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def derive_seed(master_seed, label, *keys):
    """Return a 64-bit seed for ``(master_seed, label, *keys)``."""
    entropy = [int(master_seed) & MASK64, *_label_words(label)]
    entropy.extend(int(k) & MASK64 for k in keys)
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream(master_seed, label, *keys):
    """Return an independent ``numpy.random.Generator`` for a labeled purpose."""
    return np.random.default_rng(derive_seed(master_seed, label, *keys))

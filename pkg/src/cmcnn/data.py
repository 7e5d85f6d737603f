"""Image datasets: the CIFAR-10 binary format, prefix/suffix partitions, and
synthetic Gaussian blobs for fast tests.

CIFAR-10 binary batches hold 10000 records of 3073 bytes: one label byte
followed by the 1024 red, 1024 green and 1024 blue bytes of a 32x32 image in
row-major order. The canonical training order is ``data_batch_1.bin`` to
``data_batch_5.bin`` concatenated; partitions are slices of that order.
"""

from dataclasses import dataclass
import logging
import os
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, DataError, FormatError, PartitionError

log = logging.getLogger(__name__)

DATA_DIR_ENV = "CMCNN_DATA_DIR"
CIFAR_SHAPE = (3, 32, 32)
RECORD_BYTES = 1 + 3 * 32 * 32
RECORDS_PER_BATCH = 10000
BATCH_BYTES = RECORD_BYTES * RECORDS_PER_BATCH
TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
TEST_FILE = "test_batch.bin"
CIFAR_CLASSES = ("airplane", "automobile", "bird", "cat", "deer",
                 "dog", "frog", "horse", "ship", "truck")


@dataclass(frozen=True)
class LabeledImageSet:
    """Images ``(count, C, H, W)``, integer labels and the class count.

    ``indices`` records each sample's 0-based position in the set it was
    sliced from, so partitions can be checked for order and overlap. The
    arrays are marked read-only in place; pass copies to keep them writable.
    """

    images: np.ndarray
    labels: np.ndarray
    num_classes: int
    indices: np.ndarray = None

    def __post_init__(self):
        if self.images.ndim != 4:
            raise DataError(f"images must be 4-D, got shape {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise DataError(f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataError(f"labels outside [0, {self.num_classes})")
        if self.indices is None:
            object.__setattr__(self, "indices", np.arange(len(self.labels)))
        for arr in (self.images, self.labels, self.indices):
            arr.flags.writeable = False

    def __len__(self):
        return len(self.labels)

    @property
    def image_shape(self):
        return tuple(self.images.shape[1:])

    def subset(self, start, stop):
        return LabeledImageSet(self.images[start:stop], self.labels[start:stop],
                               self.num_classes, self.indices[start:stop])


def read_cifar_batch(path, expected_records=RECORDS_PER_BATCH):
    """Raw ``(uint8 images (n, 3, 32, 32), uint8 labels (n,))`` of one batch file.

    ``expected_records=None`` accepts any whole number of records.
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"{path}: missing CIFAR-10 batch file")
    size = path.stat().st_size
    if expected_records is not None and size != expected_records * RECORD_BYTES:
        raise FormatError(
            f"{path}: {size} bytes, expected {expected_records * RECORD_BYTES} "
            f"({expected_records} records of {RECORD_BYTES} bytes)")
    if size == 0 or size % RECORD_BYTES:
        raise FormatError(f"{path}: {size} bytes is not a whole number of records")
    raw = np.fromfile(path, dtype=np.uint8).reshape(-1, RECORD_BYTES)
    labels = raw[:, 0].copy()
    if labels.max() > 9:
        bad = int(np.argmax(labels > 9))
        raise FormatError(f"{path}: corrupt label byte {labels[bad]} in record {bad}")
    return raw[:, 1:].reshape(-1, *CIFAR_SHAPE), labels


def write_cifar_batch(path, images, labels):
    """Write uint8 images ``(n, 3, 32, 32)`` and labels in the binary layout."""
    images = np.asarray(images)
    labels = np.asarray(labels)
    if images.dtype != np.uint8 or images.shape[1:] != CIFAR_SHAPE:
        raise DataError(f"need uint8 images of shape (n, 3, 32, 32), got "
                        f"{images.dtype} {images.shape}")
    if len(labels) != len(images) or labels.min() < 0 or labels.max() > 9:
        raise DataError("need one label in [0, 9] per image")
    rec = np.empty((len(images), RECORD_BYTES), dtype=np.uint8)
    rec[:, 0] = labels
    rec[:, 1:] = images.reshape(len(images), -1)
    Path(path).write_bytes(rec.tobytes())


def to_uint8(images):
    """Quantize ``[0, 1]`` float images to bytes (values outside are clipped)."""
    return np.clip(np.rint(np.asarray(images) * 255), 0, 255).astype(np.uint8)


def export_cifar(directory, train, test):
    """Write ``train`` (50000) and ``test`` (10000) sets as a CIFAR-10 archive."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if len(train) != RECORDS_PER_BATCH * len(TRAIN_FILES) or len(test) != RECORDS_PER_BATCH:
        raise DataError("a CIFAR-10 archive needs exactly 50000 train and 10000 test images")
    for i, name in enumerate(TRAIN_FILES):
        part = train.subset(i * RECORDS_PER_BATCH, (i + 1) * RECORDS_PER_BATCH)
        write_cifar_batch(directory / name, to_uint8(part.images), part.labels)
    write_cifar_batch(directory / TEST_FILE, to_uint8(test.images), test.labels)


def resolve_data_dir(directory=None):
    directory = directory or os.environ.get(DATA_DIR_ENV)
    if not directory:
        raise ConfigError(f"no data directory given and ${DATA_DIR_ENV} is unset")
    return Path(directory)


def load_cifar10(directory=None, dtype=np.float32):
    """Load the full archive as ``(train, test)`` with pixels scaled by 1/255.

    Every batch is validated before any is converted, so a bad file never
    yields a partial dataset.
    """
    directory = resolve_data_dir(directory)
    names = (*TRAIN_FILES, TEST_FILE)
    batches = [read_cifar_batch(directory / name) for name in names]
    scale = dtype(1.0 / 255.0)

    def convert(parts):
        images = np.concatenate([p[0] for p in parts]).astype(dtype) * scale
        labels = np.concatenate([p[1] for p in parts]).astype(np.int64)
        return LabeledImageSet(images, labels, 10)

    train, test = convert(batches[:5]), convert(batches[5:])
    log.info("loaded CIFAR-10 from %s: %d train, %d test", directory, len(train), len(test))
    return train, test


def _check_count(name, k, available):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= available:
        raise PartitionError(f"{name}={k} outside [1, {available}]")


def partition_first(train, test, n_train, n_test):
    """Leading ``n_train`` training and ``n_test`` test samples, order kept."""
    _check_count("n_train", n_train, len(train))
    _check_count("n_test", n_test, len(test))
    return train.subset(0, n_train), test.subset(0, n_test)


def partition_second(train, test, k_train, k_test):
    """Trailing ``k_train`` training and ``k_test`` test samples, order kept."""
    _check_count("k_train", k_train, len(train))
    _check_count("k_test", k_test, len(test))
    return (train.subset(len(train) - k_train, len(train)),
            test.subset(len(test) - k_test, len(test)))


PARTITIONS = {"first": partition_first, "second": partition_second}


def partition(method, train, test, n_train, n_test):
    try:
        fn = PARTITIONS[method]
    except KeyError:
        raise PartitionError(f"unknown partition method {method!r}") from None
    return fn(train, test, n_train, n_test)


def class_patterns(num_classes, image_shape, seed):
    """Mutually orthogonal unit-norm mean pattern per class.

    Each raw pattern mixes a per-channel offset with pixel-level detail so
    the classes differ both in global colour and in spatial structure; the
    set is then orthonormalized so every pair of classes is equally far
    apart. If there are more classes than pixels, patterns are only
    normalized.
    """
    rng = np.random.default_rng([seed, 0])
    c = image_shape[0]
    offsets = rng.normal(size=(num_classes, c, 1, 1))
    detail = rng.normal(size=(num_classes, *image_shape))
    pat = (offsets + 0.5 * detail).reshape(num_classes, -1)
    if num_classes <= pat.shape[1]:
        q, r = np.linalg.qr(pat.T)
        # fix signs so each pattern stays close to its raw draw
        pat = (q * np.sign(np.diag(r))).T
    else:
        pat = pat / np.linalg.norm(pat, axis=1, keepdims=True)
    return pat.reshape(num_classes, *image_shape)


def synthetic_blobs(num_classes=10, samples_per_class=100, image_shape=(3, 32, 32),
                    separation=5.0, seed=0, noise=1.0, pattern_seed=None,
                    dtype=np.float32):
    """Gaussian blobs around one mean image per class.

    Class ``c`` draws ``separation * pattern[c] + noise * N(0, I)`` where the
    patterns are orthonormal, so ``separation`` is each mean's distance from
    the origin in noise standard deviations and any two means lie
    ``separation * sqrt(2)`` apart. Samples are
    interleaved by class (0, 1, ..., K-1, 0, 1, ...). Pixels are not rescaled
    to [0, 1]; use :func:`to_uint8` after an explicit rescale to export.

    ``pattern_seed`` (default ``seed``) fixes the class means separately from
    the noise, so train and test sets can share classes but not samples.
    """
    image_shape = tuple(int(d) for d in image_shape)
    if num_classes < 2 or samples_per_class < 1:
        raise ConfigError("need num_classes >= 2 and samples_per_class >= 1")
    if len(image_shape) != 3 or min(image_shape) < 1:
        raise ConfigError(f"bad image shape {image_shape}")
    if not separation > 0:
        raise ConfigError("separation must be positive")
    pattern_seed = seed if pattern_seed is None else pattern_seed
    means = class_patterns(num_classes, image_shape, pattern_seed) * separation
    labels = np.tile(np.arange(num_classes), samples_per_class)
    rng = np.random.default_rng([seed, 1])
    images = means[labels] + noise * rng.normal(size=(len(labels), *image_shape))
    return LabeledImageSet(images.astype(dtype), labels.astype(np.int64), num_classes)

import numpy as np
import pytest

from cmcnn.data import (CIFAR_CLASSES, DATA_DIR_ENV, RECORD_BYTES, TEST_FILE, TRAIN_FILES,
                        LabeledImageSet, class_patterns, export_cifar, load_cifar10,
                        partition, partition_first, partition_second, read_cifar_batch,
                        resolve_data_dir, synthetic_blobs, to_uint8, write_cifar_batch)
from cmcnn.exceptions import ConfigError, DataError, FormatError, PartitionError
from cmcnn.metrics import f1_score


def _fake(n, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.integers(0, 256, (n, 3, 32, 32), dtype=np.uint8),
            rng.integers(0, 10, n, dtype=np.uint8))


def test_batch_round_trip_is_byte_exact(tmp_path):
    images, labels = _fake(7)
    path = tmp_path / "b.bin"
    write_cifar_batch(path, images, labels)
    raw = path.read_bytes()
    assert len(raw) == 7 * RECORD_BYTES
    # record 3: label byte, then R plane, G plane, B plane
    rec = raw[3 * RECORD_BYTES:4 * RECORD_BYTES]
    assert rec[0] == labels[3]
    assert rec[1:1025] == images[3, 0].tobytes()
    assert rec[2049:] == images[3, 2].tobytes()
    back_images, back_labels = read_cifar_batch(path, expected_records=None)
    np.testing.assert_array_equal(back_images, images)
    np.testing.assert_array_equal(back_labels, labels)
    write_cifar_batch(tmp_path / "c.bin", back_images, back_labels)
    assert (tmp_path / "c.bin").read_bytes() == raw


def test_truncated_and_malformed_files(tmp_path):
    images, labels = _fake(3)
    path = tmp_path / "b.bin"
    write_cifar_batch(path, images, labels)
    with pytest.raises(FormatError, match="expected 30730000"):
        read_cifar_batch(path)
    data = path.read_bytes()
    path.write_bytes(data[:-5])
    with pytest.raises(FormatError, match="whole number"):
        read_cifar_batch(path, expected_records=None)
    path.write_bytes(b"")
    with pytest.raises(FormatError):
        read_cifar_batch(path, expected_records=None)
    bad = bytearray(data)
    bad[RECORD_BYTES] = 200
    path.write_bytes(bytes(bad))
    with pytest.raises(FormatError, match="record 1"):
        read_cifar_batch(path, expected_records=None)
    with pytest.raises(FormatError, match="missing"):
        read_cifar_batch(tmp_path / "nope.bin")


def test_writer_validates_input(tmp_path):
    images, labels = _fake(2)
    with pytest.raises(DataError):
        write_cifar_batch(tmp_path / "x", images.astype(np.float32), labels)
    with pytest.raises(DataError):
        write_cifar_batch(tmp_path / "x", images, np.array([0, 10]))


def test_loader_validates_every_file_before_converting(tmp_path):
    for name in (*TRAIN_FILES, TEST_FILE):
        (tmp_path / name).write_bytes(b"\0" * RECORD_BYTES)
    with pytest.raises(FormatError):
        load_cifar10(tmp_path)


def test_data_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv(DATA_DIR_ENV, raising=False)
    with pytest.raises(ConfigError, match=DATA_DIR_ENV):
        resolve_data_dir()
    monkeypatch.setenv(DATA_DIR_ENV, str(tmp_path))
    assert resolve_data_dir() == tmp_path
    assert resolve_data_dir("/explicit") .as_posix() == "/explicit"


def test_to_uint8_quantizes_and_clips():
    out = to_uint8(np.array([-0.5, 0.0, 0.5, 1.0, 2.0]))
    assert out.tolist() == [0, 0, 128, 255, 255]


def test_export_requires_full_archive(tmp_path):
    small = synthetic_blobs(10, 1)
    with pytest.raises(DataError):
        export_cifar(tmp_path, small, small)


def _numbered(n, k=10):
    return LabeledImageSet(np.zeros((n, 1, 1, 1), np.float32), np.arange(n) % k, k)


def test_partitions_are_prefix_and_suffix_slices():
    train, test = _numbered(50), _numbered(20)
    a, b = partition_first(train, test, 12, 5)
    assert a.indices.tolist() == list(range(12)) and b.indices.tolist() == list(range(5))
    c, d = partition_second(train, test, 12, 5)
    assert c.indices.tolist() == list(range(38, 50)) and d.indices.tolist() == list(range(15, 20))
    # complementary sizes tile the set exactly with no overlap
    x, _ = partition("first", train, test, 30, 1)
    y, _ = partition("second", train, test, 20, 1)
    assert sorted(x.indices.tolist() + y.indices.tolist()) == list(range(50))


@pytest.mark.parametrize("n", [0, -1, 51, 2.5])
def test_partition_counts_are_validated(n):
    with pytest.raises(PartitionError):
        partition_first(_numbered(50), _numbered(20), n, 1)
    with pytest.raises(PartitionError):
        partition_second(_numbered(50), _numbered(20), 1, n if n != 51 else 21)


def test_unknown_partition_method():
    with pytest.raises(PartitionError):
        partition("third", _numbered(5), _numbered(5), 1, 1)


def test_image_sets_are_read_only_and_validated():
    s = _numbered(4)
    with pytest.raises(ValueError):
        s.images[0] = 1
    with pytest.raises(DataError):
        LabeledImageSet(np.zeros((2, 1, 1)), np.zeros(2, int), 2)
    with pytest.raises(DataError):
        LabeledImageSet(np.zeros((2, 1, 1, 1)), np.array([0, 2]), 2)
    with pytest.raises(DataError):
        LabeledImageSet(np.zeros((2, 1, 1, 1)), np.array([0]), 2)


def test_synthetic_blobs_shape_balance_and_determinism():
    a = synthetic_blobs(4, 25, (2, 6, 6), seed=3)
    b = synthetic_blobs(4, 25, (2, 6, 6), seed=3)
    assert a.images.shape == (100, 2, 6, 6) and a.images.dtype == np.float32
    assert np.bincount(a.labels).tolist() == [25] * 4
    assert a.labels[:8].tolist() == [0, 1, 2, 3, 0, 1, 2, 3]
    np.testing.assert_array_equal(a.images, b.images)
    with pytest.raises(ConfigError):
        synthetic_blobs(1, 5)
    with pytest.raises(ConfigError):
        synthetic_blobs(2, 5, separation=0)


def test_class_patterns_are_orthonormal():
    p = class_patterns(5, (3, 4, 4), seed=0).reshape(5, -1)
    np.testing.assert_allclose(p @ p.T, np.eye(5), atol=1e-12)
    many = class_patterns(6, (1, 2, 2), seed=0).reshape(6, -1)
    np.testing.assert_allclose(np.linalg.norm(many, axis=1), 1.0)


def test_synthetic_blobs_are_separable_by_nearest_mean():
    # the Bayes-optimal rule for isotropic blobs: nearest true class mean
    test = synthetic_blobs(10, 100, (3, 8, 8), separation=5.0, seed=2, pattern_seed=0)
    means = 5.0 * class_patterns(10, (3, 8, 8), seed=0)
    d = ((test.images[:, None] - means[None]) ** 2).sum(axis=(2, 3, 4))
    assert f1_score(test.labels, d.argmin(1), 10) >= 0.99


def test_class_names():
    assert len(CIFAR_CLASSES) == 10 and CIFAR_CLASSES[0] == "airplane"

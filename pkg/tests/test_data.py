import gzip
import struct

import numpy as np
import pytest

from qtnn.data import (
    Dataset,
    IdxFormatError,
    encode_idx_images,
    encode_idx_labels,
    load_idx_images,
    load_idx_labels,
    make_schedule,
    split_per_category,
    take_per_category,
)
from qtnn.network import TrainingSchedule


def tiny_image_stream():
    return struct.pack(">IIII", 0x00000803, 1, 2, 2) + bytes([0, 128, 255, 64])


class TestIdxImages:
    def test_direct_decode(self):
        images = load_idx_images(tiny_image_stream())
        assert images.shape == (1, 2, 2)
        assert images[0].tolist() == [[0, 128], [255, 64]]

    def test_label_magic_rejected_by_image_loader(self):
        stream = struct.pack(">II", 0x00000801, 12) + bytes(range(12))
        with pytest.raises(IdxFormatError, match="magic"):
            load_idx_images(stream)

    def test_truncated_payload(self):
        with pytest.raises(IdxFormatError, match="payload"):
            load_idx_images(tiny_image_stream()[:-1])

    def test_trailing_garbage_rejected(self):
        with pytest.raises(IdxFormatError, match="payload"):
            load_idx_images(tiny_image_stream() + b"\x00")

    def test_short_header(self):
        with pytest.raises(IdxFormatError, match="header"):
            load_idx_images(b"\x00\x00\x08")

    def test_expected_shape_enforced(self):
        with pytest.raises(IdxFormatError, match="2x2"):
            load_idx_images(tiny_image_stream(), expected_shape=(28, 28))

    def test_gzip_transparent(self):
        images = load_idx_images(gzip.compress(tiny_image_stream()))
        assert images[0, 1, 0] == 255

    def test_file_and_filelike_sources(self, tmp_path):
        path = tmp_path / "img-idx3-ubyte"
        path.write_bytes(tiny_image_stream())
        assert load_idx_images(path).shape == (1, 2, 2)
        with open(path, "rb") as fh:
            assert load_idx_images(fh).shape == (1, 2, 2)


class TestIdxLabels:
    def test_direct_decode(self):
        stream = struct.pack(">II", 0x00000801, 3) + bytes([0, 9, 4])
        assert load_idx_labels(stream).tolist() == [0, 9, 4]

    def test_truncated(self):
        stream = struct.pack(">II", 0x00000801, 3) + bytes([0, 9])
        with pytest.raises(IdxFormatError, match="payload"):
            load_idx_labels(stream)

    def test_wrong_magic(self):
        with pytest.raises(IdxFormatError, match="magic"):
            load_idx_labels(tiny_image_stream())


class TestRoundTrip:
    def test_images_bit_exact(self):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, size=(7, 5, 3), dtype=np.uint8)
        decoded = load_idx_images(encode_idx_images(images))
        assert np.array_equal(decoded, images)
        assert encode_idx_images(decoded) == encode_idx_images(images)

    def test_labels_bit_exact(self):
        labels = np.array([0, 3, 9, 9, 1], dtype=np.uint8)
        decoded = load_idx_labels(encode_idx_labels(labels))
        assert np.array_equal(decoded, labels)


class TestDataset:
    def test_from_arrays_scales_pixels(self):
        images = np.full((4, 3, 3), 255, dtype=np.uint8)
        ds = Dataset.from_arrays(images, [0, 1, 2, 0], num_categories=3)
        assert ds.images.max() == 1.0
        assert ds.input_size == 9
        assert sorted(ds.category_index) == [0, 1, 2]
        assert ds.category_index[0].tolist() == [0, 3]

    def test_category_index_partitions_everything(self):
        rng = np.random.default_rng(1)
        ds = Dataset(images=rng.random((30, 4)), labels=rng.integers(0, 5, 30), num_categories=5)
        joined = np.sort(np.concatenate([ds.category_index[c] for c in range(5)]))
        assert joined.tolist() == list(range(30))

    def test_validation(self):
        with pytest.raises(ValueError):
            Dataset(images=np.zeros((2, 4)), labels=np.array([0]), num_categories=2)
        with pytest.raises(ValueError):
            Dataset(images=np.zeros((2, 4)), labels=np.array([0, 5]), num_categories=2)
        with pytest.raises(ValueError):
            Dataset(images=np.full((1, 4), 2.0), labels=np.array([0]), num_categories=1)


class TestSubsets:
    def test_take_per_category(self, blob_dataset):
        subset = take_per_category(blob_dataset, 12, seed=3)
        assert len(subset) == 120
        for c in range(10):
            assert len(subset.category_index[c]) == 12

    def test_take_deterministic(self, blob_dataset):
        a = take_per_category(blob_dataset, 5, seed=3)
        b = take_per_category(blob_dataset, 5, seed=3)
        assert np.array_equal(a.images, b.images)

    def test_take_insufficient(self, blob_dataset):
        with pytest.raises(ValueError, match="category"):
            take_per_category(blob_dataset, 1000, seed=0)

    def test_split_disjoint_and_sized(self, blob_dataset):
        subset = take_per_category(blob_dataset, 20, seed=1)
        train, test = split_per_category(subset, 10, seed=1)
        assert len(train) == 100 and len(test) == 100
        train_rows = {tuple(row) for row in train.images}
        test_rows = {tuple(row) for row in test.images}
        assert not train_rows & test_rows


class TestSchedule:
    def test_single_batch_single_epoch(self, blob_dataset):
        schedule = TrainingSchedule(n_batches=1, epochs_per_batch=1)
        plan = make_schedule(blob_dataset, schedule, seed=0)
        assert len(plan) == 10
        assert len(set(plan.tolist())) == 10
        assert sorted(blob_dataset.labels[plan].tolist()) == list(range(10))

    def test_deterministic(self, blob_dataset):
        schedule = TrainingSchedule(n_batches=3, epochs_per_batch=4)
        assert np.array_equal(
            make_schedule(blob_dataset, schedule, seed=9),
            make_schedule(blob_dataset, schedule, seed=9),
        )

    def test_full_default_plan_length(self):
        # labels only matter for scheduling; keep the images tiny
        labels = np.repeat(np.arange(10), 32)
        ds = Dataset(images=np.zeros((320, 2)), labels=labels, num_categories=10)
        plan = make_schedule(ds, TrainingSchedule(), seed=0)
        assert len(plan) == 32_000

    def test_no_reuse_across_batches(self, blob_dataset):
        schedule = TrainingSchedule(n_batches=4, epochs_per_batch=2, images_per_category_per_batch=3)
        plan = make_schedule(blob_dataset, schedule, seed=2)
        assert len(plan) == 4 * 2 * 10 * 3
        batch_span = 2 * 10 * 3
        seen = set()
        for b in range(4):
            batch = plan[b * batch_span : (b + 1) * batch_span]
            epoch = set(batch[: 10 * 3].tolist())
            assert len(epoch) == 30
            assert set(batch.tolist()) == epoch  # every epoch replays the same batch
            assert not (epoch & seen)
            seen |= epoch

    def test_epoch_is_permutation_of_batch(self, blob_dataset):
        schedule = TrainingSchedule(n_batches=1, epochs_per_batch=5)
        plan = make_schedule(blob_dataset, schedule, seed=4)
        first = sorted(plan[:10].tolist())
        orders = {tuple(plan[e * 10 : (e + 1) * 10].tolist()) for e in range(5)}
        for e in range(5):
            assert sorted(plan[e * 10 : (e + 1) * 10].tolist()) == first
        assert len(orders) > 1  # the epoch order actually varies

    def test_insufficient_images(self, blob_dataset):
        schedule = TrainingSchedule(n_batches=50, epochs_per_batch=1)
        with pytest.raises(ValueError, match="schedule needs"):
            make_schedule(blob_dataset, schedule, seed=0)

    def test_per_batch_category_counts(self, blob_dataset):
        schedule = TrainingSchedule(n_batches=2, epochs_per_batch=1, images_per_category_per_batch=2)
        plan = make_schedule(blob_dataset, schedule, seed=5)
        for b in range(2):
            batch = plan[b * 20 : (b + 1) * 20]
            counts = np.bincount(blob_dataset.labels[batch], minlength=10)
            assert np.all(counts == 2)

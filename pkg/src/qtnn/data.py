"""MNIST/Fashion MNIST IDX ingestion and seeded training schedules.

IDX file layout (big endian):
  images:  0x00000803 | count | rows | cols | count*rows*cols unsigned bytes
  labels:  0x00000801 | count | count unsigned bytes
Gzip-framed streams are decompressed transparently.
"""

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from .seeding import substream

__all__ = [
    "IMAGE_MAGIC",
    "LABEL_MAGIC",
    "FASHION_MNIST_CATEGORIES",
    "IdxFormatError",
    "load_idx_images",
    "load_idx_labels",
    "encode_idx_images",
    "encode_idx_labels",
    "Dataset",
    "take_per_category",
    "split_per_category",
    "make_schedule",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

# Canonical label order 0..9, matching the published dataset.
FASHION_MNIST_CATEGORIES = (
    "T-Shirt",
    "Trouser",
    "Pullover",
    "Dress",
    "Coat",
    "Sandal",
    "Shirt",
    "Sneaker",
    "Bag",
    "Ankle Boot",
)


class IdxFormatError(ValueError):
    pass


def _read_stream(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif hasattr(source, "read"):
        raw = source.read()
    else:
        with open(source, "rb") as fh:
            raw = fh.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def load_idx_images(source, expected_shape=None) -> np.ndarray:
    """Decode an IDX image file into a (count, rows, cols) uint8 array."""
    raw = _read_stream(source)
    if len(raw) < 16:
        raise IdxFormatError(f"image stream too short for a header ({len(raw)} bytes)")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(f"bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
    if expected_shape is not None and (rows, cols) != tuple(expected_shape):
        raise IdxFormatError(f"images are {rows}x{cols}, expected {expected_shape[0]}x{expected_shape[1]}")
    payload = raw[16:]
    expected = count * rows * cols
    if len(payload) != expected:
        raise IdxFormatError(f"image payload holds {len(payload)} bytes, header promises {expected}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols).copy()


def load_idx_labels(source) -> np.ndarray:
    """Decode an IDX label file into a (count,) integer array."""
    raw = _read_stream(source)
    if len(raw) < 8:
        raise IdxFormatError(f"label stream too short for a header ({len(raw)} bytes)")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != LABEL_MAGIC:
        raise IdxFormatError(f"bad label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
    payload = raw[8:]
    if len(payload) != count:
        raise IdxFormatError(f"label payload holds {len(payload)} bytes, header promises {count}")
    return np.frombuffer(payload, dtype=np.uint8).astype(np.int64)


def encode_idx_images(images) -> bytes:
    arr = np.ascontiguousarray(np.asarray(images, dtype=np.uint8))
    if arr.ndim != 3:
        raise ValueError("expected a (count, rows, cols) array")
    header = struct.pack(">IIII", IMAGE_MAGIC, arr.shape[0], arr.shape[1], arr.shape[2])
    return header + arr.tobytes()


def encode_idx_labels(labels) -> bytes:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d label array")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("labels must fit in an unsigned byte")
    return struct.pack(">II", LABEL_MAGIC, arr.size) + arr.astype(np.uint8).tobytes()


@dataclass
class Dataset:
    """Flattened images in [0, 1] with labels and a per-category index."""

    images: np.ndarray  # (n, L) float64
    labels: np.ndarray  # (n,) int64
    num_categories: int
    category_index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 2:
            raise ValueError("images must be a (count, pixels) matrix")
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if self.num_categories < 1:
            raise ValueError("num_categories must be >= 1")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_categories):
            raise ValueError(f"labels must lie in [0, {self.num_categories})")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        if not self.category_index:
            self.category_index = {
                c: np.flatnonzero(self.labels == c) for c in range(self.num_categories)
            }

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def input_size(self) -> int:
        return self.images.shape[1]

    @classmethod
    def from_arrays(cls, pixel_images, labels, num_categories=10) -> "Dataset":
        """Build from raw (count, rows, cols) byte images; scales by 1/255."""
        arr = np.asarray(pixel_images)
        if arr.ndim != 3:
            raise ValueError("expected a (count, rows, cols) image array")
        flat = arr.reshape(arr.shape[0], -1).astype(float) / 255.0
        return cls(images=flat, labels=np.asarray(labels), num_categories=num_categories)

    @classmethod
    def from_idx(cls, image_source, label_source, num_categories=10) -> "Dataset":
        images = load_idx_images(image_source)
        labels = load_idx_labels(label_source)
        return cls.from_arrays(images, labels, num_categories=num_categories)


def take_per_category(dataset: Dataset, per_category: int, seed: int) -> Dataset:
    """Seeded selection of ``per_category`` images from every category."""
    rng = substream(seed, "subset")
    keep = []
    for c in range(dataset.num_categories):
        pool = dataset.category_index[c]
        if len(pool) < per_category:
            raise ValueError(f"category {c} holds {len(pool)} images, need {per_category}")
        keep.append(rng.choice(pool, size=per_category, replace=False))
    order = np.sort(np.concatenate(keep))
    return Dataset(
        images=dataset.images[order],
        labels=dataset.labels[order],
        num_categories=dataset.num_categories,
    )


def split_per_category(dataset: Dataset, train_per_category: int, seed: int):
    """Seeded disjoint train/test split with a fixed per-category train count."""
    rng = substream(seed, "subset")
    train_idx, test_idx = [], []
    for c in range(dataset.num_categories):
        pool = rng.permutation(dataset.category_index[c])
        if len(pool) <= train_per_category:
            raise ValueError(f"category {c} holds {len(pool)} images, cannot keep a test remainder")
        train_idx.append(pool[:train_per_category])
        test_idx.append(pool[train_per_category:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    make = lambda idx: Dataset(
        images=dataset.images[idx], labels=dataset.labels[idx], num_categories=dataset.num_categories
    )
    return make(train_idx), make(test_idx)


def make_schedule(dataset: Dataset, schedule, seed: int) -> np.ndarray:
    """Materialise the batch/epoch structure as a flat list of sample indices.

    Each batch draws ``images_per_category_per_batch`` fresh images from
    every category (no image is reused across batches); every epoch
    replays that batch in a fresh seeded permutation.  Plan length is
    n_batches * epochs_per_batch * categories * images_per_category_per_batch.
    """
    rng = substream(seed, "schedule")
    n_batches = int(schedule.n_batches)
    epochs = int(schedule.epochs_per_batch)
    per_cat = int(schedule.images_per_category_per_batch)
    need = n_batches * per_cat

    drawn = {}
    for c in range(dataset.num_categories):
        pool = dataset.category_index[c]
        if len(pool) < need:
            raise ValueError(
                f"category {c} holds {len(pool)} images, schedule needs {need} "
                f"({n_batches} batches x {per_cat} per category)"
            )
        drawn[c] = rng.choice(pool, size=need, replace=False).reshape(n_batches, per_cat)

    plan = []
    for b in range(n_batches):
        batch = np.concatenate([drawn[c][b] for c in range(dataset.num_categories)])
        for _ in range(epochs):
            plan.append(rng.permutation(batch))
    if not plan:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(plan).astype(np.int64)

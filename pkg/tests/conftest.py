import os
from pathlib import Path

import numpy as np
import pytest

from qtnn.data import Dataset, encode_idx_images, encode_idx_labels

REPO_ROOT = Path(__file__).resolve().parent.parent

FASHION_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def _find_fashion_file(directory: Path, stem: str):
    for suffix in (".gz", ""):
        candidate = directory / (stem + suffix)
        if candidate.exists():
            return candidate
    return None


def fashion_mnist_paths():
    """Locate the official Fashion MNIST IDX files, or None if absent."""
    candidates = []
    env_dir = os.environ.get("QTNN_DATA_DIR")
    if env_dir:
        candidates.append(Path(env_dir))
    candidates.append(REPO_ROOT / "data")
    for directory in candidates:
        if not directory.is_dir():
            continue
        found = {key: _find_fashion_file(directory, stem) for key, stem in FASHION_FILES.items()}
        if all(found.values()):
            return found
    return None


@pytest.fixture(scope="session")
def fashion_paths():
    paths = fashion_mnist_paths()
    if paths is None:
        pytest.skip(
            "Fashion MNIST files not found; run scripts/fetch_fashion_mnist.py "
            "and set QTNN_DATA_DIR (or place the files in ./data)"
        )
    return paths


def make_blob_images(n_per_category, categories=10, side=28, seed=99, noise=0.25):
    """Synthetic category-separable image set: one smooth random template per
    category plus pixel noise.  Returns (images uint8, labels)."""
    rng = np.random.default_rng(seed)
    base = rng.random((categories, side + 8, side + 8))
    kernel = np.ones((9, 9)) / 81.0
    templates = []
    for c in range(categories):
        smooth = base[c]
        for _ in range(2):  # cheap separable-ish smoothing
            smooth = np.apply_along_axis(lambda r: np.convolve(r, np.ones(9) / 9, mode="same"), 1, smooth)
            smooth = np.apply_along_axis(lambda r: np.convolve(r, np.ones(9) / 9, mode="same"), 0, smooth)
        crop = smooth[4 : 4 + side, 4 : 4 + side]
        crop = (crop - crop.min()) / (crop.max() - crop.min())
        templates.append(crop)
    images = []
    labels = []
    for c in range(categories):
        for _ in range(n_per_category):
            img = np.clip(templates[c] + noise * rng.standard_normal((side, side)), 0.0, 1.0)
            images.append(np.round(img * 255).astype(np.uint8))
            labels.append(c)
    order = rng.permutation(len(images))
    return np.asarray(images)[order], np.asarray(labels)[order]


@pytest.fixture(scope="session")
def blob_dataset():
    images, labels = make_blob_images(n_per_category=40)
    return Dataset.from_arrays(images, labels, num_categories=10)


@pytest.fixture(scope="session")
def blob_idx_files(tmp_path_factory):
    """The synthetic image set written as IDX files, for CLI runs."""
    images, labels = make_blob_images(n_per_category=40)
    directory = tmp_path_factory.mktemp("blob_idx")
    image_path = directory / "images-idx3-ubyte"
    label_path = directory / "labels-idx1-ubyte"
    image_path.write_bytes(encode_idx_images(images))
    label_path.write_bytes(encode_idx_labels(labels))
    return {"images": image_path, "labels": label_path}


def make_separable_dataset(n_per_category=30, pixels=16, seed=5):
    """Two linearly separable categories on disjoint pixel blocks."""
    rng = np.random.default_rng(seed)
    images = []
    labels = []
    for c in (0, 1):
        for _ in range(n_per_category):
            img = 0.05 * rng.random(pixels)
            half = slice(0, pixels // 2) if c == 0 else slice(pixels // 2, pixels)
            img[half] += 0.6 + 0.3 * rng.random(pixels // 2)
            images.append(np.clip(img, 0.0, 1.0))
            labels.append(c)
    return Dataset(images=np.asarray(images), labels=np.asarray(labels), num_categories=2)

"""Divergence and entropy figures-of-merit, weight histograms, 2D spectra.

All metrics default to base-2 logarithms: entropies come out in bits and
the Jensen-Shannon divergence is bounded by 1.
"""

import csv

import numpy as np

__all__ = [
    "DEFAULT_BINS",
    "DEFAULT_RANGE",
    "shannon_entropy",
    "kld",
    "jsd",
    "weight_histogram",
    "histogram_bin_edges",
    "histogram_divergence",
    "spectrum2d",
    "WeightHistory",
    "write_weight_history_csv",
    "read_weight_history_csv",
    "write_matrix_csv",
    "write_pgm",
]

DEFAULT_BINS = 101           # odd count centres one bin on zero
DEFAULT_RANGE = (-1.0, 1.0)  # matches the weight initialisation range

_SUM_TOL = 1e-9


def _as_distribution(p):
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a distribution must be a non-empty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("a distribution must be finite")
    if np.any(arr < 0.0):
        raise ValueError("a distribution must be non-negative")
    total = arr.sum()
    if abs(total - 1.0) > _SUM_TOL:
        raise ValueError(f"distribution entries sum to {total!r}, expected 1 within {_SUM_TOL}")
    return arr


def _check_base(log_base):
    base = float(log_base)
    if not base > 1.0:
        raise ValueError(f"log base must be > 1, got {log_base!r}")
    return base


def shannon_entropy(p, log_base=2.0) -> float:
    """H(p) = -sum p_i log(p_i), with 0 log 0 = 0.  Bits by default."""
    arr = _as_distribution(p)
    base = _check_base(log_base)
    nz = arr[arr > 0.0]
    return float(-(nz * np.log(nz)).sum() / np.log(base))


def kld(p, q, log_base=2.0) -> float:
    """Kullback-Leibler divergence sum p_i log(p_i / q_i).

    Returns ``inf`` when q assigns zero mass somewhere p does not.
    """
    pa = _as_distribution(p)
    qa = _as_distribution(q)
    if pa.shape != qa.shape:
        raise ValueError(f"dimension mismatch: {pa.shape} vs {qa.shape}")
    base = _check_base(log_base)
    support = pa > 0.0
    if np.any(qa[support] == 0.0):
        return float("inf")
    ps = pa[support]
    return float((ps * np.log(ps / qa[support])).sum() / np.log(base))


def jsd(p, q, log_base=2.0, distance=False) -> float:
    """Jensen-Shannon divergence.

        JSD(p, q) = 1/2 sum_i [ p_i log(2 p_i / (p_i + q_i))
                              + q_i log(2 q_i / (p_i + q_i)) ]

    Zero entries contribute zero, as in the entropy convention.  In base
    2 the value lies in [0, 1].  With ``distance=True`` the square root
    (the Jensen-Shannon metric) is returned instead.
    """
    pa = _as_distribution(p)
    qa = _as_distribution(q)
    if pa.shape != qa.shape:
        raise ValueError(f"dimension mismatch: {pa.shape} vs {qa.shape}")
    base = _check_base(log_base)
    m = pa + qa
    total = 0.0
    pnz = pa > 0.0
    if pnz.any():
        total += (pa[pnz] * np.log(2.0 * pa[pnz] / m[pnz])).sum()
    qnz = qa > 0.0
    if qnz.any():
        total += (qa[qnz] * np.log(2.0 * qa[qnz] / m[qnz])).sum()
    value = max(0.5 * total / np.log(base), 0.0)  # clip roundoff-negative zero
    return float(np.sqrt(value)) if distance else float(value)


def weight_histogram(matrix, bins=DEFAULT_BINS, value_range=DEFAULT_RANGE) -> np.ndarray:
    """Occurrence counts of matrix entries over equal-width bins.

    Bins are left-closed/right-open with the final bin right-closed;
    values outside the range are clamped into the end bins, so the
    counts always sum to the number of entries.
    """
    arr = np.asarray(matrix, dtype=float)
    lo, hi = (float(value_range[0]), float(value_range[1]))
    if int(bins) < 1:
        raise ValueError(f"bins must be >= 1, got {bins!r}")
    if not lo < hi:
        raise ValueError(f"degenerate range {value_range!r}")
    clipped = np.clip(arr.ravel(), lo, hi)
    counts, _ = np.histogram(clipped, bins=int(bins), range=(lo, hi))
    return counts.astype(np.int64)


def histogram_bin_edges(bins=DEFAULT_BINS, value_range=DEFAULT_RANGE) -> np.ndarray:
    return np.linspace(float(value_range[0]), float(value_range[1]), int(bins) + 1)


def histogram_divergence(counts_a, counts_b, log_base=2.0) -> float:
    """JSD between two count vectors on the same bin grid."""
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"histograms use different grids: {a.shape} vs {b.shape}")
    if a.sum() <= 0.0 or b.sum() <= 0.0:
        raise ValueError("cannot normalise an all-zero histogram")
    return jsd(a / a.sum(), b / b.sum(), log_base)


def spectrum2d(matrix) -> np.ndarray:
    """Magnitudes of the 2D DFT with the zero-frequency cell centred."""
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("spectrum2d expects a non-empty 2-d matrix")
    return np.abs(np.fft.fftshift(np.fft.fft2(arr)))


class WeightHistory:
    """Per-iteration histogram counts of one weight matrix on a fixed grid."""

    def __init__(self, bins=DEFAULT_BINS, value_range=DEFAULT_RANGE):
        self.bin_edges = histogram_bin_edges(bins, value_range)
        self._bins = int(bins)
        self._range = (float(value_range[0]), float(value_range[1]))
        self._stamps: list[int] = []
        self._counts: list[np.ndarray] = []

    def record(self, iteration: int, matrix) -> None:
        self._stamps.append(int(iteration))
        self._counts.append(weight_histogram(matrix, self._bins, self._range))

    @property
    def iteration_stamps(self) -> np.ndarray:
        return np.asarray(self._stamps, dtype=np.int64)

    @property
    def counts(self) -> np.ndarray:
        if not self._counts:
            return np.zeros((0, self._bins), dtype=np.int64)
        return np.vstack(self._counts)

    def __len__(self) -> int:
        return len(self._stamps)


def write_weight_history_csv(history: WeightHistory, path) -> None:
    """One row per recorded iteration; columns are named by bin left edge."""
    edges = history.bin_edges
    header = ["iteration"] + [f"bin@{left:.17g}" for left in edges[:-1]]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for stamp, row in zip(history.iteration_stamps, history.counts):
            writer.writerow([int(stamp)] + [int(c) for c in row])


def read_weight_history_csv(path) -> WeightHistory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        lefts = np.array([float(name.split("@", 1)[1]) for name in header[1:]])
        rows = [(int(r[0]), np.array([int(c) for c in r[1:]], dtype=np.int64)) for r in reader]
    bins = len(lefts)
    hi = 2.0 * lefts[-1] - lefts[-2] if bins > 1 else lefts[-1] + 1.0
    history = WeightHistory(bins=bins, value_range=(lefts[0], hi))
    for stamp, counts in rows:
        history._stamps.append(stamp)
        history._counts.append(counts)
    return history


def write_matrix_csv(matrix, path) -> None:
    arr = np.asarray(matrix)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.atleast_2d(arr):
            writer.writerow([f"{v:.17g}" for v in row])


def write_pgm(matrix, path, maxval=65535) -> float:
    """Write a matrix as a binary 16-bit PGM, max-normalised.

    Returns the normalisation scale (the matrix value mapped to
    ``maxval``) so callers can record it in a manifest.
    """
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("a PGM image must be a non-empty 2-d matrix")
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("PGM export expects finite non-negative values")
    scale = float(arr.max())
    if scale > 0.0:
        scaled = np.round(arr / scale * maxval).astype(">u2")
    else:
        scaled = np.zeros(arr.shape, dtype=">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii"))
        fh.write(scaled.tobytes())
    return scale

"""Synthetic source/target data, corruption operators, CSV I/O and stream order.

Stream shuffling uses SplitMix64 so that orderings can be reproduced in any
language from the seed alone::

    state  = (state + 0x9E3779B97F4A7C15) mod 2**64
    z      = state
    z      = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z      = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output = z ^ (z >> 31)

Bounded draws in ``[0, n)`` reject outputs ``>= 2**64 - (2**64 mod n)`` and
return ``output mod n``. The shuffle is the descending Fisher-Yates variant:
for ``i = n-1 .. 1`` swap ``a[i]`` with ``a[below(i + 1)]``.

Blob and corruption sampling use numpy's PCG64 (``np.random.default_rng``)
seeded with ``[seed, tag]``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

CORRUPTIONS = ("gaussian_noise", "feature_scale", "feature_dropout")

_MASK64 = (1 << 64) - 1


class DataFormatError(ValueError):
    """Malformed CSV input; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


def permutation(n: int, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return np.array(order, dtype=int)


@dataclass(frozen=True)
class SyntheticShift:
    n_classes: int = 3
    d_in: int = 2
    n_source: int = 600
    n_target: int = 2000
    blob_separation: float = 3.0
    corruption: str = "gaussian_noise"
    severity: int = 5
    seed: int = 7

    def __post_init__(self):
        if self.n_classes < 2 or self.d_in < 1:
            raise ValueError("need at least 2 classes and 1 input dim")
        if self.n_source <= 0 or self.n_target <= 0:
            raise ValueError("sample counts must be positive")
        if not self.blob_separation >= 0:
            raise ValueError("blob_separation must be non-negative")
        if self.corruption not in CORRUPTIONS:
            raise ValueError(f"unknown corruption {self.corruption!r}")
        if not 1 <= self.severity <= 5:
            raise ValueError("severity must lie in [1, 5]")


@dataclass
class Stream:
    x: np.ndarray
    y: np.ndarray | None
    order: np.ndarray
    seed: int

    def __len__(self):
        return len(self.x)


def blob_means(n_classes: int, d_in: int, radius: float) -> np.ndarray:
    """Class means spaced evenly on a circle in the first two input dims."""
    angles = 2 * np.pi * np.arange(n_classes) / n_classes
    means = np.zeros((n_classes, d_in))
    means[:, 0] = radius * np.cos(angles)
    if d_in > 1:
        means[:, 1] = radius * np.sin(angles)
    return means


def _balanced_labels(n: int, k: int, rng) -> np.ndarray:
    return rng.permutation(np.arange(n) % k)


def sample_blobs(n: int, shift: SyntheticShift, tag: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([shift.seed, tag])
    y = _balanced_labels(n, shift.n_classes, rng)
    means = blob_means(shift.n_classes, shift.d_in, shift.blob_separation)
    x = means[y] + rng.normal(size=(n, shift.d_in))
    return x, y


def make_blobs(shift: SyntheticShift):
    """Source set and clean target set, both unit-variance Gaussian blobs.

    Returns ``((x_src, y_src), (x_tgt, y_tgt))``.
    """
    return sample_blobs(shift.n_source, shift, 1), sample_blobs(shift.n_target, shift, 2)


def _apply(x, corruption: str, level: float, seed: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng([seed, 303])
    if corruption == "gaussian_noise":
        if level == 0:
            return x.copy()
        return x + rng.normal(0.0, 0.4 * level, size=x.shape)
    if corruption == "feature_scale":
        d = x.shape[1]
        dims = rng.permutation(d)[: max(1, d // 2)]
        out = x.copy()
        out[:, dims] *= 1.0 + 0.3 * level
        return out
    if corruption == "feature_dropout":
        # each entry dropped independently with probability 0.1 * level
        keep = rng.random(x.shape) >= 0.1 * level
        return x * keep
    raise ValueError(f"unknown corruption {corruption!r}")


def corrupt(x, corruption: str, severity: int, seed: int) -> np.ndarray:
    """Apply a named corruption at severity 1-5. Labels are not touched."""
    if corruption not in CORRUPTIONS:
        raise ValueError(f"unknown corruption {corruption!r}")
    if not (isinstance(severity, (int, np.integer)) and 1 <= severity <= 5):
        raise ValueError("severity must be an integer in [1, 5]")
    return _apply(x, corruption, severity, seed)


def make_shift(shift: SyntheticShift, n_heldout: int = 0):
    """Source data plus the corrupted target (and optional held-out target) sets."""
    (xs, ys), (xt, yt) = make_blobs(shift)
    xt = corrupt(xt, shift.corruption, shift.severity, shift.seed)
    out = {"source": (xs, ys), "target": (xt, yt)}
    if n_heldout:
        xh, yh = sample_blobs(n_heldout, shift, 3)
        out["heldout"] = (corrupt(xh, shift.corruption, shift.severity, shift.seed + 1), yh)
    return out


def shuffle_stream(x, y=None, seed: int = 0) -> Stream:
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise ValueError("cannot shuffle an empty stream")
    order = permutation(len(x), seed)
    return Stream(x[order], None if y is None else np.asarray(y)[order], order, seed)


def save_csv(path, x, y) -> None:
    x = np.asarray(x, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(x.shape[1])] + ["label"])
        for row, label in zip(x, y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``x0, x1, ..., label`` rows. Raises ``DataFormatError`` with a line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", 1) from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise DataFormatError("header has no 'label' column", 1)
        li = header.index("label")
        width = len(header)
        xs, ys = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise DataFormatError(f"expected {width} fields, got {len(row)}", line)
            try:
                vals = [float(c) for i, c in enumerate(row) if i != li]
                label = int(row[li])
            except ValueError as exc:
                raise DataFormatError(str(exc), line) from None
            if not all(math.isfinite(v) for v in vals):
                raise DataFormatError("non-finite value", line)
            if label < 0:
                raise DataFormatError("negative label", line)
            xs.append(vals)
            ys.append(label)
    if not xs:
        raise DataFormatError("no data rows")
    return np.array(xs, dtype=float), np.array(ys, dtype=int)


def checksum(arr) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def dataset_manifest(shift: SyntheticShift, arrays: dict) -> str:
    """JSON manifest: config, seed and sha256 of every generated array."""
    sums = {}
    for name, (x, y) in arrays.items():
        sums[name] = {"n": int(len(x)), "x_sha256": checksum(np.asarray(x, dtype=float)),
                      "y_sha256": checksum(np.asarray(y, dtype=np.int64))}
    return json.dumps({"config": asdict(shift), "seed": shift.seed, "checksums": sums},
                      indent=2, sort_keys=True)

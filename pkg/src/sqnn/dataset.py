"""MNIST ingestion: IDX parsing, class filtering, downscaling, label mapping.

Images come out as float grids in [0, 1]; the two kept digits map to the
labels -1 and +1 (3 -> -1, 6 -> +1 by default, fixed project-wide). Files
may be raw IDX or gzip-compressed (a ".gz" suffix is handled transparently).
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoding import AngleEncodingConfig
from .errors import FormatError, ShapeError
from .orchestrator import PartitionPlan

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


@dataclass(frozen=True)
class ImageSet:
    """Filtered, rescaled images with +/-1 labels."""

    images: np.ndarray  # (N, h, w) float64 in [0, 1]
    labels: np.ndarray  # (N,) float64 in {-1.0, +1.0}
    source_digits: tuple[int, int] = (3, 6)

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise ShapeError(f"{self.images.shape[0]} images vs {self.labels.shape[0]} labels")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    def subset(self, limit: int | None) -> "ImageSet":
        if limit is None or limit >= len(self):
            return self
        return ImageSet(self.images[:limit], self.labels[:limit], self.source_digits)


def _read_file(path: str | Path) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as f:
            return f.read()
    return path.read_bytes()


def _read_header(raw: bytes, path: Path, expected_magic: int, n_dims: int) -> tuple[tuple[int, ...], int]:
    header_len = 4 * (1 + n_dims)
    if len(raw) < header_len:
        raise FormatError(f"{path.name}: truncated header", offset=len(raw))
    magic = struct.unpack(">I", raw[:4])[0]
    if magic != expected_magic:
        raise FormatError(f"{path.name}: bad magic 0x{magic:08x}, expected 0x{expected_magic:08x}", offset=0)
    dims = struct.unpack(f">{n_dims}I", raw[4:header_len])
    return dims, header_len


def load_idx(images_path: str | Path, labels_path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Raw uint8 images (N, rows, cols) and digit labels (N,) from IDX files."""
    raw = _read_file(images_path)
    (count, rows, cols), offset = _read_header(raw, Path(images_path), IMAGE_MAGIC, 3)
    expected = offset + count * rows * cols
    if len(raw) < expected:
        raise FormatError(f"{Path(images_path).name}: truncated image data, need {expected} bytes", offset=len(raw))
    images = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=offset)
    images = images.reshape(count, rows, cols)

    raw = _read_file(labels_path)
    (label_count,), offset = _read_header(raw, Path(labels_path), LABEL_MAGIC, 1)
    if len(raw) < offset + label_count:
        raise FormatError(f"{Path(labels_path).name}: truncated label data", offset=len(raw))
    labels = np.frombuffer(raw, dtype=np.uint8, count=label_count, offset=offset)

    if label_count != count:
        raise FormatError(f"{count} images but {label_count} labels", offset=offset)
    return images, labels


def filter_and_relabel(
    images: np.ndarray,
    labels: np.ndarray,
    keep: tuple[int, int] = (3, 6),
) -> ImageSet:
    """Keep two digits, map the first to -1 and the second to +1, scale bytes by 1/255."""
    mask = (labels == keep[0]) | (labels == keep[1])
    kept_images = images[mask].astype(np.float64) / 255.0
    kept_labels = np.where(labels[mask] == keep[0], -1.0, 1.0)
    return ImageSet(kept_images, kept_labels, source_digits=tuple(keep))


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) row-stochastic matrix of fractional pixel coverage.

    Output cell i averages input pixels over the interval
    [i*n_in/n_out, (i+1)*n_in/n_out), with partial pixels weighted by overlap.
    Equals plain block averaging when n_out divides n_in.
    """
    weights = np.zeros((n_out, n_in))
    step = n_in / n_out
    for i in range(n_out):
        lo, hi = i * step, (i + 1) * step
        for k in range(int(np.floor(lo)), int(np.ceil(hi))):
            weights[i, k] = min(hi, k + 1) - max(lo, k)
    return weights / step


def downscale(image: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Area-weighted resize of one (H, W) grid to target (h, w), range-preserving."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    h, w = int(target[0]), int(target[1])
    if not (1 <= h <= image.shape[0] and 1 <= w <= image.shape[1]):
        raise ShapeError(f"target {target} invalid for image of shape {image.shape}")
    return _area_weights(image.shape[0], h) @ image @ _area_weights(image.shape[1], w).T


def downscale_set(data: ImageSet, target: tuple[int, int]) -> ImageSet:
    h, w = int(target[0]), int(target[1])
    wr = _area_weights(data.images.shape[1], h)
    wc = _area_weights(data.images.shape[2], w)
    images = np.einsum("ij,njk,lk->nil", wr, data.images, wc)
    return ImageSet(images, data.labels, data.source_digits)


def to_partitioned_angles(
    data: ImageSet,
    plan: PartitionPlan,
    config: AngleEncodingConfig = AngleEncodingConfig(),
) -> list[np.ndarray]:
    """Per-segment angle arrays, each (N, segment_length), row-major pixels."""
    n, h, w = data.images.shape
    if (h, w) != plan.image_shape:
        raise ShapeError(f"images are {h}x{w} but the plan expects {plan.image_shape}")
    flat = data.images.reshape(n, h * w)
    return [config.scale * flat[:, list(seg)] for seg in plan.segments]


def resolve_data_dir(explicit: str | None = None) -> Path:
    """Dataset directory: explicit argument, else $SQNN_DATA_DIR, else ./data."""
    import os

    if explicit:
        return Path(explicit)
    env = os.environ.get("SQNN_DATA_DIR")
    return Path(env) if env else Path("data")


def _find_idx_file(data_dir: Path, stem: str) -> Path:
    for candidate in (data_dir / f"{stem}.gz", data_dir / stem):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"missing {stem}[.gz] under {data_dir}")


def load_split(data_dir: str | Path, split: str, keep: tuple[int, int] = (3, 6)) -> ImageSet:
    """Load and filter one MNIST split ("train" or "test") from a directory."""
    data_dir = Path(data_dir)
    stems = {"train": (TRAIN_IMAGES, TRAIN_LABELS), "test": (TEST_IMAGES, TEST_LABELS)}
    if split not in stems:
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    images_path = _find_idx_file(data_dir, stems[split][0])
    labels_path = _find_idx_file(data_dir, stems[split][1])
    return filter_and_relabel(*load_idx(images_path, labels_path), keep=keep)

"""Datasets, union-of-subspaces sampling, IDX image files, dictionaries.

Points live in the unit ball of R^n and are stored as columns. Class
labels are integers in {1..K}. Image files use the IDX binary layout
(big-endian magic + dimensions, then raw uint8 payload); images are
resized to 32x32 by bilinear interpolation, flattened, and scaled to
unit l2 norm before entering a dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ModelError, ParseError
from .numerics import make_rng

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
IMAGE_SIDE = 32


@dataclass
class LabeledDataset:
    """Point cloud with class labels.

    ``points`` is n x N with one point per column; ``labels`` has length
    N with entries in {1..K}.
    """

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.ndim != 2:
            raise ModelError(f"points must be 2-d (n x N), got shape {self.points.shape}")
        if self.labels.shape != (self.points.shape[1],):
            raise ModelError(
                f"labels length {self.labels.shape} does not match point count "
                f"{self.points.shape[1]}"
            )
        if self.count and self.labels.min() < 1:
            raise ModelError("class labels must be >= 1")

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    @property
    def count(self) -> int:
        return self.points.shape[1]

    def class_ids(self) -> list[int]:
        return [int(k) for k in np.unique(self.labels)]

    def point(self, i: int) -> np.ndarray:
        return self.points[:, i]

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.points[:, idx], self.labels[idx])


@dataclass
class SubspaceModel:
    """Union of K linear subspaces given by orthonormal bases.

    ``bases[k]`` is n x d_k with orthonormal columns; ``gamma`` bounds
    the distance of sampled points from their assigned subspace.
    """

    bases: list
    gamma: float

    def __post_init__(self):
        self.bases = [np.asarray(U, dtype=np.float64) for U in self.bases]
        if not self.bases:
            raise ModelError("at least one subspace basis is required")
        n = self.bases[0].shape[0]
        for k, U in enumerate(self.bases):
            if U.ndim != 2 or U.shape[0] != n:
                raise ModelError(f"basis {k} has shape {U.shape}, expected ({n}, d)")
            if U.shape[1] >= n:
                raise ModelError(
                    f"basis {k} has dimension {U.shape[1]} >= ambient {n}"
                )
            if np.linalg.norm(U.T @ U - np.eye(U.shape[1])) > 1e-10:
                raise ModelError(f"basis {k} is not orthonormal")
        if self.gamma < 0:
            raise ModelError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]

    @property
    def num_classes(self) -> int:
        return len(self.bases)

    def residual_norm(self, x: np.ndarray, k: int) -> float:
        """Distance from x to subspace k (1-based class id)."""
        U = self.bases[k - 1]
        return float(np.linalg.norm(x - U @ (U.T @ x)))


@dataclass
class Dictionary:
    """Matrix of unit-norm atoms with one class label per column.

    The signed atom list [S, -S] is kept conceptual: use
    :meth:`signed_column` (index in 0..2M-1, where column i+M is the
    negation of column i) or :meth:`signed_view` at small scale.
    """

    S: np.ndarray
    labels: np.ndarray
    _gram: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        S = np.asarray(self.S, dtype=np.float64)
        if S.ndim != 2:
            raise ModelError(f"S must be 2-d (n x M), got shape {S.shape}")
        norms = np.linalg.norm(S, axis=0)
        if np.any(norms < 1e-12):
            raise ModelError("dictionary contains a zero column; cannot normalize")
        self.S = S / norms
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (S.shape[1],):
            raise ModelError(
                f"labels length {self.labels.shape} does not match column count {S.shape[1]}"
            )
        if self.labels.min() < 1:
            raise ModelError("class labels must be >= 1")

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    @property
    def size(self) -> int:
        return self.S.shape[1]

    def signed_column(self, i: int) -> np.ndarray:
        M = self.size
        if not 0 <= i < 2 * M:
            raise ArgumentError(f"signed index must lie in [0, {2*M}), got {i}")
        return self.S[:, i] if i < M else -self.S[:, i - M]

    def signed_view(self) -> np.ndarray:
        """Materialized [S, -S]; intended for small instances only."""
        return np.hstack([self.S, -self.S])

    def gram(self) -> np.ndarray:
        """Cached S^T S."""
        if self._gram is None:
            self._gram = self.S.T @ self.S
        return self._gram


def _random_orthonormal(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    G = rng.standard_normal((n, d))
    Q, R = np.linalg.qr(G)
    # Fix signs so the factorization (hence the basis) is unique.
    return Q * np.sign(np.diag(R))


def generate_uos(
    n: int, K: int, d: int, per_class: int, gamma: float, seed
) -> tuple[LabeledDataset, SubspaceModel]:
    """Sample a labeled dataset near a union of K random d-dim subspaces.

    Each point is drawn as x = u + w with u uniform on the unit sphere
    of a random d-dimensional subspace and ||w|| <= gamma uniform in the
    gamma-ball, then rescaled onto the unit ball when ||x|| > 1 (which
    preserves distance-to-subspace <= gamma). With gamma = 0 points lie
    exactly on their subspace.
    """
    if not 1 <= d < n:
        raise ModelError(f"need 1 <= d < n, got d={d}, n={n}")
    if K < 1 or per_class < 1:
        raise ModelError(f"need K >= 1 and per_class >= 1, got K={K}, per_class={per_class}")
    if gamma < 0:
        raise ModelError(f"gamma must be >= 0, got {gamma}")
    rng = make_rng(seed)
    bases = [_random_orthonormal(rng, n, d) for _ in range(K)]
    N = K * per_class
    points = np.empty((n, N))
    labels = np.empty(N, dtype=np.int64)
    col = 0
    for k in range(K):
        U = bases[k]
        for _ in range(per_class):
            z = rng.standard_normal(d)
            nz = np.linalg.norm(z)
            while nz < 1e-12:
                z = rng.standard_normal(d)
                nz = np.linalg.norm(z)
            x = U @ (z / nz)
            if gamma > 0:
                w = rng.standard_normal(n)
                w *= gamma * rng.uniform() ** (1.0 / n) / np.linalg.norm(w)
                x = x + w
            s = np.linalg.norm(x)
            if s > 1.0:
                x = x / s
            points[:, col] = x
            labels[col] = k + 1
            col += 1
    return LabeledDataset(points, labels), SubspaceModel(bases, gamma)


def _read_exact(f, nbytes: int, offset: int, what: str) -> bytes:
    buf = f.read(nbytes)
    if len(buf) != nbytes:
        raise ParseError(
            f"truncated IDX file while reading {what}: wanted {nbytes} bytes, "
            f"got {len(buf)}",
            byte_offset=offset + len(buf),
        )
    return buf


def _read_u32(f, offset: int, what: str) -> int:
    return int.from_bytes(_read_exact(f, 4, offset, what), byteorder="big")


def read_idx_images_raw(path) -> np.ndarray:
    """Raw (count, rows, cols) uint8 array from an IDX image file."""
    with open(path, "rb") as f:
        magic = _read_u32(f, 0, "image magic")
        if magic != IDX_IMAGES_MAGIC:
            raise ParseError(
                f"bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}",
                byte_offset=0,
            )
        count = _read_u32(f, 4, "image count")
        rows = _read_u32(f, 8, "row count")
        cols = _read_u32(f, 12, "column count")
        payload = _read_exact(f, count * rows * cols, 16, "pixel data")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels_raw(path) -> np.ndarray:
    """Raw length-count uint8 array from an IDX label file."""
    with open(path, "rb") as f:
        magic = _read_u32(f, 0, "label magic")
        if magic != IDX_LABELS_MAGIC:
            raise ParseError(
                f"bad label magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}",
                byte_offset=0,
            )
        count = _read_u32(f, 4, "label count")
        payload = _read_exact(f, count, 8, "label data")
    return np.frombuffer(payload, dtype=np.uint8)


def write_idx_images(path, images: np.ndarray) -> None:
    """Write a (count, rows, cols) uint8 array in IDX image layout."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ArgumentError(f"images must be (count, rows, cols), got {images.shape}")
    with open(path, "wb") as f:
        f.write(IDX_IMAGES_MAGIC.to_bytes(4, "big"))
        for dim in images.shape:
            f.write(int(dim).to_bytes(4, "big"))
        f.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    """Write a length-count uint8 array in IDX label layout."""
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ArgumentError(f"labels must be 1-d, got shape {labels.shape}")
    with open(path, "wb") as f:
        f.write(IDX_LABELS_MAGIC.to_bytes(4, "big"))
        f.write(len(labels).to_bytes(4, "big"))
        f.write(labels.tobytes())


def resize_bilinear(image: np.ndarray, side: int = IMAGE_SIDE) -> np.ndarray:
    """Resize a 2-d image to side x side by bilinear interpolation.

    Uses the pixel-center convention (source coordinate of output pixel
    i is (i + 0.5) * in/out - 0.5, clamped), so resizing to the input
    size is the identity.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ArgumentError(f"image must be 2-d, got shape {image.shape}")

    def axis_coords(in_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(side) + 0.5) * in_size / side - 0.5
        src = np.clip(src, 0.0, in_size - 1.0)
        lo = np.floor(src).astype(np.int64)
        hi = np.minimum(lo + 1, in_size - 1)
        return lo, hi, src - lo

    r_lo, r_hi, r_t = axis_coords(image.shape[0])
    c_lo, c_hi, c_t = axis_coords(image.shape[1])
    top = image[np.ix_(r_lo, c_lo)] * (1 - c_t) + image[np.ix_(r_lo, c_hi)] * c_t
    bot = image[np.ix_(r_hi, c_lo)] * (1 - c_t) + image[np.ix_(r_hi, c_hi)] * c_t
    return top * (1 - r_t[:, None]) + bot * r_t[:, None]


def load_idx_images(images_path, labels_path, side: int = IMAGE_SIDE) -> LabeledDataset:
    """Load an IDX image/label file pair as a normalized dataset.

    Images are resized to ``side`` x ``side`` (bilinear), flattened in
    row-major order, and scaled to unit l2 norm. Raw labels (0-based in
    the file format) become class ids raw + 1.
    """
    images = read_idx_images_raw(images_path)
    labels = read_idx_labels_raw(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise ModelError(
            f"image count {images.shape[0]} does not match label count {labels.shape[0]}"
        )
    n = side * side
    points = np.empty((n, images.shape[0]))
    for i in range(images.shape[0]):
        flat = resize_bilinear(images[i], side).reshape(n)
        nrm = np.linalg.norm(flat)
        if nrm < 1e-12:
            raise ModelError(f"image {i} is identically zero; cannot normalize")
        points[:, i] = flat / nrm
    return LabeledDataset(points, labels.astype(np.int64) + 1)


def build_dictionary(
    dataset: LabeledDataset, m: int, seed, balanced: bool = False
) -> Dictionary:
    """Sample m dataset points (without replacement) as dictionary atoms.

    Default sampling is uniform over the dataset; ``balanced=True``
    draws near-equal per-class quotas (remainder assigned to the lowest
    class ids). Columns are normalized to unit l2 norm. With m equal to
    the dataset size every point is used, in an order permuted
    deterministically by the seed.
    """
    N = dataset.count
    if not 1 <= m <= N:
        raise ArgumentError(f"dictionary size must lie in [1, {N}], got {m}")
    rng = make_rng(seed)
    if balanced:
        classes = dataset.class_ids()
        base, extra = divmod(m, len(classes))
        chosen = []
        for j, k in enumerate(classes):
            quota = base + (1 if j < extra else 0)
            pool = np.flatnonzero(dataset.labels == k)
            if quota > pool.size:
                raise ModelError(
                    f"class {k} has {pool.size} points, cannot fill quota {quota}"
                )
            chosen.append(rng.permutation(pool)[:quota])
        indices = np.concatenate(chosen)
    else:
        indices = rng.permutation(N)[:m]
    return Dictionary(dataset.points[:, indices].copy(), dataset.labels[indices].copy())

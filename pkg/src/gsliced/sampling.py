"""Random streams, sphere directions, Gaussian noise and dataset ingestion.

Every random quantity is drawn from an :class:`RngStream`, a pure function of
a 64-bit master seed and a path of 64-bit labels. A stream is realized as a
Philox counter-based generator keyed through ``numpy.random.SeedSequence``
with the path as its spawn key, so two streams with different paths never
share state and a stream's draws do not depend on what else was consumed.
Normal variates always come from ``Generator.standard_normal`` (numpy's
ziggurat), fixed here so results are bit-reproducible for a given numpy.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DatasetError",
    "RngStream",
    "SampleSet",
    "derive_key",
    "gaussian_noise",
    "gen_gaussian",
    "load_csv",
    "sample_sphere",
]

_U64 = (1 << 64) - 1

# stream path labels
DIRECTIONS = 0x44495245  # "DIRE"
REDRAW = 0x52454452  # "REDR"
NOISE = 0x4E4F4953  # "NOIS"
DATA = 0x44415441  # "DATA"


def derive_key(*parts: int | str) -> int:
    """Stable 64-bit key from integers and strings (blake2b)."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def _check_label(value: int) -> int:
    value = int(value)
    if not 0 <= value <= _U64:
        raise ValueError(f"stream labels must fit in 64 bits, got {value}")
    return value


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_path: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "master_seed", _check_label(self.master_seed))
        object.__setattr__(self, "stream_path", tuple(_check_label(v) for v in self.stream_path))

    def child(self, *labels: int) -> RngStream:
        return RngStream(self.master_seed, self.stream_path + tuple(labels))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_path)
        return np.random.Generator(np.random.Philox(seq))

    def key64(self) -> int:
        """A 64-bit identifier of this stream, e.g. to use as a noise key."""
        return derive_key(self.master_seed, *self.stream_path)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """n points in R^d with implicit uniform weights.

    ``noise_key`` selects the noise stream used when the set is smoothed, so
    the same set always receives the same noise regardless of which argument
    position it occupies.
    """

    points: np.ndarray
    noise_key: int = field(default=0)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be an n x d matrix with n, d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain NaN or infinite entries")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "noise_key", _check_label(self.noise_key))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __repr__(self):
        return f"SampleSet(n={self.n}, d={self.d}, noise_key={self.noise_key:#x})"


def sample_sphere(stream: RngStream, d: int, L: int) -> np.ndarray:
    """L directions uniform on the unit sphere in R^d, as an (L, d) array.

    Rows are normalized standard normal vectors. Draws are laid out row by row,
    so the first k directions do not depend on L.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if L < 1:
        raise ValueError(f"number of directions must be >= 1, got {L}")
    z = stream.generator().standard_normal((L, d))
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    for row in np.flatnonzero(norms == 0.0):
        attempt = 0
        while norms[row] == 0.0:
            z[row] = stream.child(REDRAW, int(row), attempt).generator().standard_normal(d)
            norms[row] = math.sqrt(float(z[row] @ z[row]))
            attempt += 1
    return z / norms[:, None]


def gaussian_noise(stream: RngStream, count: int, sigma: float) -> np.ndarray:
    """count iid N(0, sigma^2) draws; sigma = 0 scales the same draws to zero."""
    if sigma < 0:
        raise ValueError(f"noise level must be non-negative, got {sigma}")
    z = stream.generator().standard_normal(count)
    if sigma == 0:
        return np.zeros(count)
    return sigma * z


def gen_gaussian(stream: RngStream, n: int, d: int, mean, scale, noise_key: int | None = None) -> SampleSet:
    """n samples from N(mean, diag(scale^2)); mean and scale broadcast to length d."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    mean = np.broadcast_to(np.asarray(mean, dtype=np.float64), (d,))
    scale = np.broadcast_to(np.asarray(scale, dtype=np.float64), (d,))
    if np.any(scale <= 0):
        raise ValueError("scale entries must be positive")
    z = stream.generator().standard_normal((n, d))
    key = stream.key64() if noise_key is None else noise_key
    return SampleSet(mean + scale * z, noise_key=key)


class DatasetError(ValueError):
    pass


def _parse_float(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path: str | os.PathLike, noise_key: int | None = None) -> SampleSet:
    """Read a comma-separated numeric matrix, one sample per row.

    A first row with any non-numeric cell is taken as a header and skipped.
    Blank lines are ignored. The default noise key is derived from the
    resolved path, so two different files never share noise unless asked to.
    """
    path = os.fspath(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(cell.strip() for cell in row)]
    if rows and any(_parse_float(c) is None for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise DatasetError(f"{path}: empty dataset")
    width = len(rows[0][1])
    data = np.empty((len(rows), width))
    for r, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise DatasetError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        for c, cell in enumerate(row):
            value = _parse_float(cell)
            if value is None:
                raise DatasetError(f"{path}: non-numeric cell {cell!r} at row {lineno}, column {c + 1}")
            data[r, c] = value
    if noise_key is None:
        noise_key = derive_key("csv", os.path.realpath(path))
    return SampleSet(data, noise_key=noise_key)

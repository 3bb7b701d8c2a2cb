"""Dataset loading, CSV round-tripping and seeded synthetic generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DatasetError, EmptyDatasetError, ParameterError
from .geometry import Point, to_points


@dataclass(frozen=True)
class Dataset:
    coords: np.ndarray  # (n, 3) float64; ids are row indices
    declared_dims: int
    source: str

    def __post_init__(self):
        if self.declared_dims not in (2, 3):
            raise ParameterError(f"dims must be 2 or 3, got {self.declared_dims}")
        if self.coords.ndim != 2 or self.coords.shape[1] != 3:
            raise DatasetError(f"coords must be (n, 3), got {self.coords.shape}")
        if len(self.coords) == 0:
            raise EmptyDatasetError(f"{self.source}: no points")
        if self.declared_dims == 2 and np.any(self.coords[:, 2] != 0.0):
            raise DatasetError("2D dataset with non-zero z")

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def points(self) -> list[Point]:
        return to_points(self.coords)


def load_csv(path: Union[str, Path], dims: int = 2, columns: Optional[Sequence[int]] = None,
             has_header: bool = False, limit: Optional[int] = None) -> Dataset:
    """Read the first ``limit`` rows (or all) of a comma-separated file.

    ``columns`` picks which fields hold the coordinates (default: the first
    ``dims``). Blank lines are skipped; any other row that fails to parse
    raises :class:`DatasetError` naming its line number.
    """
    if dims not in (2, 3):
        raise ParameterError(f"dims must be 2 or 3, got {dims}")
    cols = list(range(dims)) if columns is None else [int(c) for c in columns]
    if len(cols) != dims or any(c < 0 for c in cols):
        raise ParameterError(f"need {dims} non-negative column indices, got {cols}")
    if limit is not None and limit < 1:
        raise ParameterError(f"limit must be >= 1, got {limit}")
    rows: list[list[float]] = []
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise DatasetError(f"cannot read {path}: {e}") from e
    with fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not rec or all(not f.strip() for f in rec):
                continue
            if limit is not None and len(rows) >= limit:
                break
            try:
                rows.append([float(rec[c]) for c in cols])
            except (ValueError, IndexError) as e:
                raise DatasetError(f"{path}: row {lineno}: cannot parse {rec!r} ({e})") from None
            if not all(math.isfinite(v) for v in rows[-1]):
                raise DatasetError(f"{path}: row {lineno}: non-finite coordinate")
    if not rows:
        raise EmptyDatasetError(f"{path}: no valid rows")
    arr = np.array(rows, dtype=np.float64)
    if dims == 2:
        arr = np.column_stack([arr, np.zeros(len(arr))])
    return Dataset(np.ascontiguousarray(arr), dims, str(path))


def write_csv(dataset: Dataset, path: Union[str, Path], header: bool = False) -> None:
    """Write coordinates with ``repr`` floats so reloading is bit-exact."""
    cols = dataset.coords[:, : dataset.declared_dims].tolist()
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join("xyz"[: dataset.declared_dims]) + "\n")
        for row in cols:
            fh.write(",".join(repr(v) for v in row) + "\n")


@dataclass(frozen=True)
class BlobSpec:
    centers: tuple[tuple[float, ...], ...]
    count: int
    stddev: float


@dataclass(frozen=True)
class UniformSpec:
    n: int
    low: float = 0.0
    high: float = 1.0
    dims: int = 2


@dataclass(frozen=True)
class DenseSpec:
    """``n`` points uniform in a ball of radius ``scale`` (0 gives coincident points)."""

    n: int
    scale: float = 0.0
    dims: int = 2


@dataclass(frozen=True)
class CollinearSpec:
    n: int
    spacing: float = 1.0


GeneratorSpec = Union[BlobSpec, UniformSpec, DenseSpec, CollinearSpec]


def _embed(arr: np.ndarray) -> np.ndarray:
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.zeros(len(arr))])
    return np.ascontiguousarray(arr, dtype=np.float64)


def generate(spec: GeneratorSpec, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    if isinstance(spec, BlobSpec):
        centers = np.array(spec.centers, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[1] not in (2, 3) or spec.count < 1:
            raise ParameterError(f"bad blob spec {spec}")
        dims = centers.shape[1]
        pts = np.concatenate([c + rng.normal(0.0, spec.stddev, size=(spec.count, dims))
                              for c in centers])
    elif isinstance(spec, UniformSpec):
        if spec.n < 1 or spec.dims not in (2, 3):
            raise ParameterError(f"bad uniform spec {spec}")
        dims = spec.dims
        pts = rng.uniform(spec.low, spec.high, size=(spec.n, dims))
    elif isinstance(spec, DenseSpec):
        if spec.n < 1 or spec.dims not in (2, 3) or spec.scale < 0:
            raise ParameterError(f"bad dense spec {spec}")
        dims = spec.dims
        direction = rng.normal(size=(spec.n, dims))
        direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-300)
        radius = spec.scale * rng.uniform(size=(spec.n, 1)) ** (1.0 / dims)
        pts = direction * radius
    elif isinstance(spec, CollinearSpec):
        if spec.n < 1:
            raise ParameterError(f"bad collinear spec {spec}")
        dims = 2
        pts = np.column_stack([np.arange(spec.n) * spec.spacing, np.zeros(spec.n)])
    else:
        raise ParameterError(f"unknown generator spec {spec!r}")
    return Dataset(_embed(pts), dims, f"generate:{spec}:seed={seed}")


def parse_generator(text: str) -> GeneratorSpec:
    """Parse ``kind:key=value,...`` generator strings used by the command line.

    Examples: ``uniform:n=1000,dims=2``; ``dense:n=500,scale=0``;
    ``collinear:n=6,spacing=1``; ``blob:centers=0/0;10/10,count=50,stddev=0.1``.
    """
    kind, _, rest = text.partition(":")
    kv: dict[str, str] = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ParameterError(f"generator option {item!r} is not key=value")
        kv[key.strip()] = value.strip()
    try:
        if kind == "uniform":
            spec = UniformSpec(int(kv.pop("n")), float(kv.pop("low", 0.0)),
                               float(kv.pop("high", 1.0)), int(kv.pop("dims", 2)))
        elif kind == "dense":
            spec = DenseSpec(int(kv.pop("n")), float(kv.pop("scale", 0.0)), int(kv.pop("dims", 2)))
        elif kind == "collinear":
            spec = CollinearSpec(int(kv.pop("n")), float(kv.pop("spacing", 1.0)))
        elif kind == "blob":
            centers = tuple(tuple(float(v) for v in c.split("/"))
                            for c in kv.pop("centers").split(";"))
            spec = BlobSpec(centers, int(kv.pop("count")), float(kv.pop("stddev")))
        else:
            raise ParameterError(f"unknown generator kind {kind!r}")
    except KeyError as e:
        raise ParameterError(f"generator {kind!r} needs option {e.args[0]!r}") from None
    except ValueError as e:
        if isinstance(e, ParameterError):
            raise
        raise ParameterError(f"bad generator option in {text!r}: {e}") from None
    if kv:
        raise ParameterError(f"unknown generator options: {sorted(kv)}")
    return spec

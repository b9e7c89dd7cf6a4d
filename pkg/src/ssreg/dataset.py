"""Semi-supervised data container, sample splits, centering and CSV I/O."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, LoadError
from .rng import stream


def _frozen(a, ndim, name):
    # C order keeps BLAS reductions identical however the input was laid out
    a = np.array(a, dtype=float, order="C")
    if a.ndim != ndim:
        raise InputError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SemiSupervisedDataset:
    """Labeled rows ``(Z, W, Y)`` and unlabeled rows ``(Z, W)``.

    Arrays are copied and made read-only on construction. ``w_unlabeled``
    may have zero rows; ``w_names`` labels the control columns.
    """

    z_labeled: np.ndarray
    w_labeled: np.ndarray
    y_labeled: np.ndarray
    z_unlabeled: np.ndarray
    w_unlabeled: np.ndarray
    w_names: tuple = None

    def __post_init__(self):
        zl = _frozen(self.z_labeled, 1, "z_labeled")
        yl = _frozen(self.y_labeled, 1, "y_labeled")
        wl = np.asarray(self.w_labeled, dtype=float)
        if wl.ndim == 1 and wl.size == 0:
            wl = wl.reshape(zl.shape[0], 0)
        wl = _frozen(wl, 2, "w_labeled")
        zu = _frozen(np.asarray(self.z_unlabeled, dtype=float).reshape(-1), 1, "z_unlabeled")
        wu = np.asarray(self.w_unlabeled, dtype=float)
        if wu.size == 0:
            wu = wu.reshape(zu.shape[0], wl.shape[1])
        wu = _frozen(wu, 2, "w_unlabeled")
        n = zl.shape[0]
        if n < 2:
            raise InputError(f"need at least 2 labeled rows, got {n}")
        if wl.shape[0] != n or yl.shape[0] != n:
            raise InputError("labeled Z, W and Y must have the same number of rows")
        if wu.shape[0] != zu.shape[0]:
            raise InputError("unlabeled Z and W must have the same number of rows")
        if wu.shape[1] != wl.shape[1]:
            raise InputError(
                f"labeled W has {wl.shape[1]} columns but unlabeled W has {wu.shape[1]}")
        names = self.w_names
        if names is None:
            names = tuple(f"w{j + 1}" for j in range(wl.shape[1]))
        elif len(names) != wl.shape[1]:
            raise InputError("w_names length does not match the number of W columns")
        for attr, val in (("z_labeled", zl), ("w_labeled", wl), ("y_labeled", yl),
                          ("z_unlabeled", zu), ("w_unlabeled", wu), ("w_names", tuple(names))):
            object.__setattr__(self, attr, val)

    @property
    def n(self) -> int:
        return self.z_labeled.shape[0]

    @property
    def m(self) -> int:
        return self.z_unlabeled.shape[0]

    @property
    def d(self) -> int:
        return self.w_labeled.shape[1]

    @property
    def N(self) -> int:
        return self.n + self.m

    @property
    def x_labeled(self) -> np.ndarray:
        """Labeled design ``X = (Z, W)``."""
        return np.column_stack([self.z_labeled, self.w_labeled])

    @property
    def w_pooled(self) -> np.ndarray:
        """Controls for labeled rows followed by unlabeled rows."""
        return np.vstack([self.w_labeled, self.w_unlabeled])

    @property
    def z_pooled(self) -> np.ndarray:
        return np.concatenate([self.z_labeled, self.z_unlabeled])

    def supervised(self) -> "SemiSupervisedDataset":
        """The same labeled rows with the unlabeled block dropped."""
        return SemiSupervisedDataset(self.z_labeled, self.w_labeled, self.y_labeled,
                                     np.empty(0), np.empty((0, self.d)), self.w_names)

    def replace(self, **changes) -> "SemiSupervisedDataset":
        fields = dict(z_labeled=self.z_labeled, w_labeled=self.w_labeled, y_labeled=self.y_labeled,
                      z_unlabeled=self.z_unlabeled, w_unlabeled=self.w_unlabeled, w_names=self.w_names)
        fields.update(changes)
        return SemiSupervisedDataset(**fields)


SCHEMES = ("two_way", "three_way", "k_fold")


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint index sets over labeled rows (and unlabeled rows for k-fold).

    Part sizes differ by at most one, with the larger parts first.
    """

    scheme: str
    seed: int
    index_sets: tuple
    unlabeled_sets: tuple = field(default=())
    folds: int | None = None

    def __eq__(self, other):
        if not isinstance(other, SplitPlan):
            return NotImplemented
        return (self.scheme, self.seed, self.folds) == (other.scheme, other.seed, other.folds) and all(
            len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))
            for a, b in ((self.index_sets, other.index_sets), (self.unlabeled_sets, other.unlabeled_sets)))

    __hash__ = None


def _parts(n, k, gen):
    return tuple(np.sort(p) for p in np.array_split(gen.permutation(n), k))


def make_split(dataset_or_n, scheme: str, seed: int, folds: int | None = None, m: int | None = None) -> SplitPlan:
    """Random balanced partition of the labeled rows.

    ``scheme`` is ``"two_way"``, ``"three_way"`` or ``"k_fold"`` (the latter
    needs ``folds`` and also partitions the unlabeled rows). The plan depends
    only on ``(n, m, scheme, folds, seed)``. Accepts a dataset or a row count
    ``n`` (then pass ``m`` for k-fold).
    """
    if isinstance(dataset_or_n, SemiSupervisedDataset):
        n, m = dataset_or_n.n, dataset_or_n.m
    else:
        n, m = int(dataset_or_n), int(m or 0)
    if scheme == "two_way":
        k, need = 2, 2
    elif scheme == "three_way":
        k, need = 3, 3
    elif scheme == "k_fold":
        if folds is None or folds < 2:
            raise InputError("k_fold needs folds >= 2")
        k, need = int(folds), 2 * int(folds)
    else:
        raise InputError(f"unknown split scheme {scheme!r}; expected one of {SCHEMES}")
    if n < need:
        raise InputError(f"{scheme} split needs at least {need} labeled rows, got {n}")
    gen = stream(seed, f"split:{scheme}:{k}")
    labeled = _parts(n, k, gen)
    unlabeled = _parts(m, k, gen) if scheme == "k_fold" else ()
    return SplitPlan(scheme, int(seed), labeled, unlabeled, k if scheme == "k_fold" else None)


@dataclass(frozen=True)
class CenteringInfo:
    z_mean: float
    w_means: np.ndarray
    y_mean: float
    z_scale: float = 1.0
    w_scales: np.ndarray | None = None


def center(dataset: SemiSupervisedDataset, standardize: bool = False):
    """Subtract pooled Z/W means and the labeled Y mean.

    With ``standardize=True`` the Z and W columns are also divided by their
    pooled standard deviations (zero-variance columns are left unscaled).
    Returns ``(centered_dataset, CenteringInfo)``.
    """
    zp, wp = dataset.z_pooled, dataset.w_pooled
    z_mean = float(zp.mean())
    w_means = wp.mean(axis=0) if dataset.d else np.zeros(0)
    y_mean = float(dataset.y_labeled.mean())
    z_scale, w_scales = 1.0, np.ones(dataset.d)
    if standardize:
        z_scale = float(zp.std()) or 1.0
        w_scales = wp.std(axis=0)
        w_scales[w_scales == 0] = 1.0
    out = dataset.replace(
        z_labeled=(dataset.z_labeled - z_mean) / z_scale,
        w_labeled=(dataset.w_labeled - w_means) / w_scales,
        y_labeled=dataset.y_labeled - y_mean,
        z_unlabeled=(dataset.z_unlabeled - z_mean) / z_scale,
        w_unlabeled=(dataset.w_unlabeled - w_means) / w_scales,
    )
    return out, CenteringInfo(z_mean, w_means, y_mean, z_scale, w_scales if standardize else None)


def _read_table(path, required):
    path = Path(path)
    if not path.is_file():
        raise LoadError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LoadError(f"{path}: missing header row") from None
        if len(set(header)) != len(header):
            raise LoadError(f"{path}: duplicate column names in header")
        for col in required:
            if col not in header:
                raise LoadError(f"{path}: column {col!r} not found in header {header}")
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise LoadError(f"{path}, row {lineno}: expected {len(header)} cells, found {len(record)}")
            values = []
            for name, cell in zip(header, record):
                try:
                    v = float(cell)
                except ValueError:
                    raise LoadError(f"{path}, row {lineno}, column {name!r}: cannot parse {cell!r} as a number") from None
                if not math.isfinite(v):
                    raise LoadError(f"{path}, row {lineno}, column {name!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def load_csv(path_labeled, path_unlabeled, z_column: str, y_column: str) -> SemiSupervisedDataset:
    """Read labeled and unlabeled CSV files into a dataset.

    Every labeled column other than ``z_column`` and ``y_column`` becomes a
    control, in header order. The unlabeled file must carry ``z_column`` and
    the same control columns (its ``y_column``, if present, is ignored).
    ``path_unlabeled=None`` gives a dataset with no unlabeled rows.
    """
    header, data = _read_table(path_labeled, [z_column, y_column])
    w_names = [h for h in header if h not in (z_column, y_column)]
    col = {h: i for i, h in enumerate(header)}
    z = data[:, col[z_column]]
    y = data[:, col[y_column]]
    w = data[:, [col[h] for h in w_names]]
    if path_unlabeled is None:
        zu, wu = np.empty(0), np.empty((0, len(w_names)))
    else:
        uheader, udata = _read_table(path_unlabeled, [z_column])
        missing = [h for h in w_names if h not in uheader]
        if missing:
            raise LoadError(f"{path_unlabeled}: header mismatch, missing control column(s) {missing}")
        extra = [h for h in uheader if h not in w_names and h not in (z_column, y_column)]
        if extra:
            raise LoadError(f"{path_unlabeled}: header mismatch, unexpected column(s) {extra}")
        ucol = {h: i for i, h in enumerate(uheader)}
        zu = udata[:, ucol[z_column]]
        wu = udata[:, [ucol[h] for h in w_names]]
    try:
        return SemiSupervisedDataset(z, w, y, zu, wu, tuple(w_names))
    except InputError as exc:
        raise LoadError(f"{path_labeled}: {exc}") from exc


def write_csv(dataset: SemiSupervisedDataset, path_labeled, path_unlabeled, z_column="z", y_column="y"):
    """Write a dataset in the layout :func:`load_csv` reads (shortest round-trip repr)."""
    names = list(dataset.w_names)
    with Path(path_labeled).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow([z_column, y_column, *names])
        for z, y, w in zip(dataset.z_labeled, dataset.y_labeled, dataset.w_labeled):
            out.writerow([repr(float(z)), repr(float(y)), *(repr(float(v)) for v in w)])
    with Path(path_unlabeled).open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow([z_column, *names])
        for z, w in zip(dataset.z_unlabeled, dataset.w_unlabeled):
            out.writerow([repr(float(z)), *(repr(float(v)) for v in w)])

"""Sparse LibSVM-style datasets, train/test splits, and mini-batch schedules."""

import math
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    """Malformed LibSVM text; the message carries the 1-based line number."""


@dataclass(eq=False)
class SparseVector:
    """One sparse feature row: 1-based indices (strictly increasing) and values.

    Zero values are never stored; ``indices`` and ``values`` always have the
    same length.
    """

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.shape != self.values.shape or self.indices.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if self.indices.size:
            if self.indices[0] < 1:
                raise ValueError("feature indices are 1-based and must be >= 1")
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("feature indices must be strictly increasing")
        if np.any(self.values == 0.0):
            raise ValueError("zero values must not be stored")

    @property
    def nnz(self):
        return self.indices.size

    def dot(self, w):
        """Inner product with a dense weight vector of length >= max index."""
        if self.indices.size == 0:
            return 0.0
        return float(w[self.indices - 1] @ self.values)

    def squared_norm(self):
        return float(self.values @ self.values)


@dataclass(eq=False)
class Dataset:
    """Immutable collection of sparse rows with +/-1 labels.

    ``d`` is the feature dimension (max 1-based index); split children inherit
    it from the parent so shapes stay consistent.
    """

    rows: list
    labels: np.ndarray
    d: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if len(self.rows) == 0:
            raise ValueError("empty dataset")
        if len(self.rows) != self.labels.size:
            raise ValueError("row/label count mismatch")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        for row in self.rows:
            if row.nnz and row.indices[-1] > self.d:
                raise ValueError("row index exceeds dataset dimension d")

    @property
    def n(self):
        return len(self.rows)

    def subset(self, idx):
        """New dataset from a sequence of row positions; shares row storage."""
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset([self.rows[i] for i in idx], self.labels[idx], self.d)

    def dense(self):
        """Dense (n, d) matrix copy; intended for desk-scale problems only."""
        if self.n * self.d > 50_000_000:
            raise ValueError("dataset too large to densify (n*d > 5e7)")
        x = np.zeros((self.n, self.d))
        for i, row in enumerate(self.rows):
            if row.nnz:
                x[i, row.indices - 1] = row.values
        return x


def parse_libsvm(text):
    """Parse LibSVM text (``<label> <idx>:<val> ...`` per line) into a Dataset.

    Labels <= 0 map to -1 and labels > 0 map to +1. Empty lines are skipped.
    Explicit zero values are dropped. Raises ParseError (with the offending
    line number) on malformed tokens, non-increasing indices within a line, or
    a non-positive index; an input with no non-empty lines is also an error.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    rows = []
    labels = []
    d = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise ParseError(f"line {lineno}: bad label {tokens[0]!r}") from None
        indices = []
        values = []
        prev = 0
        for token in tokens[1:]:
            idx_s, sep, val_s = token.partition(":")
            if not sep:
                raise ParseError(f"line {lineno}: expected idx:value, got {token!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"line {lineno}: bad feature {token!r}") from None
            if idx < 1:
                raise ParseError(f"line {lineno}: index {idx} must be >= 1")
            if idx <= prev:
                raise ParseError(f"line {lineno}: non-increasing index {idx}")
            prev = idx
            d = max(d, idx)
            if val != 0.0:
                indices.append(idx)
                values.append(val)
        rows.append(SparseVector(np.array(indices, dtype=np.int64),
                                 np.array(values, dtype=np.float64)))
        labels.append(1.0 if raw_label > 0 else -1.0)
    if not rows:
        raise ParseError("empty dataset: no non-empty lines")
    return Dataset(rows, np.array(labels), d)


def dump_libsvm(ds):
    """Serialize a Dataset back to LibSVM text (exact float round trip)."""
    lines = []
    for row, y in zip(ds.rows, ds.labels):
        label = "+1" if y > 0 else "-1"
        feats = " ".join(f"{i}:{float(v)!r}" for i, v in zip(row.indices, row.values))
        lines.append(f"{label} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def load_libsvm(path):
    with open(path, "rb") as fh:
        return parse_libsvm(fh.read())


def split_train_test(ds, train_fraction, seed):
    """Deterministic shuffled split; train gets round(train_fraction * n) rows.

    The row count is clamped so that both parts stay non-empty. Both children
    inherit ``d`` from the parent.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if ds.n < 2:
        raise ValueError("need at least 2 rows to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    n_train = int(math.floor(train_fraction * ds.n + 0.5))
    n_train = min(max(n_train, 1), ds.n - 1)
    return ds.subset(perm[:n_train]), ds.subset(perm[n_train:])


@dataclass(eq=False)
class BatchSchedule:
    """A random partition of {0..n-1} into m = ceil(n/b) visit-ordered batches."""

    batches: list
    b: int
    m: int
    seed: int
    epoch: int = 0

    def __iter__(self):
        return iter(self.batches)


def make_schedule(n, b, seed, epoch=0):
    """Mini-batch schedule for one epoch, derived deterministically from
    (seed, epoch).

    Each epoch gets a fresh uniform shuffle, chunked into m = ceil(n/b)
    batches; all batches have size b except possibly the last. Indices within
    a batch are sorted (set semantics, deterministic summation order).
    """
    if b < 1 or b > n:
        raise ValueError(f"batch size {b} out of range [1, {n}]")
    if seed < 0 or epoch < 0:
        raise ValueError("seed and epoch must be non-negative")
    rng = np.random.default_rng([seed, epoch])
    perm = rng.permutation(n)
    m = -(-n // b)
    batches = [np.sort(perm[k * b:(k + 1) * b]) for k in range(m)]
    return BatchSchedule(batches, b, m, seed, epoch)


def make_synthetic(n, d, seed=0, flip=0.0, margin=0.0):
    """Gaussian-feature binary dataset with a planted weight vector.

    Labels are sign(x . w_true) with sign(0) -> +1. Two separability knobs:
    ``margin`` > 0 shifts every point's component along the planted direction
    so that all planted margins are at least ``margin`` (an easier,
    well-separated problem); ``flip`` negates that fraction of the labels
    afterwards (label noise). The defaults give a plain separable problem.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if not 0.0 <= flip <= 1.0:
        raise ValueError("flip must be in [0, 1]")
    if margin < 0.0:
        raise ValueError("margin must be >= 0")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    w_true = rng.standard_normal(d)
    if margin > 0.0:
        u = w_true / np.linalg.norm(w_true)
        along = x @ u
        signs = np.where(along >= 0.0, 1.0, -1.0)
        x = x + np.outer(signs * (np.abs(along) + margin) - along, u)
        labels = signs
    else:
        labels = np.where(x @ w_true >= 0.0, 1.0, -1.0)
    n_flip = int(round(flip * n))
    if n_flip:
        labels = labels.copy()
        labels[rng.choice(n, size=n_flip, replace=False)] *= -1.0
    cols = np.arange(1, d + 1, dtype=np.int64)
    rows = []
    for i in range(n):
        keep = x[i] != 0.0
        rows.append(SparseVector(cols[keep], x[i][keep]))
    return Dataset(rows, labels, d)

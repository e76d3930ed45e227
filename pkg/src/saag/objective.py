"""Losses, regularizers, objective/gradient evaluation, and the l1 prox map.

The smooth part f of the composite objective F = f + g is the mean loss plus
the l2 term (lambda2/2)||w||^2; the non-smooth part g is lambda1*||w||_1 and
is handled exclusively by the proximal operator. Component gradients are
collinear with the data row, so the data-dependent part of every gradient is
a single slope times x_i.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import SparseVector

LOSSES = ("logistic", "squared_hinge", "least_squares")


@dataclass(frozen=True)
class Regularizer:
    """lambda2 scales the smooth l2 term, lambda1 the non-smooth l1 term."""

    lambda2: float = 0.0
    lambda1: float = 0.0

    def __post_init__(self):
        if self.lambda2 < 0 or self.lambda1 < 0:
            raise ValueError("regularization coefficients must be >= 0")

    @property
    def smooth_only(self):
        return self.lambda1 == 0.0


@dataclass(eq=False)
class ObjectiveSpec:
    """Loss kind + regularizer + dataset; immutable during a solver run."""

    loss: str
    reg: Regularizer
    data: object

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}, expected one of {LOSSES}")


def _sigmoid(t):
    # overflow-safe scalar logistic function
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def row_loss(spec, w, i):
    """Loss term of data point i at w (no regularization)."""
    row = spec.data.rows[i]
    y = spec.data.labels[i]
    z = row.dot(w)
    if spec.loss == "logistic":
        return float(np.logaddexp(0.0, -y * z))
    if spec.loss == "squared_hinge":
        return max(0.0, 1.0 - y * z) ** 2
    return 0.5 * (z - y) ** 2


def row_slope(spec, w, i):
    """Slope c_i such that the gradient of loss term i is c_i * x_i."""
    row = spec.data.rows[i]
    y = spec.data.labels[i]
    z = row.dot(w)
    if spec.loss == "logistic":
        return -y * _sigmoid(-y * z)
    if spec.loss == "squared_hinge":
        return -2.0 * y * max(0.0, 1.0 - y * z)
    return z - y


def slope_sum(spec, w, batch):
    """Dense sum of c_i * x_i over a batch, accumulated in batch order."""
    acc = np.zeros(spec.data.d)
    rows = spec.data.rows
    for i in batch:
        c = row_slope(spec, w, i)
        if c != 0.0:
            row = rows[i]
            acc[row.indices - 1] += c * row.values
    return acc


def component_grad(spec, w, i):
    """Data-dependent gradient of loss term i as a SparseVector.

    The dense lambda2*w contribution is added by callers at the level of the
    assembled direction, never per component.
    """
    if not 0 <= i < spec.data.n:
        raise IndexError(f"component index {i} out of range [0, {spec.data.n})")
    row = spec.data.rows[i]
    c = row_slope(spec, w, i)
    if c == 0.0:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0))
    return SparseVector(row.indices.copy(), c * row.values)


def batch_grad(spec, w, batch):
    """Mean gradient of the smooth part over a batch:
    (1/|B|) sum_{i in B} grad loss_i(w) + lambda2 * w.
    """
    k = len(batch)
    if k == 0:
        raise ValueError("empty batch")
    return slope_sum(spec, w, batch) / k + spec.reg.lambda2 * w


def full_grad(spec, w):
    """Gradient of the smooth part over the whole dataset."""
    return batch_grad(spec, w, np.arange(spec.data.n))


def batch_smooth_value(spec, w, batch):
    """Mini-batch smooth objective: mean loss over the batch plus the l2 term.

    This is the quantity the stochastic line search compares; the l1 term is
    excluded because the proximal step handles it after the gradient step.
    """
    k = len(batch)
    if k == 0:
        raise ValueError("empty batch")
    total = 0.0
    for i in batch:
        total += row_loss(spec, w, i)
    return total / k + 0.5 * spec.reg.lambda2 * float(w @ w)


def objective_value(spec, w):
    """Full composite objective F(w) = mean loss + l2 term + l1 term."""
    return (batch_smooth_value(spec, w, range(spec.data.n))
            + spec.reg.lambda1 * float(np.abs(w).sum()))


def prox(z, eta, reg):
    """Proximal map of eta * lambda1 * ||.||_1: coordinatewise soft-threshold.

    With lambda1 = 0 this returns z unchanged (the l2 term lives in the smooth
    part, not here).
    """
    if eta <= 0.0:
        raise ValueError(f"step size must be positive, got {eta}")
    z = np.asarray(z, dtype=np.float64)
    if reg.lambda1 == 0.0:
        return z.copy()
    t = eta * reg.lambda1
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def accuracy(w, test):
    """Fraction of test points with sign(w . x) equal to the label.

    sign(0) counts as +1.
    """
    if test.n == 0:
        raise ValueError("empty test set")
    scores = np.array([row.dot(w) for row in test.rows])
    pred = np.where(scores >= 0.0, 1.0, -1.0)
    return float(np.mean(pred == test.labels))

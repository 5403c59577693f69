"""Synthetic multi-objective test problems and evaluation accounting.

Objectives are minimized.  Raw values are mapped onto a common scale by

    y_norm_k = -clip((upper_k - y_k) / (upper_k - lower_k), 0, inf)

so a value at upper_k maps to 0 (worst), a value at lower_k maps to -1,
values beyond lower_k may drop below -1, and values above upper_k clamp
to 0.  The mapping is monotone, so candidate rankings are unaffected.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class EvalCounter:
    """Thread-safe counter of black-box objective evaluations."""

    def __init__(self):
        self._count = 0
        self._lock = threading.Lock()

    def add(self, k: int = 1):
        with self._lock:
            self._count += int(k)

    @property
    def count(self) -> int:
        return self._count

    def __repr__(self):
        return f"EvalCounter({self._count})"


@dataclass
class ObjectiveSpec:
    """A vector-valued black-box objective with normalization bounds.

    fn maps a (K, d) array to a (K, n) array of raw objective values.
    bounds is (n, 2): per-objective (lower, upper) used by normalize().
    """

    name: str
    n: int
    d: int
    fn: Callable[[np.ndarray], np.ndarray]
    bounds: np.ndarray

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.bounds.shape != (self.n, 2):
            raise ValueError(f"bounds must have shape ({self.n}, 2)")
        if np.any(self.bounds[:, 1] <= self.bounds[:, 0]):
            raise ValueError("each upper bound must exceed its lower bound")


def evaluate(spec: ObjectiveSpec, x: np.ndarray, counter: EvalCounter | None = None) -> np.ndarray:
    """Raw objective values of a single point; one counted evaluation."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != spec.d:
        raise ValueError(f"x must be a ({spec.d},) point, got shape {x.shape}")
    y = np.asarray(spec.fn(x[None, :]), dtype=float).reshape(spec.n)
    if counter is not None:
        counter.add(1)
    return y


def evaluate_batch(spec: ObjectiveSpec, X: np.ndarray, counter: EvalCounter | None = None) -> np.ndarray:
    """Raw objective values of a (K, d) batch; K counted evaluations."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != spec.d:
        raise ValueError(f"points must have dimension {spec.d}, got {X.shape[1]}")
    Y = np.asarray(spec.fn(X), dtype=float).reshape(X.shape[0], spec.n)
    if counter is not None:
        counter.add(X.shape[0])
    return Y


def normalize(y: np.ndarray, spec: ObjectiveSpec) -> np.ndarray:
    """Map raw objective rows onto the common (-inf, 0] scale."""
    y = np.asarray(y, dtype=float)
    lower = spec.bounds[:, 0]
    upper = spec.bounds[:, 1]
    scaled = (upper - y) / (upper - lower)
    return -np.clip(scaled, 0.0, None)


def make_multiwell(n: int, d: int, anchors: np.ndarray,
                   bounds: np.ndarray | None = None,
                   name: str = "multiwell") -> ObjectiveSpec:
    """Quadratic wells f_k(x) = ||x - a_k||^2 around n anchor points.

    The trade-off set of this problem is the convex hull of the anchors.
    Default bounds per objective: lower 0 (attained at the anchor), upper
    the largest squared anchor-to-anchor distance seen from that anchor.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    if n < 2:
        raise ValueError(f"multiwell needs n >= 2 objectives, got {n}")
    if anchors.shape != (n, d):
        raise ValueError(f"anchors must have shape ({n}, {d}), got {anchors.shape}")
    pair_d2 = np.sum((anchors[:, None, :] - anchors[None, :, :]) ** 2, axis=2)
    if np.any(pair_d2[~np.eye(n, dtype=bool)] == 0.0):
        raise ValueError("anchors must be pairwise distinct")

    def fn(X: np.ndarray) -> np.ndarray:
        diff = X[:, None, :] - anchors[None, :, :]
        return np.sum(diff * diff, axis=2)

    if bounds is None:
        upper = pair_d2.max(axis=1)
        bounds = np.stack([np.zeros(n), upper], axis=1)
    return ObjectiveSpec(name=name, n=n, d=d, fn=fn, bounds=bounds)


def make_quadratic(d: int, anchor: np.ndarray | None = None, upper: float = 4.0,
                   name: str = "quadratic") -> ObjectiveSpec:
    """Single-objective squared distance to one anchor (n = 1 edge cases)."""
    a = np.zeros(d) if anchor is None else np.asarray(anchor, dtype=float).reshape(d)

    def fn(X: np.ndarray) -> np.ndarray:
        return np.sum((X - a[None, :]) ** 2, axis=1, keepdims=True)

    return ObjectiveSpec(name=name, n=1, d=d, fn=fn,
                         bounds=np.array([[0.0, upper]]))

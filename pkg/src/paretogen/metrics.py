"""Pareto dominance utilities and hypervolume indicators (minimization).

Hypervolume is the measure of the union of boxes [y, ref] spanned by a
point set and a reference corner.  Exact sweeps cover n in {1, 2, 3};
a Monte Carlo estimator with a binomial standard error serves as an
independent route for any n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True if a is at least as good everywhere and better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a <= b) and np.any(a < b))


def pareto_front(Y: np.ndarray) -> np.ndarray:
    """Indices of non-dominated rows; duplicate rows keep the first index."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    K = Y.shape[0]
    keep = np.ones(K, dtype=bool)
    for i in range(K):
        if not keep[i]:
            continue
        le = np.all(Y <= Y[i], axis=1)
        lt = np.any(Y < Y[i], axis=1)
        if np.any(le & lt):
            keep[i] = False
            continue
        dup = np.all(Y == Y[i], axis=1)
        dup[i] = False
        dup[: i] = False          # only later copies are discarded
        keep &= ~dup
    return np.flatnonzero(keep)


def _clean_front(Y: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Drop points outside the reference box, dedupe, Pareto-filter."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    inside = np.all(Y <= ref[None, :], axis=1)
    Y = Y[inside]
    if Y.shape[0] == 0:
        return Y
    Y = np.unique(Y, axis=0)
    return Y[pareto_front(Y)]


def hypervolume_exact(Y: np.ndarray, ref: np.ndarray | None = None) -> float:
    """Exact hypervolume for 1, 2 or 3 objectives (minimization).

    Points with any coordinate beyond the reference are ignored; the
    reference defaults to the origin, matching normalized objectives.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = Y.shape[1]
    ref = np.zeros(n) if ref is None else np.asarray(ref, dtype=float).reshape(n)
    F = _clean_front(Y, ref)
    if F.shape[0] == 0:
        return 0.0
    if n == 1:
        return float(ref[0] - F[:, 0].min())
    if n == 2:
        return _hv2d(F, ref)
    if n == 3:
        # sweep the third axis: between consecutive levels the covered
        # cross-section is the 2-D union of the points already active
        order = np.argsort(F[:, 2], kind="stable")
        F = F[order]
        levels = np.concatenate([F[:, 2], [ref[2]]])
        total = 0.0
        for i in range(F.shape[0]):
            height = levels[i + 1] - levels[i]
            if height > 0.0:
                active = F[: i + 1, :2]
                keep = pareto_front(active)
                total += _hv2d(active[keep], ref[:2]) * height
        return float(total)
    raise ValueError(f"exact hypervolume supports n <= 3, got n = {n}")


def _hv2d(F: np.ndarray, ref: np.ndarray) -> float:
    """Sweep over a cleaned 2-D front sorted by the first objective."""
    order = np.argsort(F[:, 0], kind="stable")
    F = F[order]
    total = 0.0
    for i in range(F.shape[0]):
        right = F[i + 1, 0] if i + 1 < F.shape[0] else ref[0]
        total += (right - F[i, 0]) * (ref[1] - F[i, 1])
    return float(total)


def hypervolume_mc(Y: np.ndarray, ref: np.ndarray | None = None,
                   n_samples: int = 100_000,
                   rng: np.random.Generator | None = None):
    """Monte Carlo hypervolume estimate and its binomial standard error.

    Uniform samples are drawn in the bounding box between the
    componentwise best corner of the cleaned front and the reference.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = Y.shape[1]
    ref = np.zeros(n) if ref is None else np.asarray(ref, dtype=float).reshape(n)
    F = _clean_front(Y, ref)
    if F.shape[0] == 0:
        return 0.0, 0.0
    if rng is None:
        rng = np.random.default_rng()
    lo = F.min(axis=0)
    box = np.prod(ref - lo)
    if box == 0.0:
        return 0.0, 0.0
    hits = 0
    chunk = 200_000
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        pts = lo + (ref - lo) * rng.random((k, n))
        covered = np.zeros(k, dtype=bool)
        for row in F:
            covered |= np.all(pts >= row[None, :], axis=1)
            if covered.all():
                break
        hits += int(covered.sum())
        done += k
    p = hits / n_samples
    est = box * p
    se = box * np.sqrt(p * (1.0 - p) / n_samples)
    return float(est), float(se)


def combined_front_contributions(labeled: dict[str, np.ndarray],
                                 ref: np.ndarray | None = None):
    """Pool labeled point sets, extract the joint front, count per label.

    Returns (counts, combined_hv, front_rows) where front_rows is a list
    of (label, y) pairs in pooled order and counts sums to its length.
    """
    labels = []
    blocks = []
    for name, Y in labeled.items():
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[0] == 0:
            continue
        blocks.append(Y)
        labels.extend([name] * Y.shape[0])
    if not blocks:
        return {name: 0 for name in labeled}, 0.0, []
    pool = np.vstack(blocks)
    idx = pareto_front(pool)
    counts = {name: 0 for name in labeled}
    front_rows = []
    for i in idx:
        counts[labels[i]] += 1
        front_rows.append((labels[i], pool[i]))
    n = pool.shape[1]
    ref = np.zeros(n) if ref is None else np.asarray(ref, dtype=float).reshape(n)
    hv = hypervolume_exact(pool[idx], ref) if n <= 3 else hypervolume_mc(pool[idx], ref)[0]
    return counts, float(hv), front_rows


@dataclass
class ParetoArchive:
    """Incrementally maintained non-dominated set with source labels."""

    points: list = field(default_factory=list)
    values: list = field(default_factory=list)
    sources: list = field(default_factory=list)

    def add(self, x: np.ndarray, y: np.ndarray, source: str = ""):
        y = np.asarray(y, dtype=float)
        for kept in self.values:
            if dominates(kept, y) or np.array_equal(kept, y):
                return False
        keep = [not dominates(y, v) for v in self.values]
        self.points = [p for p, k in zip(self.points, keep) if k]
        self.values = [v for v, k in zip(self.values, keep) if k]
        self.sources = [s for s, k in zip(self.sources, keep) if k]
        self.points.append(np.asarray(x, dtype=float))
        self.values.append(y)
        self.sources.append(source)
        return True

    def __len__(self):
        return len(self.values)

    def front(self) -> np.ndarray:
        if not self.values:
            return np.empty((0, 0))
        return np.vstack(self.values)

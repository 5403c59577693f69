"""Low-discrepancy preference directions on the nonnegative unit sphere.

A rank-1 lattice in the (n-1)-cube is pushed through a measure-preserving
map onto the first orthant of the unit sphere in R^n.  Coordinates are
grouped in circle pairs: squared pair radii follow the simplex law that
makes the sphere measure uniform, and each pair angle is a quarter-turn
parameter.  Odd n carries one unpaired leading coordinate.

Each column of the result is a preference direction; entries act as
divisors downstream, so consumers clamp them away from zero with
clamp_preferences before use.
"""

from __future__ import annotations

import numpy as np


def _smallest_prime_at_least(k: int) -> int:
    def is_prime(m: int) -> bool:
        if m < 2:
            return False
        if m % 2 == 0:
            return m == 2
        f = 3
        while f * f <= m:
            if m % f == 0:
                return False
            f += 2
        return True

    m = max(k, 2)
    while not is_prime(m):
        m += 1
    return m


def lattice_points(N: int, n: int, rng: np.random.Generator | None = None,
                   shift: np.ndarray | None = None) -> np.ndarray:
    """Randomized rank-1 lattice in [0,1)^(n-1), one column per point.

    The generating vector starts at 1 and continues with
    round(N * frac(2 cos(2 pi j / m))) for j = 1..n-2, with m the
    smallest prime >= 2(n-1)+1.  A uniform shift is applied modulo 1;
    pass shift explicitly for reproducibility without an rng.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    m = _smallest_prime_at_least(2 * (n - 1) + 1)
    j = np.arange(1, n - 1)
    frac = np.mod(2.0 * np.cos(2.0 * np.pi * j / m), 1.0)
    z = np.concatenate([[1], np.rint(N * frac).astype(np.int64)])
    idx = np.arange(1, N + 1, dtype=np.int64)
    omega = ((idx[None, :] * z[:, None]) % N) / float(N)    # (n-1, N) in [0,1)
    if shift is None:
        if rng is not None:
            shift = rng.random(n - 1)
        else:
            shift = np.zeros(n - 1)
    shift = np.asarray(shift, dtype=float).reshape(n - 1)
    return np.mod(omega + shift[:, None], 1.0)


def sphere_map(omega: np.ndarray) -> np.ndarray:
    """Map (n-1, N) cube points onto the nonnegative unit sphere in R^n.

    Rows 1..ceil((n-1)/2) of omega become quarter-turn pair angles, the
    remaining rows set the nested pair radii.  Columns of the result
    have unit norm and nonnegative entries.
    """
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if np.any((omega < 0.0) | (omega >= 1.0)):
        raise ValueError("omega entries must lie in [0, 1)")
    n = omega.shape[0] + 1
    N = omega.shape[1]
    if n < 2:
        raise ValueError("omega needs at least one row")
    r = (n - 1 + 1) // 2            # ceil((n-1)/2): number of pair angles
    k = n // 2                      # number of circle pairs
    theta = omega[:r] * (np.pi / 2.0)
    X = omega[r:]
    lam = np.empty((n, N))
    if n % 2 == 0:
        # n = 2k: squared pair radii are uniform simplex increments,
        # built from descending-ordered uniforms Y_1 <= ... <= Y_k = 1.
        Y = np.empty((k + 1, N))
        Y[0] = 0.0
        Y[k] = 1.0
        for i in range(k - 1, 0, -1):
            Y[i] = Y[i + 1] * X[i - 1] ** (1.0 / i)
        for i in range(1, k + 1):
            rad = np.sqrt(np.clip(Y[i] - Y[i - 1], 0.0, None))
            lam[2 * i - 2] = rad * np.cos(theta[i - 1])
            lam[2 * i - 1] = rad * np.sin(theta[i - 1])
    else:
        # n = 2k+1: one unpaired leading coordinate; the half-weight
        # block changes the radial exponents to 2/(2i-1).
        Y = np.empty((k + 2, N))
        Y[k + 1] = 1.0
        for i in range(k, 0, -1):
            Y[i] = Y[i + 1] * X[i - 1] ** (2.0 / (2 * i - 1))
        lam[0] = np.sqrt(np.clip(Y[1], 0.0, None))
        for i in range(1, k + 1):
            rad = np.sqrt(np.clip(Y[i + 1] - Y[i], 0.0, None))
            lam[2 * i - 1] = rad * np.cos(theta[i - 1])
            lam[2 * i] = rad * np.sin(theta[i - 1])
    return lam


def qmc_sphere(N: int, n: int, rng: np.random.Generator | None = None,
               shift: np.ndarray | None = None) -> np.ndarray:
    """Shifted-lattice preference set: sphere_map of lattice_points."""
    return sphere_map(lattice_points(N, n, rng=rng, shift=shift))


def mc_sphere(N: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo baseline: |N(0,1)| coordinates, columns normalized."""
    if N < 1 or n < 1:
        raise ValueError(f"need N >= 1 and n >= 1, got N={N}, n={n}")
    g = np.abs(rng.standard_normal((n, N)))
    norms = np.linalg.norm(g, axis=0)
    # a zero column has probability zero; regenerate defensively
    bad = norms == 0.0
    while np.any(bad):
        g[:, bad] = np.abs(rng.standard_normal((n, int(bad.sum()))))
        norms = np.linalg.norm(g, axis=0)
        bad = norms == 0.0
    return g / norms


def min_pairwise_geodesic(L: np.ndarray) -> float:
    """Smallest great-circle distance between any two columns of L."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    N = L.shape[1]
    if N < 2:
        raise ValueError("need at least two columns")
    dots = np.clip(L.T @ L, -1.0, 1.0)
    ang = np.arccos(dots)
    ang[np.diag_indices(N)] = np.inf
    return float(ang.min())


def clamp_preferences(L: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Force every entry >= eps while keeping columns unit-norm.

    Entries below the floor are pinned to eps and the remaining mass is
    rescaled; pinning is repeated until no rescaled entry dips under the
    floor.  Divisor semantics downstream make the floor mandatory.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float)).copy()
    n = L.shape[0]
    if eps <= 0.0 or eps * np.sqrt(n) >= 1.0:
        raise ValueError(f"eps must satisfy 0 < eps < 1/sqrt(n), got {eps}")
    for col in range(L.shape[1]):
        v = L[:, col]
        pinned = np.zeros(n, dtype=bool)
        for _ in range(n):
            free_mass = 1.0 - eps * eps * pinned.sum()
            denom = np.sum(v[~pinned] ** 2)
            if denom <= 0.0:
                raise ValueError("preference column has no usable mass")
            s = np.sqrt(free_mass / denom)
            scaled = s * v
            newly = (~pinned) & (scaled < eps)
            if not newly.any():
                v = np.where(pinned, eps, scaled)
                break
            pinned |= newly
        else:
            raise ValueError("clamping did not converge")
        L[:, col] = v
    return L


def preference_batch(N: int, n: int, source: str, rng: np.random.Generator,
                     eps: float = 1e-3, user: np.ndarray | None = None) -> np.ndarray:
    """Clamped preference rows for a batch of N instances, shape (N, n)."""
    if n == 1:
        return np.ones((N, 1))
    if source == "qmc":
        L = qmc_sphere(N, n, rng=rng)
    elif source == "mc":
        L = mc_sphere(N, n, rng)
    elif source == "user":
        if user is None:
            raise ValueError("source='user' requires a preference matrix")
        U = np.atleast_2d(np.asarray(user, dtype=float))
        if U.shape != (N, n):
            raise ValueError(f"user preferences must have shape ({N}, {n})")
        norms = np.linalg.norm(U, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("user preference rows must be nonzero")
        L = (U / norms).T
    else:
        raise ValueError(f"unknown preference source {source!r}")
    return clamp_preferences(L, eps=eps).T


def save_preferences(path, L: np.ndarray):
    """Write preference vectors to CSV, one vector per row."""
    rows = np.atleast_2d(np.asarray(L, dtype=float)).T
    np.savetxt(path, rows, fmt="%.17g", delimiter=",")


def load_preferences(path) -> np.ndarray:
    """Read a preference CSV back into column layout (n, N)."""
    rows = np.loadtxt(path, delimiter=",", ndmin=2)
    return rows.T

"""Top-m principal components by power iteration with deflation.

Only two components are ever plotted, so a full eigendecomposition is not
needed; power iteration on the covariance with Gram-Schmidt against already
found directions is enough and keeps the implementation self-contained.
"""
from __future__ import annotations

import numpy as np

TOL = 1e-10
MAX_ITER = 1000


class DegenerateData(ValueError):
    pass


def _power_iteration(a: np.ndarray, rng: np.random.Generator, found: list[np.ndarray]) -> np.ndarray:
    n = a.shape[0]
    v = rng.normal(size=n)
    for prev in found:
        v -= (v @ prev) * prev
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        v = np.zeros(n)
        v[len(found) % n] = 1.0
    else:
        v /= norm
    for _ in range(MAX_ITER):
        w = a @ v
        for prev in found:
            w -= (w @ prev) * prev
        norm = np.linalg.norm(w)
        if norm < 1e-300:
            # deflated matrix is (numerically) zero: any orthogonal direction
            w = _orthogonal_unit(n, found)
            return w
        w /= norm
        if np.linalg.norm(w - v) < TOL:
            return w
        v = w
    return v


def _orthogonal_unit(n: int, found: list[np.ndarray]) -> np.ndarray:
    for j in range(n):
        v = np.zeros(n)
        v[j] = 1.0
        for prev in found:
            v -= (v @ prev) * prev
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            return v / norm
    raise DegenerateData("no orthogonal direction left")


def pca_project(vectors: np.ndarray, out_dims: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Project n x d data onto its top principal components.

    Returns (n x out_dims coordinates, explained variances).  Sign
    convention: each eigenvector's largest-magnitude component is positive.
    Raises DegenerateData when all points are identical.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3 or x.shape[1] < 2:
        raise ValueError("need at least 3 points of dimension >= 2")
    if out_dims < 1 or out_dims > x.shape[1]:
        raise ValueError("out_dims out of range")
    centered = x - x.mean(axis=0)
    if not np.any(np.abs(centered) > 1e-12):
        raise DegenerateData("all points identical")
    cov = (centered.T @ centered) / (x.shape[0] - 1)

    rng = np.random.default_rng(0)
    components: list[np.ndarray] = []
    variances = []
    deflated = cov.copy()
    for _ in range(out_dims):
        v = _power_iteration(deflated, rng, components)
        idx = int(np.argmax(np.abs(v)))
        if v[idx] < 0:
            v = -v
        lam = float(v @ cov @ v)
        components.append(v)
        variances.append(max(lam, 0.0))
        deflated = deflated - lam * np.outer(v, v)

    basis = np.column_stack(components)
    return centered @ basis, np.array(variances)

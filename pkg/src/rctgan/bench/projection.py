"""Two-component PCA projection of real vs synthetic rows."""

from __future__ import annotations

import numpy as np
import pandas as pd

JACOBI_TOL = 1e-12
JACOBI_SWEEPS = 100


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` sorted by decreasing eigenvalue; column i
    of ``vectors`` belongs to ``values[i]``.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T):
        raise ValueError("jacobi_eigh needs a symmetric square matrix")
    v = np.eye(n)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt((np.triu(a, 1) ** 2).sum())
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], v[:, order]


def project_2d(real: np.ndarray, synth: np.ndarray, real_labels=None, synth_labels=None) -> pd.DataFrame:
    """Fit PCA on ``real`` and project both sets onto its top two components.

    Returns a frame with columns x, y, class, origin (real|synthetic).
    """
    real = np.asarray(real, dtype=np.float64)
    synth = np.asarray(synth, dtype=np.float64).reshape(-1, real.shape[1])
    if len(real) < 2:
        raise ValueError("projection needs at least two real rows")
    mean = real.mean(axis=0)
    cov = np.cov(real - mean, rowvar=False).reshape(real.shape[1], real.shape[1])
    if np.trace(cov) <= 0:
        raise ValueError("real rows have zero variance")
    vals, vecs = jacobi_eigh(cov)
    basis = vecs[:, :2]
    if basis.shape[1] < 2:
        basis = np.hstack([basis, np.zeros((len(basis), 1))])
    frames = []
    for pts, labels, origin in ((real, real_labels, "real"), (synth, synth_labels, "synthetic")):
        xy = (pts - mean) @ basis
        frames.append(pd.DataFrame({"x": xy[:, 0], "y": xy[:, 1],
                                    "class": labels if labels is not None else 0, "origin": origin}))
    return pd.concat(frames, ignore_index=True)

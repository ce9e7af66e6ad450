"""Small dense kernels: symmetric eigensolver, rotation sign fixing, solves.

Matrices are plain ``numpy`` arrays. The eigensolver is a cyclic Jacobi
iteration, which is plenty for the 3x3 and 6x6 problems met in the fitter and
keeps high relative accuracy on strongly graded matrices (eigenvalues spanning
many decades, as happens for very elongated ellipsoids).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError

_EPS = np.finfo(float).eps
MAX_SIZE = 10
RANK_RTOL = 1e-12


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order with matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


def _as_square(m, name="matrix") -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


def sym_eigen(m, max_sweeps: int = 60) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Symmetric matrix, ``n <= 10``. Only the upper triangle is read.
    max_sweeps : int
        Safety cap on full sweeps; convergence is quadratic, so real inputs
        finish in well under ten.

    Returns
    -------
    EigenDecomposition
        ``values`` weakly descending, ``vectors[:, i]`` the unit eigenvector
        for ``values[i]``. Ties keep the index order of the sweep, so the
        output is deterministic for a given input.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > MAX_SIZE:
        raise InvalidInputError(f"sym_eigen supports n <= {MAX_SIZE}, got {n}")
    a = np.triu(a) + np.triu(a, 1).T
    v = np.eye(n)
    scale = np.abs(a).max() if n else 0.0
    floor = _EPS * _EPS * scale

    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                app, aqq = a[p, p], a[q, q]
                # relative threshold keeps tiny eigenvalues accurate
                if abs(apq) <= max(_EPS * np.sqrt(abs(app * aqq)), floor):
                    a[p, q] = a[q, p] = 0.0
                    continue
                rotated = True
                theta = (aqq - app) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def make_proper(q, atol: float = 1e-8) -> np.ndarray:
    """Fix column signs of an orthonormal 3x3 basis so that det = +1.

    Each column is flipped so its largest-magnitude entry is nonnegative; if
    that leaves the determinant at -1, the last column is flipped back. The
    map is idempotent.
    """
    r = _as_square(q, "rotation")
    if r.shape != (3, 3):
        raise InvalidInputError(f"expected 3x3, got {r.shape}")
    if np.abs(r.T @ r - np.eye(3)).max() > atol:
        raise InvalidInputError("columns are not orthonormal")
    r = r.copy()
    for j in range(3):
        if r[np.argmax(np.abs(r[:, j])), j] < 0:
            r[:, j] = -r[:, j]
    if np.linalg.det(r) < 0:
        r[:, 2] = -r[:, 2]
    return r


def solve_linear(a, b) -> np.ndarray:
    """Solve ``a x = b``; minimum-norm least squares if ``a`` is rank deficient.

    Rank is judged from singular values at a relative threshold of 1e-12.
    """
    a = _as_square(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise InvalidInputError(f"shape mismatch: a is {a.shape}, b is {b.shape}")
    if a.shape[0] == 0:
        return b.copy()
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= RANK_RTOL * sv[0]:
        return np.linalg.lstsq(a, b, rcond=RANK_RTOL)[0]
    return np.linalg.solve(a, b)


def is_rotation(r, atol: float = 1e-10) -> bool:
    r = np.asarray(r, dtype=float)
    return (
        r.shape == (3, 3)
        and np.abs(r @ r.T - np.eye(3)).max() <= atol
        and np.linalg.det(r) > 0
    )

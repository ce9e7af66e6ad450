"""General quadric surfaces and the algebraic least-squares ingredients.

A quadric is stored as the 10-vector

    v = (a, b, c, f, g, h, p, q, r, d)

of ``a x^2 + b y^2 + c z^2 + 2f yz + 2g xz + 2h xy + 2p x + 2q y + 2r z + d = 0``.
Point sets are ``(N, 3)`` arrays.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateQuadricError, InvalidInputError, NotAnEllipsoidError
from .linalg import RANK_RTOL, solve_linear

COEFF_NAMES = ("a", "b", "c", "f", "g", "h", "p", "q", "r", "d")
QUADRATIC = slice(0, 6)
AFFINE = slice(6, 10)


def as_points(points, min_points: int = 1) -> np.ndarray:
    """Validate and return ``points`` as a float ``(N, 3)`` array."""
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3:
        raise InvalidInputError(f"points must have shape (N, 3), got {p.shape}")
    if p.shape[0] < min_points:
        raise InvalidInputError(f"need at least {min_points} points, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("points contain non-finite coordinates")
    return p


def as_coeffs(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (10,):
        raise InvalidInputError(f"quadric coefficients must have shape (10,), got {v.shape}")
    return v


def design_matrix(points) -> np.ndarray:
    """The ``10 x N`` design matrix; column i is the monomial vector of point i."""
    x, y, z = as_points(points).T
    return np.stack(
        [x * x, y * y, z * z, 2 * y * z, 2 * x * z, 2 * x * y,
         2 * x, 2 * y, 2 * z, np.ones_like(x)]
    )


def invariants_IJ(v) -> tuple[float, float]:
    """Rotation invariants ``I = a+b+c`` and ``J = ab+bc+ac-f^2-g^2-h^2``."""
    a, b, c, f, g, h = as_coeffs(v)[QUADRATIC]
    return a + b + c, a * b + b * c + a * c - f * f - g * g - h * h


def constraint_block(k: float) -> np.ndarray:
    """The 6x6 block acting on ``(a, b, c, f, g, h)``; ``v^T C v = kJ - I^2``."""
    if not np.isfinite(k) or k < 4:
        raise InvalidInputError(f"k must be >= 4, got {k}")
    c = np.zeros((6, 6))
    c[:3, :3] = k / 2.0 - 1.0
    c[[0, 1, 2], [0, 1, 2]] = -1.0
    c[[3, 4, 5], [3, 4, 5]] = -k
    return c


def constraint_matrix(k: float) -> np.ndarray:
    """Zero-padded symmetric 10x10 constraint matrix for parameter ``k``."""
    c = np.zeros((10, 10))
    c[QUADRATIC, QUADRATIC] = constraint_block(k)
    return c


def algebraic_distance(v, dm) -> float:
    """Sum of squared residuals ``sum_i (v . X_i)^2``."""
    v = as_coeffs(v)
    dm = np.asarray(dm, dtype=float)
    if dm.ndim != 2 or dm.shape[0] != 10:
        raise InvalidInputError(f"design matrix must be 10 x N, got {dm.shape}")
    r = v @ dm
    return float(r @ r)


def fisher_block(v) -> np.ndarray:
    """Symmetric 3x3 matrix of the quadratic part."""
    a, b, c, f, g, h = as_coeffs(v)[QUADRATIC]
    return np.array([[a, h, g], [h, b, f], [g, f, c]])


def coeffs_from_parts(k_mat, lin, d) -> np.ndarray:
    """Inverse of :func:`fisher_block`, plus linear part ``(p, q, r)`` and ``d``."""
    k_mat = np.asarray(k_mat, dtype=float)
    return np.array([
        k_mat[0, 0], k_mat[1, 1], k_mat[2, 2],
        0.5 * (k_mat[1, 2] + k_mat[2, 1]),
        0.5 * (k_mat[0, 2] + k_mat[2, 0]),
        0.5 * (k_mat[0, 1] + k_mat[1, 0]),
        *np.asarray(lin, dtype=float), float(d),
    ])


class FisherForm(NamedTuple):
    K: np.ndarray
    center: np.ndarray
    scale: float

    @property
    def normalized(self) -> np.ndarray:
        """``K / scale``: the surface is ``(x-c)^T (K/scale) (x-c) = 1``."""
        return self.K / self.scale


def quadric_to_fisher(v) -> FisherForm:
    """Split a quadric into quadratic form, center and level.

    With ``K`` the quadratic block and ``(p, q, r)`` the linear part, the
    center solves ``K c = -(p, q, r)`` and ``scale = c^T K c - d``, so that
    the surface reads ``(x - c)^T K (x - c) = scale``. The overall sign of
    ``v`` is flipped when needed to make ``scale`` positive.

    Raises
    ------
    DegenerateQuadricError
        ``K`` is singular at relative threshold 1e-12.
    NotAnEllipsoidError
        ``scale`` is zero (a cone or a point), so no positive level exists.
    """
    v = as_coeffs(v)
    k_mat = fisher_block(v)
    sv = np.linalg.svd(k_mat, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= RANK_RTOL * sv[0]:
        raise DegenerateQuadricError("quadratic part is singular")
    center = solve_linear(k_mat, -v[AFFINE][:3])
    scale = float(center @ k_mat @ center - v[9])
    if scale < 0:
        k_mat, scale = -k_mat, -scale
    if not scale > 0:
        raise NotAnEllipsoidError("quadric has zero level (degenerate cone)")
    return FisherForm(k_mat, center, scale)


def is_positive_definite(m) -> bool:
    m = np.asarray(m, dtype=float)
    try:
        np.linalg.cholesky(0.5 * (m + m.T))
    except np.linalg.LinAlgError:
        return False
    return True

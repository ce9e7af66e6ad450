"""Euler angles for fitted ellipsoids.

Convention. The rotation built from ``(alpha, beta, gamma)`` has elements

    R11 = ca cb      R12 = sg sb ca - cg sa      R13 = cg sb ca + sg sa
    R21 = cb sa      R22 = sg sa sb + cg ca      R23 = cg sa sb - sg ca
    R31 = -sb        R32 = sg cb                 R33 = cg cb

(``ca = cos(alpha)`` and so on). In this element layout ``alpha`` turns the
XY plane and ``gamma`` the YZ plane. Body coordinates ``b`` of a surface point
map to the fixed frame as ``p = R^T b``; equivalently the columns of ``R^T``
are the body axes expressed in the fixed frame.

Angles are degrees at the API boundary and radians inside.
"""
from __future__ import annotations

import itertools
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import InvalidInputError, OrientationAmbiguousError

GIMBAL_TOL = 1e-9
CONSISTENCY_TOL = 1e-8
MATCH_RTOL = 1e-6

AxisOrder = Union[str, Sequence[float]]


class EulerAngles(NamedTuple):
    alpha: float
    beta: float
    gamma: float
    gimbal_lock: bool = False

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


def euler_to_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Rotation matrix for angles in degrees, element by element as above."""
    a, b, g = np.radians([alpha, beta, gamma])
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    cg, sg = np.cos(g), np.sin(g)
    return np.array([
        [ca * cb, sg * sb * ca - cg * sa, cg * sb * ca + sg * sa],
        [cb * sa, sg * sa * sb + cg * ca, cg * sa * sb - sg * ca],
        [-sb, sg * cb, cg * cb],
    ])


def _wrap180(deg: float) -> float:
    """Map to (-180, 180]."""
    w = float(np.mod(deg + 180.0, 360.0) - 180.0)
    return 180.0 if w == -180.0 else w


def matrix_to_euler(r, check: bool = True) -> EulerAngles:
    """Invert :func:`euler_to_matrix`.

    ``beta`` comes from ``R31``, ``alpha`` from the first column and ``gamma``
    from the last row. Near ``|cos beta| = 0`` only ``alpha + gamma`` (or the
    difference) is defined; ``alpha`` is then pinned to 0 and the result is
    flagged. The six unused element equations are checked against the
    rebuilt matrix.

    Raises
    ------
    InvalidInputError
        ``r`` is not a proper rotation, or the consistency check fails.
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        raise InvalidInputError("expected a finite 3x3 matrix")
    if np.abs(r @ r.T - np.eye(3)).max() > 1e-8 or np.linalg.det(r) < 0:
        raise InvalidInputError("matrix is not a proper rotation")

    beta = -np.arcsin(np.clip(r[2, 0], -1.0, 1.0))
    cb = np.hypot(r[0, 0], r[1, 0])
    if cb < GIMBAL_TOL:
        alpha = 0.0
        # with alpha = 0: R22 = cos(gamma), R23 = -sin(gamma)
        gamma = np.arctan2(-r[1, 2], r[1, 1])
        lock = True
    else:
        alpha = np.arctan2(r[1, 0], r[0, 0])
        gamma = np.arctan2(r[2, 1], r[2, 2])
        lock = False

    out = EulerAngles(
        _wrap180(np.degrees(alpha)), float(np.degrees(beta)), _wrap180(np.degrees(gamma)), lock
    )
    if check:
        rebuilt = euler_to_matrix(*out.as_tuple())
        if np.abs(rebuilt - r).max() > CONSISTENCY_TOL:
            raise InvalidInputError("element equations are inconsistent")
    return out


def _order_columns(lengths: np.ndarray, order: AxisOrder) -> list[int]:
    """Column order so that semi-axis lengths follow ``order``."""
    if isinstance(order, str):
        if order == "descending":
            return list(np.argsort(-lengths, kind="stable"))
        if order == "ascending":
            return list(np.argsort(lengths, kind="stable"))
        raise InvalidInputError(f"unknown axis order {order!r}")
    ref = np.asarray(order, dtype=float)
    if ref.shape != (3,):
        raise InvalidInputError("reference semi-axes must have three entries")
    # i-th smallest fitted axis goes where the i-th smallest reference axis is
    cols = [0, 0, 0]
    for slot, col in zip(np.argsort(ref, kind="stable"), np.argsort(lengths, kind="stable")):
        cols[slot] = col
    return cols


def axis_lengths(points, axes, center=None) -> np.ndarray:
    """Semi-axis length along each column of ``axes`` from the points alone.

    Fits ``sum_j w_j y_j^2 = 1`` in the frame spanned by ``axes``.
    """
    p = np.asarray(points, dtype=float)
    if center is not None:
        p = p - center
    y = p @ axes
    w = np.linalg.lstsq(y * y, np.ones(len(y)), rcond=None)[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > 0, 1.0 / np.sqrt(np.abs(w)), np.inf)


_SIGNS = [np.array(s, dtype=float) for s in itertools.product((1, -1), repeat=3)]
_PERMS = list(itertools.permutations(range(3)))


def _candidates(axes: np.ndarray, first: Sequence[int]):
    """The 24 proper relabelings of ``axes``; permutation ``first`` leads."""
    perms = [tuple(first)] + [p for p in _PERMS if p != tuple(first)]
    for perm in perms:
        for signs in _SIGNS:
            cand = axes[:, perm] * signs
            if np.linalg.det(cand) > 0:
                yield perm, cand


def recover_orientation(
    points,
    r,
    semi_axes=None,
    order: AxisOrder = "descending",
    center=None,
) -> tuple[EulerAngles, np.ndarray, np.ndarray]:
    """Euler angles of a fitted ellipsoid from its principal directions.

    Parameters
    ----------
    points : (N, 3) array
        The original input points.
    r : (3, 3) array
        Columns are the principal directions in the fixed frame (in any
        order, with any signs).
    semi_axes : (3,) array, optional
        Semi-axis length belonging to each column of ``r``. Estimated from
        ``points`` when omitted.
    order : {"descending", "ascending"} or sequence of 3 floats
        Which body axis gets which semi-axis. A sequence is read as reference
        lengths, e.g. ``(1, 3, 5)`` puts the shortest axis on body x.
    center : (3,) array, optional

    Returns
    -------
    angles : EulerAngles
    rotation : (3, 3) array
        Rotation ``R`` of the angles, so that ``p = R^T b``.
    semi_axes : (3,) array
        Semi-axes in body-axis order.

    Notes
    -----
    The body labeling fixes the axes up to the four sign patterns that map
    the ellipsoid onto itself. Among those the scan takes the one with
    ``alpha`` and ``gamma`` in (-90, 90], then keeps it only if the rotation
    rebuilt from its angles projects the points to the same body
    coordinates. Other permutations are only tried when that fails.
    """
    p = np.asarray(points, dtype=float)
    axes = np.asarray(r, dtype=float)
    if np.linalg.det(axes) < 0:
        axes = axes * np.array([1.0, 1.0, -1.0])
    if semi_axes is None:
        lengths = axis_lengths(p, axes, center)
    else:
        lengths = np.asarray(semi_axes, dtype=float)
    first = _order_columns(lengths, order)
    pc = p if center is None else p - center

    seen = []
    found = []
    for perm, cand in _candidates(axes, first):
        rot = cand.T
        try:
            ang = matrix_to_euler(rot, check=False)
        except InvalidInputError:
            continue
        seen.append(ang.as_tuple())
        body = pc @ cand
        rebuilt = pc @ euler_to_matrix(*ang.as_tuple()).T
        scale = max(np.abs(body).max(), np.finfo(float).tiny)
        if np.abs(rebuilt - body).max() > MATCH_RTOL * scale:
            continue
        canonical = -90.0 < ang.alpha <= 90.0 and -90.0 < ang.gamma <= 90.0
        found.append((perm != tuple(first), not canonical, abs(ang.alpha) + abs(ang.gamma),
                      len(found), ang, rot, lengths[list(perm)]))
        if perm == tuple(first) and canonical:
            break
    if not found:
        raise OrientationAmbiguousError("no relabeling reproduced the points", seen)
    best = min(found, key=lambda t: t[:4])
    return best[4], best[5], best[6]


def angle_difference(a: float, b: float) -> float:
    """Smallest absolute difference between two angles in degrees."""
    return abs(_wrap180(a - b))

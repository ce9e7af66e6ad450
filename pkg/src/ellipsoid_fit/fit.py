"""Iterative-transformation ellipsoid fitting.

Each outer iteration projects the input points onto the current frame ``R``,
runs the k-doubling constrained fit there, and then turns ``R`` by the
eigenvectors of the fitted quadratic form. Once the fitted form is diagonal in
the current frame, the fit is mapped back: ``K_xyz = R K R^T``.

The constrained fit itself is invariant under rotations of the data. What the
outer loop buys is conditioning: the fit rescales each coordinate of the
projected points separately, and that only makes the problem well posed when
the frame is close to the principal axes. For very elongated ellipsoids the
first pass is therefore inaccurate and later passes are not.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .errors import (
    ConstraintInfeasibleError,
    DegenerateQuadricError,
    FitFailedError,
    InvalidInputError,
    NotAnEllipsoidError,
)
from .linalg import make_proper, sym_eigen
from .lsq import K_MAX, Rule, Scaling, SinglePassFit, inner_fit
from .orientation import AxisOrder, EulerAngles, recover_orientation
from .quadric import as_points, fisher_block, is_positive_definite

log = logging.getLogger(__name__)

InitMode = Literal["random", "fisher", "identity"]
COPLANAR_RTOL = 1e-10


class InitFallbackWarning(UserWarning):
    """Fisher initialization fell back to a random rotation."""


@dataclass(frozen=True)
class FitConfig:
    k_max: float = K_MAX
    max_outer_iterations: int = 100
    off_diag_tol: float = 1e-8
    trace_tol: float = 1e-6
    init_mode: InitMode = "random"
    rng_seed: int = 0
    # stop when the off-diagonal norm has not improved for this many passes
    stall_iterations: int = 10
    degeneracy_rtol: float = 1e-9
    acceptance: Rule = "optimal"
    scaling: Scaling = "axis"
    fit_center: bool = False
    axis_order: AxisOrder = "descending"

    def __post_init__(self):
        if not (self.off_diag_tol > 0 and self.trace_tol > 0 and self.degeneracy_rtol > 0):
            raise InvalidInputError("tolerances must be positive")
        if self.max_outer_iterations < 1 or self.stall_iterations < 1:
            raise InvalidInputError("iteration caps must be >= 1")
        if not self.k_max >= 4:
            raise InvalidInputError("k_max must be >= 4")
        if self.init_mode not in ("random", "fisher", "identity"):
            raise InvalidInputError(f"unknown init_mode {self.init_mode!r}")


@dataclass(frozen=True)
class EllipsoidGeometry:
    """Semi-axes (in body-axis order), Euler angles in degrees and center."""

    semi_axes: tuple[float, float, float]
    euler_deg: tuple[float, float, float]
    center: tuple[float, float, float]
    degenerate_axes: bool = False
    gimbal_lock: bool = False

    @property
    def chi(self) -> float:
        return max(self.semi_axes) / min(self.semi_axes)


@dataclass(frozen=True)
class IterationRecord:
    outer_iter: int
    k_used: float
    omega: float
    off_diag_norm: float
    inner_iterations: int
    accepted: bool
    ellipsoid: bool
    # quadratic form and center mapped to the input frame
    fisher: np.ndarray = field(repr=False)
    center: np.ndarray = field(repr=False)
    # form eigenvalues (descending) and the refined frame built from them
    eigenvalues: np.ndarray = field(repr=False)
    rotation: np.ndarray = field(repr=False)


@dataclass
class FitReport:
    geometry: EllipsoidGeometry
    fisher_original_frame: np.ndarray
    rotation: np.ndarray
    outer_iterations: int
    per_iteration_trace: list[IterationRecord]
    converged: bool
    method: str = "iterative"
    init_fallback: bool = False
    points: Optional[np.ndarray] = field(default=None, repr=False)
    final: Optional[IterationRecord] = field(default=None, repr=False)

    @property
    def inner_iterations(self) -> int:
        return sum(r.inner_iterations for r in self.per_iteration_trace)

    def geometry_for(self, order: AxisOrder) -> EllipsoidGeometry:
        """Same ellipsoid, with semi-axes assigned to body axes per ``order``."""
        rec = self.final
        return describe(rec.eigenvalues, rec.rotation, rec.center, self.points, order)


def offdiag_norm(k_mat) -> float:
    """``max(|f|, |g|, |h|) / max(|a|, |b|, |c|)``."""
    k_mat = np.asarray(k_mat)
    diag = np.abs(np.diag(k_mat)).max()
    off = max(abs(k_mat[0, 1]), abs(k_mat[0, 2]), abs(k_mat[1, 2]))
    return float(off / diag) if diag > 0 else float("inf")


def _eigen_clusters(w: np.ndarray, rtol: float) -> list[list[int]]:
    top = np.abs(w).max()
    groups = [[0]]
    for i in range(1, len(w)):
        if abs(w[i - 1] - w[i]) <= rtol * top:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def aligned_eigenvectors(k_mat, rtol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and a proper eigenvector frame of ``k_mat``.

    Inside a cluster of equal eigenvalues the basis is free; the one closest
    to the coordinate axes is taken, so an already diagonal form yields the
    identity rather than an arbitrary rotation of its degenerate plane.
    """
    w, v = sym_eigen(k_mat)
    v = v.copy()
    eye = np.eye(3)
    for grp in _eigen_clusters(w, rtol):
        if len(grp) > 1:
            u, _, wt = np.linalg.svd(v[:, grp].T @ eye[:, grp])
            v[:, grp] = v[:, grp] @ (u @ wt)
    return w, make_proper(v)


def converged(k_mat, evecs, cfg: FitConfig) -> bool:
    """Outer-loop test: the form is diagonal and its eigenvector frame is ~I."""
    return (
        offdiag_norm(k_mat) <= cfg.off_diag_tol
        and abs(np.trace(evecs) - 3.0) <= cfg.trace_tol
    )


def _random_rotation(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((3, 3))
    return make_proper(sym_eigen(g.T @ g).vectors)


def _init_rotation(points, cfg: FitConfig) -> tuple[np.ndarray, bool]:
    if cfg.init_mode == "identity":
        return np.eye(3), False
    if cfg.init_mode == "random":
        return _random_rotation(cfg.rng_seed), False
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered / len(points)
    w, v = sym_eigen(cov)
    if len(points) < 4 or w[-1] <= 1e-12 * w[0]:
        return _random_rotation(cfg.rng_seed), True
    # eigenvectors of the inverse covariance, largest first
    return make_proper(v[:, ::-1]), False


def init_rotation(points, cfg: FitConfig) -> np.ndarray:
    """Starting frame for the outer loop, according to ``cfg.init_mode``.

    ``random`` takes the eigenvectors of ``G^T G`` for a standard normal
    3x3 ``G`` drawn from ``cfg.rng_seed``; ``fisher`` uses the eigenvectors of
    the inverse data covariance and falls back to ``random`` (with an
    :class:`InitFallbackWarning`) when the covariance is singular.
    """
    r, fell_back = _init_rotation(as_points(points), cfg)
    if fell_back:
        warnings.warn("singular data covariance; using a random rotation", InitFallbackWarning)
    return r


def _check_spread(points: np.ndarray) -> None:
    sv = np.linalg.svd(points - points.mean(axis=0), compute_uv=False)
    if sv[0] == 0 or sv[-1] <= COPLANAR_RTOL * sv[0]:
        raise InvalidInputError("points are coplanar")


def _polar(r: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(r)
    return u @ vt


def _record(it: int, fit: SinglePassFit, frame: np.ndarray, cfg: FitConfig):
    """Record for one outer pass, plus the local form used for refinement."""
    try:
        form = fit.fisher
        local, center = form.normalized, form.center
    except (DegenerateQuadricError, NotAnEllipsoidError):
        local, center = fisher_block(fit.original_coeffs), np.zeros(3)
    w, e = aligned_eigenvectors(local, cfg.degeneracy_rtol)
    refined = _polar(frame @ e)
    rec = IterationRecord(
        outer_iter=it,
        k_used=fit.k_used,
        omega=fit.omega,
        off_diag_norm=offdiag_norm(local),
        inner_iterations=fit.inner_iterations,
        accepted=fit.accepted,
        ellipsoid=fit.ellipsoid and is_positive_definite(local),
        fisher=_sym(frame @ local @ frame.T),
        center=frame @ center,
        eigenvalues=w,
        rotation=refined,
    )
    return rec, local, e


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def describe(eigenvalues, directions, center, points, order: AxisOrder = "descending",
             rtol: float = 1e-9) -> EllipsoidGeometry:
    """Geometry from form eigenvalues and the matching principal directions."""
    w = np.asarray(eigenvalues, dtype=float)
    semi = 1.0 / np.sqrt(w)
    groups = _eigen_clusters(np.sort(w)[::-1], rtol)
    degenerate = any(len(g) > 1 for g in groups)
    center = tuple(float(c) for c in center)
    if len(groups) == 1:
        # a sphere has no orientation
        axes = np.sort(semi)
        if order == "descending":
            axes = axes[::-1]
        return EllipsoidGeometry(tuple(map(float, axes)), (0.0, 0.0, 0.0), center, True, False)
    ang, _, ordered = recover_orientation(points, directions, semi, order, np.asarray(center))
    return EllipsoidGeometry(
        tuple(float(x) for x in ordered), ang.as_tuple(), center, degenerate, ang.gimbal_lock
    )


def _report(records, chosen, cfg, conv, points, method, fell_back) -> FitReport:
    geom = describe(chosen.eigenvalues, chosen.rotation, chosen.center, points,
                    cfg.axis_order, cfg.degeneracy_rtol)
    return FitReport(
        geometry=geom,
        fisher_original_frame=chosen.fisher,
        rotation=chosen.rotation,
        outer_iterations=len(records),
        per_iteration_trace=records,
        converged=conv,
        method=method,
        init_fallback=fell_back,
        points=points,
        final=chosen,
    )


def _diagnostics(records) -> dict:
    return {
        "outer_iterations": len(records),
        "trace": [(r.k_used, r.omega, r.off_diag_norm, r.ellipsoid) for r in records],
    }


def fit_ellipsoid(points, cfg: FitConfig = FitConfig()) -> FitReport:
    """Fit an ellipsoid to ``N >= 6`` points by iterative frame alignment.

    Returns a report for the converged pass, or, if the loop runs out of
    iterations or stalls, for the pass with the smallest off-diagonal norm
    (``converged=False``). A settled frame whose inner fit still needed the
    constraint at ``k_max`` is reported with ``converged=False`` too.

    Raises
    ------
    InvalidInputError
        Fewer than six points, or coplanar points.
    FitFailedError
        No pass produced an ellipsoid.
    """
    p = as_points(points, 6)
    _check_spread(p)
    frame, fell_back = _init_rotation(p, cfg)
    if fell_back:
        warnings.warn("singular data covariance; using a random rotation", InitFallbackWarning)

    records: list[IterationRecord] = []
    best: Optional[IterationRecord] = None
    best_off = np.inf
    stalled = 0
    for it in range(1, cfg.max_outer_iterations + 1):
        try:
            fit = inner_fit(p @ frame, cfg.k_max, rule=cfg.acceptance,
                            scaling=cfg.scaling, fit_center=cfg.fit_center)
        except (ConstraintInfeasibleError, InvalidInputError) as exc:
            log.debug("outer pass %d produced no fit: %s", it, exc)
            break
        rec, local, e = _record(it, fit, frame, cfg)
        records.append(rec)
        if rec.ellipsoid and (best is None or rec.off_diag_norm <= best.off_diag_norm):
            best = rec
        if rec.ellipsoid and converged(local, e, cfg):
            if rec.accepted:
                return _report(records, rec, cfg, True, p, "iterative", fell_back)
            # the frame is settled but the constraint is still active at k_max
            log.info("frame converged without an accepted inner fit")
            return _report(records, rec, cfg, False, p, "iterative", fell_back)
        frame = rec.rotation
        if rec.off_diag_norm < best_off:
            best_off, stalled = rec.off_diag_norm, 0
        else:
            stalled += 1
            if stalled >= cfg.stall_iterations:
                log.info("off-diagonal norm stalled after %d passes", it)
                break

    if best is None:
        raise FitFailedError("no outer pass produced an ellipsoid", _diagnostics(records))
    return _report(records, best, cfg, False, p, "iterative", fell_back)


def single_pass_fit(points, cfg: FitConfig = FitConfig()) -> FitReport:
    """Baseline without the outer loop.

    One k-doubling sweep in the input frame, accepting the first ellipsoid,
    with isotropic conditioning. This is the classic fixed-frame scheme the
    iterative method improves on.
    """
    p = as_points(points, 6)
    _check_spread(p)
    try:
        fit = inner_fit(p, cfg.k_max, rule="ellipsoid", scaling="isotropic",
                        fit_center=cfg.fit_center)
    except ConstraintInfeasibleError as exc:
        raise FitFailedError(str(exc)) from exc
    rec, _, _ = _record(1, fit, np.eye(3), cfg)
    if not rec.ellipsoid:
        raise FitFailedError("single pass did not produce an ellipsoid", _diagnostics([rec]))
    return _report([rec], rec, cfg, fit.accepted, p, "single-pass", False)


__all__ = [
    "EllipsoidGeometry",
    "EulerAngles",
    "FitConfig",
    "FitReport",
    "IterationRecord",
    "converged",
    "describe",
    "fit_ellipsoid",
    "init_rotation",
    "single_pass_fit",
]

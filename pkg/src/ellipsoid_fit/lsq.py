"""Constrained algebraic least squares for a single ellipsoid fit.

For a fixed ``k`` the fit minimizes the algebraic distance subject to
``kJ - I^2 = 1``. The stationarity conditions give the generalized eigenproblem
``S v = lambda C v`` with ``S = D D^T``. The affine block of ``v`` is
eliminated through the Schur complement of ``S``, leaving a 6x6 pencil in the
quadratic coefficients.

All of this happens in a *conditioned* frame (see :class:`Conditioning`); the
normalization ``v^T C v = 1`` and the eigen-relation hold for the coefficients
in that frame. Geometry is always reported back in the caller's frame.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import (
    ConstraintInfeasibleError,
    DegenerateQuadricError,
    InvalidInputError,
    NotAnEllipsoidError,
)
from .linalg import solve_linear, sym_eigen
from .quadric import (
    FisherForm,
    as_points,
    coeffs_from_parts,
    constraint_block,
    design_matrix,
    fisher_block,
    is_positive_definite,
    quadric_to_fisher,
)

MIN_POINTS = 6
K_START = 4.0
K_MAX = 1e10

Scaling = Literal["axis", "isotropic"]
Rule = Literal["optimal", "ellipsoid"]


def free_indices(fit_center: bool) -> np.ndarray:
    """Coefficient slots that are actually solved for."""
    return np.arange(10) if fit_center else np.array([0, 1, 2, 3, 4, 5, 9])


@dataclass(frozen=True)
class Conditioning:
    """Affine map ``x -> (x - shift) / scale`` applied before fitting.

    ``scale`` is per coordinate. With ``isotropic`` scaling all three entries
    are the RMS radius, a similarity, so the constraint keeps its meaning in
    the caller's frame. ``axis`` scaling uses the RMS of each coordinate; it
    is much better conditioned once the frame is close to the ellipsoid's
    principal axes, which is what the outer iteration provides.
    """

    shift: np.ndarray
    scale: np.ndarray

    @classmethod
    def for_points(cls, points, scaling: Scaling = "axis", fit_center: bool = False):
        p = as_points(points)
        shift = p.mean(axis=0) if fit_center else np.zeros(3)
        c = p - shift
        if scaling == "axis":
            scale = np.sqrt(np.mean(c * c, axis=0))
        elif scaling == "isotropic":
            scale = np.full(3, np.sqrt(np.mean(np.sum(c * c, axis=1))))
        else:
            raise InvalidInputError(f"unknown scaling {scaling!r}")
        if not np.all(scale > 0):
            raise InvalidInputError("points are degenerate along a coordinate axis")
        return cls(shift, scale)

    def apply(self, points) -> np.ndarray:
        return (as_points(points) - self.shift) / self.scale

    def to_original(self, v) -> np.ndarray:
        """Express conditioned-frame coefficients in the caller's frame."""
        v = np.asarray(v, dtype=float)
        inv = 1.0 / self.scale
        k_mat = fisher_block(v) * np.outer(inv, inv)
        lin_c = v[6:9] * inv
        mu = self.shift
        lin = lin_c - k_mat @ mu
        d = mu @ k_mat @ mu - 2.0 * lin_c @ mu + v[9]
        return coeffs_from_parts(k_mat, lin, d)


@dataclass(frozen=True)
class SinglePassFit:
    """Result of one constrained fit at a given ``k``.

    ``coeffs`` live in the conditioned frame and satisfy ``v^T C(k) v = 1``;
    ``omega`` is the algebraic distance there (equal to ``lam`` for an exact
    eigenpair). ``accepted`` follows the acceptance rule of the caller:
    ``ellipsoid`` only asks for a genuine ellipsoid, ``optimal`` additionally
    requires that the unconstrained least-squares optimum already satisfies
    the constraint at this ``k``.
    """

    coeffs: np.ndarray
    conditioning: Conditioning
    k_used: float
    lam: float
    omega: float
    ellipsoid: bool
    optimum_admissible: bool
    accepted: bool
    inner_iterations: int = 1

    @cached_property
    def original_coeffs(self) -> np.ndarray:
        return self.conditioning.to_original(self.coeffs)

    @cached_property
    def fisher(self) -> FisherForm:
        return quadric_to_fisher(self.original_coeffs)


class _Scatter:
    """Scatter matrix of one point set, reduced once and reused for every k."""

    def __init__(self, points, scaling: Scaling, fit_center: bool):
        points = as_points(points, MIN_POINTS)
        self.conditioning = Conditioning.for_points(points, scaling, fit_center)
        self.fit_center = fit_center
        dm = design_matrix(self.conditioning.apply(points))
        aff = slice(6, 10) if fit_center else slice(9, 10)
        d1, d2 = dm[:6], dm[aff]
        s12 = d1 @ d2.T
        s22 = d2 @ d2.T
        # v2 = -s22^+ s21 v1
        self.elim = solve_linear(s22, s12.T)
        self.reduced = d1 @ d1.T - s12 @ self.elim
        self.reduced = 0.5 * (self.reduced + self.reduced.T)
        self.aff = aff
        self.unconstrained = sym_eigen(self.reduced).vectors[:, -1]

    def full_vector(self, v1) -> np.ndarray:
        v = np.zeros(10)
        v[:6] = v1
        v[self.aff] = -self.elim @ v1
        return v

    def solve(self, k: float, rule: Rule = "optimal") -> SinglePassFit:
        c6 = constraint_block(k)
        m = self.reduced
        w, vecs = np.linalg.eig(np.linalg.solve(c6, m))
        best = None
        floor = 64 * np.finfo(float).eps * k
        for lam, vec in zip(w, vecs.T):
            if abs(lam.imag) > 1e-9 * max(1.0, abs(lam.real)):
                continue
            v1 = vec.real / np.linalg.norm(vec.real)
            q = v1 @ c6 @ v1
            if q <= floor:
                continue
            v1 = v1 / np.sqrt(q)
            omega = omega_of(v1, m)
            key = (omega, -lam.real)
            if best is None or key < best[0]:
                best = (key, v1, float(lam.real))
        if best is None:
            raise ConstraintInfeasibleError(f"no admissible eigenvector at k={k:g}")
        (omega, _), v1, lam = best

        u = self.unconstrained
        optimum_admissible = bool(u @ c6 @ u > 0)
        fit = SinglePassFit(
            coeffs=self.full_vector(v1),
            conditioning=self.conditioning,
            k_used=float(k),
            lam=lam,
            omega=omega,
            ellipsoid=False,
            optimum_admissible=optimum_admissible,
            accepted=False,
        )
        ellipsoid = _is_ellipsoid(fit)
        accepted = ellipsoid and (optimum_admissible or rule == "ellipsoid")
        return replace(fit, ellipsoid=ellipsoid, accepted=accepted)


def omega_of(v1, reduced) -> float:
    return float(max(v1 @ reduced @ v1, 0.0))


def _is_ellipsoid(fit: SinglePassFit) -> bool:
    try:
        return is_positive_definite(fit.fisher.normalized)
    except (DegenerateQuadricError, NotAnEllipsoidError):
        return False


def fit_for_k(
    points,
    k: float,
    *,
    rule: Rule = "optimal",
    scaling: Scaling = "axis",
    fit_center: bool = False,
) -> SinglePassFit:
    """Constrained least-squares quadric for one value of ``k``.

    Among generalized eigenvectors with ``v^T C v > 0`` the one with the
    smallest algebraic distance wins (ties: larger eigenvalue).

    Raises
    ------
    InvalidInputError
        Fewer than six points, or ``k < 4``.
    ConstraintInfeasibleError
        No eigenvector satisfies the constraint; the caller should raise ``k``.
    """
    return _Scatter(points, scaling, fit_center).solve(k, rule)


def inner_fit(
    points,
    k_max: float = K_MAX,
    *,
    rule: Rule = "optimal",
    scaling: Scaling = "axis",
    fit_center: bool = False,
) -> SinglePassFit:
    """Double ``k`` from 4 until the fit is accepted or ``k`` exceeds ``k_max``.

    The last fit is returned either way; ``accepted`` tells which case
    happened. Raises :class:`ConstraintInfeasibleError` only if no ``k`` in the
    sweep produced any admissible fit.
    """
    scatter = _Scatter(points, scaling, fit_center)
    k = K_START
    n = 0
    last = None
    while True:
        n += 1
        try:
            last = scatter.solve(k, rule)
        except ConstraintInfeasibleError:
            pass
        if (last is not None and last.accepted and last.k_used == k) or k > k_max:
            break
        k *= 2.0
    if last is None:
        raise ConstraintInfeasibleError(f"no admissible fit for 4 <= k <= {k:g}")
    return replace(last, inner_iterations=n)

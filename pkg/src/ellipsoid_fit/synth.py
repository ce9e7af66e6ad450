"""Synthetic point sets on ellipsoid surfaces."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError
from .orientation import euler_to_matrix
from .quadric import is_positive_definite


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic ellipsoid sample.

    Points are ``R^T (A cos t cos f, B cos t sin f, C sin t)`` with ``t`` and
    ``f`` uniform on ``theta_range`` and ``phi_range``. The default polar
    range ``[0, pi]`` still covers the whole surface because ``cos t`` changes
    sign over it.
    """

    semi_axes: tuple[float, float, float]
    euler_deg: tuple[float, float, float] = (0.0, 0.0, 0.0)
    n_points: int = 6
    seed: int = 0
    noise_sigma: float = 0.0
    theta_range: tuple[float, float] = (0.0, np.pi)
    phi_range: tuple[float, float] = (0.0, 2.0 * np.pi)

    def __post_init__(self):
        axes = tuple(float(x) for x in self.semi_axes)
        angles = tuple(float(x) for x in self.euler_deg)
        object.__setattr__(self, "semi_axes", axes)
        object.__setattr__(self, "euler_deg", angles)
        if len(axes) != 3 or not all(np.isfinite(axes)) or min(axes) <= 0:
            raise InvalidInputError(f"semi-axes must be three positive numbers, got {axes}")
        if len(angles) != 3 or not all(np.isfinite(angles)):
            raise InvalidInputError(f"need three finite Euler angles, got {angles}")
        if int(self.n_points) != self.n_points or self.n_points < 6:
            raise InvalidInputError(f"n_points must be an integer >= 6, got {self.n_points}")
        if not self.noise_sigma >= 0:
            raise InvalidInputError("noise_sigma must be >= 0")

    @property
    def chi(self) -> float:
        return max(self.semi_axes) / min(self.semi_axes)

    @property
    def rotation(self) -> np.ndarray:
        return euler_to_matrix(*self.euler_deg)

    @property
    def fisher(self) -> np.ndarray:
        """Normalized quadratic form: surface points satisfy ``p^T K p = 1``."""
        r = self.rotation
        return r.T @ np.diag(1.0 / np.square(self.semi_axes)) @ r

    def with_seed(self, seed: int) -> "SynthSpec":
        return SynthSpec(**{**asdict(self), "seed": int(seed)})

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        for key in ("semi_axes", "euler_deg", "theta_range", "phi_range"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)


def generate(spec: SynthSpec) -> np.ndarray:
    """Sample ``spec.n_points`` points, shape ``(N, 3)``; deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    theta = rng.uniform(*spec.theta_range, size=spec.n_points)
    phi = rng.uniform(*spec.phi_range, size=spec.n_points)
    a, b, c = spec.semi_axes
    body = np.column_stack([
        a * np.cos(theta) * np.cos(phi),
        b * np.cos(theta) * np.sin(phi),
        c * np.sin(theta),
    ])
    points = body @ spec.rotation  # rows of (R^T b)
    if spec.noise_sigma > 0:
        points = points + rng.normal(scale=spec.noise_sigma, size=points.shape)
    return points


def sample_quadric(g, level: float, n: int, seed=0) -> np.ndarray:
    """Points on ``p^T g p = level``: uniform directions, scaled radially."""
    g = np.asarray(g, dtype=float)
    if g.shape != (3, 3) or not np.allclose(g, g.T, rtol=0, atol=1e-12 * np.abs(g).max()):
        raise InvalidInputError("g must be a symmetric 3x3 matrix")
    if not is_positive_definite(g):
        raise InvalidInputError("g must be positive definite")
    if not level > 0:
        raise InvalidInputError("level must be positive")
    if int(n) != n or n < 6:
        raise InvalidInputError(f"n must be an integer >= 6, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    quad = np.einsum("ni,ij,nj->n", u, g, u)
    return u * np.sqrt(level / quad)[:, None]

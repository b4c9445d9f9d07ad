"""Truncated 1-D metric domains and the distribution representations built on them.

Every other module works with the types defined here: a uniform grid on a
bounded interval (the reference measure is Lebesgue restricted to that grid,
integrated with the composite trapezoid rule), plus Gaussian, grid-density,
particle and 2-D joint-grid representations of distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from .errors import DomainMismatch, DomainTooSmall, NonFinite, Unnormalized

NORMALIZATION_TOL = 1e-8
JOINT_NORMALIZATION_TOL = 1e-6
WEIGHT_SUM_TOL = 1e-12
TAIL_MASS_LIMIT = 1e-10
MIN_SIGMA_COVERAGE = 8.0
VARIANCE_FLOOR = 1e-3


@dataclass(frozen=True)
class DomainSpec:
    """Uniform grid on a bounded interval, endpoints included."""

    lower: float
    upper: float
    grid_points: int

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise NonFinite("domain endpoints must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"lower must be < upper, got [{self.lower}, {self.upper}]")
        if self.grid_points < 101:
            raise ValueError(f"grid_points must be >= 101, got {self.grid_points}")

    def diameter(self) -> float:
        return self.upper - self.lower

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.grid_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        xs = np.linspace(self.lower, self.upper, self.grid_points)
        xs.setflags(write=False)
        return xs

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.grid_points, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        w.setflags(write=False)
        return w

    def integrate(self, values: np.ndarray) -> float:
        """Composite trapezoid integral of nodal values over the domain."""
        return float(self.trapezoid_weights @ np.asarray(values, dtype=float))


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    variance: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise NonFinite("Gaussian mean must be finite")
        if not (math.isfinite(self.variance) and self.variance > 0.0):
            raise ValueError(f"variance must be positive and finite, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2.0 * math.pi))

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return ndtr((x - self.mean) / self.std)


def _as_readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridDensity:
    """Density values on the nodes of a DomainSpec.

    ``normalized=True`` asserts unit trapezoid mass; otherwise the values
    describe a scaled (positively weighted) measure with finite positive mass.
    """

    domain: DomainSpec
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if self.values.ndim != 1 or self.values.shape[0] != self.domain.grid_points:
            raise ValueError("values must be 1-D with one entry per grid node")
        if not np.all(np.isfinite(self.values)):
            raise NonFinite("density values must be finite")
        if np.any(self.values < 0.0):
            raise ValueError("density values must be nonnegative")
        m = self.mass()
        if self.normalized:
            if abs(m - 1.0) > NORMALIZATION_TOL:
                raise Unnormalized(f"trapezoid mass {m!r} is not 1 within {NORMALIZATION_TOL}")
        elif not (math.isfinite(m) and m > 0.0):
            raise ValueError(f"scaled density must have finite positive mass, got {m!r}")

    def mass(self) -> float:
        return self.domain.integrate(self.values)

    def cdf_values(self) -> np.ndarray:
        """CDF at the grid nodes (cumulative trapezoid, starts at 0)."""
        h = self.domain.spacing
        cells = 0.5 * h * (self.values[1:] + self.values[:-1])
        return np.concatenate(([0.0], np.cumsum(cells)))


@dataclass(frozen=True)
class ParticleSet:
    """Weighted empirical distribution."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _as_readonly(self.points))
        object.__setattr__(self, "weights", _as_readonly(self.weights))
        if self.points.ndim != 1 or self.points.shape != self.weights.shape:
            raise ValueError("points and weights must be 1-D arrays of equal length")
        if self.points.size == 0:
            raise ValueError("particle set must be nonempty")
        if not (np.all(np.isfinite(self.points)) and np.all(np.isfinite(self.weights))):
            raise NonFinite("particles and weights must be finite")
        if np.any(self.weights < 0.0):
            raise ValueError("weights must be nonnegative")
        s = float(self.weights.sum())
        if abs(s - 1.0) > WEIGHT_SUM_TOL:
            raise Unnormalized(f"weights sum to {s!r}, expected 1 within {WEIGHT_SUM_TOL}")

    def mean(self) -> float:
        return float(self.weights @ self.points)


@dataclass(frozen=True)
class JointGrid2D:
    """Nonnegative values on the product grid of two domains (row-major: x by w)."""

    x_domain: DomainSpec
    w_domain: DomainSpec
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        shape = (self.x_domain.grid_points, self.w_domain.grid_points)
        if self.values.shape != shape:
            raise ValueError(f"values must have shape {shape}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise NonFinite("joint density values must be finite")
        if np.any(self.values < 0.0):
            raise ValueError("joint density values must be nonnegative")
        m = self.mass()
        if self.normalized and abs(m - 1.0) > JOINT_NORMALIZATION_TOL:
            raise Unnormalized(f"2-D trapezoid mass {m!r} is not 1 within {JOINT_NORMALIZATION_TOL}")
        if not self.normalized and not (math.isfinite(m) and m > 0.0):
            raise ValueError("scaled joint density must have finite positive mass")

    def mass(self) -> float:
        wx = self.x_domain.trapezoid_weights
        ww = self.w_domain.trapezoid_weights
        return float(wx @ self.values @ ww)


def discretize(g: Gaussian1D, d: DomainSpec) -> GridDensity:
    """Project a Gaussian onto the grid as a normalized density.

    Requires the domain to cover at least 8 standard deviations on each side
    of the mean; equivalently the truncated tail mass must stay below
    ``TAIL_MASS_LIMIT``.
    """
    sigma = g.std
    if g.mean - MIN_SIGMA_COVERAGE * sigma < d.lower or g.mean + MIN_SIGMA_COVERAGE * sigma > d.upper:
        raise DomainTooSmall(
            f"domain [{d.lower}, {d.upper}] covers fewer than {MIN_SIGMA_COVERAGE} standard "
            f"deviations around mean {g.mean} (sigma {sigma})"
        )
    tail = float(ndtr((d.lower - g.mean) / sigma) + ndtr((g.mean - d.upper) / sigma))
    if tail > TAIL_MASS_LIMIT:
        raise DomainTooSmall(f"tail mass {tail!r} beyond the domain exceeds {TAIL_MASS_LIMIT}")
    values = g.pdf(d.nodes)
    values = values / d.integrate(values)
    return GridDensity(d, values, normalized=True)


def discretize_product(gx: Gaussian1D, gw: Gaussian1D, xd: DomainSpec, wd: DomainSpec) -> JointGrid2D:
    """Normalized product of two independent Gaussians on a joint grid."""
    px = discretize(gx, xd).values
    pw = discretize(gw, wd).values
    values = np.outer(px, pw)
    values = values / float(xd.trapezoid_weights @ values @ wd.trapezoid_weights)
    return JointGrid2D(xd, wd, values, normalized=True)


def moments(g: GridDensity) -> tuple[float, float]:
    """Trapezoid mean and (central) variance of a normalized grid density."""
    if not g.normalized:
        raise Unnormalized("moments require a normalized density")
    xs = g.domain.nodes
    w = g.domain.trapezoid_weights
    mean = float(w @ (xs * g.values))
    var = float(w @ ((xs - mean) ** 2 * g.values))
    return mean, var


def same_domain(a: DomainSpec, b: DomainSpec) -> None:
    if a != b:
        raise DomainMismatch(f"domains differ: {a} vs {b}")

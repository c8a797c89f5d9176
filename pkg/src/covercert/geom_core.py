"""Shared geometric substrate: points, balls, seeded sampling, minimum
enclosing balls, and spherical-cap measures.

Conventions used throughout the package:

* points are numpy arrays of shape (n,), point sets are arrays of shape
  (m, n), and all distances are Euclidean;
* every randomized routine takes an RngStream so that results are a pure
  function of (seed, stream_id);
* the normalized measure of a spherical cap of angle ``a`` on the unit
  sphere in R^n is  m(a) = I(sin^2 a; (n-1)/2, 1/2) / 2  for a <= pi/2,
  where I is the regularized incomplete beta function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, gammaln

Vector = np.ndarray

# default tolerances: geometric predicates 1e-12, solvers 1e-6
PREDICATE_TOL = 1e-12
SOLVER_TOL = 1e-6


def as_vector(x) -> Vector:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("vector must be one-dimensional and non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector coordinates must be finite")
    return v


def as_points(x, dim: int | None = None) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        p = p.reshape(1, -1)
    if p.ndim != 2:
        raise ValueError("point array must have shape (m, n)")
    if dim is not None and p.shape[1] != dim:
        raise ValueError(f"expected dimension {dim}, got {p.shape[1]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball."""

    center: Vector
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains_points(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        pts = as_points(points, self.dim)
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol

    def to_json_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius": self.radius}

    @staticmethod
    def from_json_dict(d: dict) -> "Ball":
        return Ball(np.asarray(d["center"], dtype=float), float(d["radius"]))


@dataclass(frozen=True)
class PointSet:
    """Finite configuration of points sharing one ambient dimension."""

    dim: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.dim)
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)

    @staticmethod
    def from_array(points) -> "PointSet":
        pts = as_points(points)
        return PointSet(pts.shape[1], pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_json_dict(self) -> dict:
        return {"dim": self.dim, "points": self.points.tolist()}

    @staticmethod
    def from_json_dict(d: dict) -> "PointSet":
        pts = np.asarray(d["points"], dtype=float).reshape(-1, int(d["dim"]))
        return PointSet(int(d["dim"]), pts)


@dataclass(frozen=True)
class SphericalCap:
    """Points of the unit sphere within angle `angle` of `axis`."""

    axis: Vector
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "axis", as_vector(self.axis))
        object.__setattr__(self, "angle", float(self.angle))
        if abs(np.linalg.norm(self.axis) - 1.0) > PREDICATE_TOL:
            raise ValueError("cap axis must be a unit vector (tol 1e-12)")
        if not 0.0 < self.angle < math.pi:
            raise ValueError("cap angle must lie in (0, pi)")

    def contains_directions(self, dirs: np.ndarray) -> np.ndarray:
        d = as_points(dirs, self.axis.size)
        return d @ self.axis >= math.cos(self.angle)


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream: identical (seed, stream_id) pairs
    reproduce identical sample sequences."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.stream_id]))

    def child(self, index: int) -> "RngStream":
        """Derived independent stream; injective for index < 65536."""
        if index < 0:
            raise ValueError("child index must be nonnegative")
        return RngStream(self.seed, self.stream_id * 65537 + index + 1)


def jung_radius(n: int) -> float:
    """Circumradius sqrt(n / (2n + 2)) of the smallest ball containing
    every set of diameter 1 in R^n; increases to 1/sqrt(2)."""
    if int(n) != n or n < 1:
        raise ValueError("dimension must be a positive integer")
    n = int(n)
    return math.sqrt(n / (2.0 * n + 2.0))


def diameter(ps: PointSet) -> float:
    """Exact max pairwise distance by an O(m^2) scan; 0 for a singleton."""
    if len(ps) == 0:
        raise ValueError("diameter of an empty point set is undefined")
    pts = ps.points
    if len(ps) == 1:
        return 0.0
    sq = np.sum(pts * pts, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    return float(math.sqrt(max(0.0, float(d2.max()))))


def min_enclosing_ball(ps: PointSet, tol: float = SOLVER_TOL,
                       max_iterations: int = 100_000) -> Ball:
    """Smallest enclosing ball up to a (1+tol) radius factor.

    Frank-Wolfe ascent with away steps on the dual

        maximize  sum_i u_i |p_i|^2 - |sum_i u_i p_i|^2   over the simplex,

    whose value never exceeds the squared optimal radius, so sqrt of the
    running value certifies the ball centered at c(u) = sum_i u_i p_i once
    the farthest input point sits within (1+tol) of it. Line search on the
    quadratic is exact, so the ascent converges linearly in practice. The
    returned radius is the exact maximum distance from the final center,
    hence containment of the inputs is exact regardless of tol.
    """
    if len(ps) == 0:
        raise ValueError("minimum enclosing ball of an empty set is undefined")
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts = ps.points
    if len(ps) == 1:
        return Ball(pts[0].copy(), 0.0)

    # The dual value is translation invariant; centroid-shifted coordinates
    # keep |q_i| = O(spread) so the value does not cancel catastrophically.
    centroid = pts.mean(axis=0)
    q = pts - centroid
    sq = np.einsum("ij,ij->i", q, q)
    # two-point start: farthest from the centroid, then farthest from that
    i0 = int(np.argmax(sq))
    rel = q - q[i0]
    i1 = int(np.argmax(np.einsum("ij,ij->i", rel, rel)))
    u = np.zeros(len(pts))
    u[i0] += 0.5
    u[i1] += 0.5

    center = u @ q
    certified = False
    for _ in range(max_iterations):
        cc = float(center @ center)
        grad = sq - 2.0 * (q @ center)  # grad_i = |q_i - c|^2 - |c|^2
        radius = math.sqrt(max(float(grad.max()) + cc, 0.0))
        if radius <= PREDICATE_TOL:
            certified = True
            break
        lower = math.sqrt(max(float(u @ sq) - cc, 0.0))
        if radius <= (1.0 + tol) * lower:
            certified = True
            break

        mean_grad = float(grad @ u)
        j = int(np.argmax(grad))
        gain_toward = float(grad[j]) - mean_grad
        support = np.flatnonzero(u > 0.0)
        a = int(support[np.argmin(grad[support])])
        gain_away = mean_grad - float(grad[a])
        if gain_toward <= 0.0 and gain_away <= 0.0:
            break  # stationary to rounding; certification re-checked below
        toward = gain_toward >= gain_away
        if toward:
            step = q[j] - center
            gain, gamma_max = gain_toward, 1.0
        else:
            step = center - q[a]
            ua = float(u[a])
            gain, gamma_max = gain_away, (ua / (1.0 - ua) if ua < 1.0 else 0.0)
        if gamma_max <= 0.0:
            break
        curv = 2.0 * float(step @ step)
        gamma = gamma_max if curv <= 0.0 else min(gamma_max, gain / curv)
        if toward:
            u *= 1.0 - gamma
            u[j] += gamma
        else:
            u *= 1.0 + gamma
            u[a] = 0.0 if gamma >= gamma_max else max(float(u[a]) - gamma, 0.0)
        u /= u.sum()
        center = u @ q

    if not certified:
        cc = float(center @ center)
        radius = math.sqrt(max(float(np.max(sq - 2.0 * (q @ center))) + cc, 0.0))
        lower = math.sqrt(max(float(u @ sq) - cc, 0.0))
        certified = radius <= (1.0 + tol) * lower
    if not certified:
        warnings.warn(
            "min_enclosing_ball stopped at the iteration cap without a "
            "certified (1+tol) radius; returning the best enclosing ball found",
            RuntimeWarning,
        )
    center = centroid + center
    radius = float(np.linalg.norm(pts - center, axis=1).max())
    return Ball(center, radius)


def regular_simplex(n: int) -> PointSet:
    """Vertices of the unit-edge regular n-simplex, centered at the origin
    of R^n (circumradius jung_radius(n))."""
    if int(n) != n or n < 1:
        raise ValueError("dimension must be a positive integer")
    n = int(n)
    # scaled standard basis of R^{n+1}: pairwise distances exactly 1
    v = np.eye(n + 1) / math.sqrt(2.0)
    v -= v.mean(axis=0)
    # Helmert rows: deterministic orthonormal basis of the centered hull
    h = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        h[k - 1, :k] = 1.0
        h[k - 1, k] = -k
        h[k - 1] /= math.sqrt(k * (k + 1.0))
    return PointSet(n, v @ h.T)


def sample_uniform_sphere(n: int, rng: RngStream, count: int | None = None):
    """Uniform unit vector(s) on the sphere in R^n via normalized Gaussians.

    Returns a single Vector when count is None, else a PointSet.
    """
    if int(n) != n or n < 1:
        raise ValueError("dimension must be a positive integer")
    gen = rng.generator()
    m = 1 if count is None else int(count)
    if m < 0:
        raise ValueError("count must be nonnegative")
    g = gen.standard_normal((m, int(n)))
    norms = np.linalg.norm(g, axis=1)
    # zero-norm draws have probability zero; guard for exact float zeros
    bad = norms < 1e-300
    if np.any(bad):
        g[bad] = 0.0
        g[bad, 0] = 1.0
        norms[bad] = 1.0
    u = g / norms[:, None]
    if count is None:
        return u[0]
    return PointSet(int(n), u)


def uniform_ball_points(gen: np.random.Generator, n: int, radius: float,
                        count: int) -> np.ndarray:
    """Generator-level core of sample_uniform_ball: Gaussian directions with
    the U^(1/n) radial law."""
    if count == 0:
        return np.empty((0, n))
    g = gen.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1)
    bad = norms < 1e-300
    if np.any(bad):
        g[bad] = 0.0
        g[bad, 0] = 1.0
        norms[bad] = 1.0
    radial = radius * gen.random(count) ** (1.0 / n)
    return g * (radial / norms)[:, None]


def sample_uniform_ball(n: int, radius: float, count: int, rng: RngStream) -> PointSet:
    """I.i.d. uniform points in radius * B_n; deterministic given rng."""
    if int(n) != n or n < 1:
        raise ValueError("dimension must be a positive integer")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if count < 0:
        raise ValueError("count must be nonnegative")
    return PointSet(int(n), uniform_ball_points(rng.generator(), int(n), radius, int(count)))


def ball_volume_log(n: int, radius: float = 1.0) -> float:
    """log Vol(radius * B_n) = (n/2) log pi - log Gamma(n/2 + 1) + n log radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    n = int(n)
    return 0.5 * n * math.log(math.pi) - float(gammaln(0.5 * n + 1.0)) + n * math.log(radius)


def cap_measure_exact(n: int, alpha: float) -> float:
    """Normalized measure of a spherical cap of angle alpha on the unit
    sphere of R^n.

    Uses the half regularized incomplete beta identity for alpha <= pi/2
    and the symmetry m(alpha) + m(pi - alpha) = 1 above.
    """
    if int(n) != n or n < 2:
        raise ValueError("sphere dimension parameter must satisfy n >= 2")
    if not 0.0 < alpha < math.pi:
        raise ValueError("cap angle must lie in (0, pi)")
    n = int(n)
    s2 = math.sin(alpha) ** 2
    half = 0.5 * float(betainc((n - 1) / 2.0, 0.5, s2))
    if alpha <= math.pi / 2.0:
        return half
    return 1.0 - half


def cap_measure_bounds(n: int, alpha: float) -> tuple[float, float]:
    """Strict sandwich for the cap measure, valid for alpha < pi/2:

        sin^(n-1) a / sqrt(2 pi n)  <  m(a)  <  sin^(n-1) a / (sqrt(2 pi (n-1)) cos a)
    """
    if int(n) != n or n < 2:
        raise ValueError("sphere dimension parameter must satisfy n >= 2")
    if not 0.0 < alpha < math.pi / 2.0:
        raise ValueError("sandwich bounds require alpha in (0, pi/2)")
    n = int(n)
    s = math.sin(alpha) ** (n - 1)
    lower = s / math.sqrt(2.0 * math.pi * n)
    upper = s / (math.sqrt(2.0 * math.pi * (n - 1)) * math.cos(alpha))
    return lower, upper

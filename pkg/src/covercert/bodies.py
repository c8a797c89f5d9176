"""Measurable bodies: membership oracles with bounding balls, isometric
transforms, Minkowski thickening, and Monte Carlo volume estimation.

Supported kinds: ball, halfspace intersection, ball intersection, thickened
body, transformed body, finite union. Thickening relies on a projection
routine (closed form for balls, cyclic Dykstra projections for convex
intersections, nearest part for unions), via

    dist(p, S + eps*B) = max(dist(p, S) - eps, 0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geom_core import (
    Ball,
    PointSet,
    RngStream,
    as_points,
    as_vector,
    ball_volume_log,
    min_enclosing_ball,
)
from .isometry_nets import Isometry

PROJECTION_TOL = 1e-9
PROJECTION_SWEEP_CAP = 10_000
_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class VolumeEstimate:
    mean: float
    ci_low: float
    ci_high: float
    samples: int

    def __post_init__(self):
        if not (self.ci_low <= self.mean + 1e-15 and self.mean <= self.ci_high + 1e-15):
            raise ValueError("confidence interval must contain the mean")

    def to_json_dict(self) -> dict:
        return {
            "mean": self.mean,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "samples": self.samples,
        }


def _wilson_interval(hits: int, samples: int) -> tuple[float, float]:
    # degenerate rates cannot vary under resampling of the same oracle
    if hits == 0:
        return 0.0, 0.0
    if hits == samples:
        return 1.0, 1.0
    z = _WILSON_Z
    phat = hits / samples
    denom = 1.0 + z * z / samples
    center = (phat + z * z / (2.0 * samples)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / samples + z * z / (4.0 * samples * samples)) / denom
    return max(0.0, center - half), min(1.0, center + half)


class Body:
    """Base membership oracle. Subclasses must set dim, bound, exact_volume
    and implement contains_many / project / to_json_dict."""

    kind = "abstract"
    dim: int
    bound: Ball
    exact_volume: float | None = None

    def contains(self, p) -> bool:
        v = as_vector(p)
        if v.size != self.dim:
            raise ValueError(f"dimension mismatch: body dim {self.dim}, point dim {v.size}")
        return bool(self.contains_many(v.reshape(1, -1))[0])

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance_many(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.dim)
        return np.linalg.norm(pts - self.project(pts), axis=1)

    def to_json_dict(self) -> dict:
        raise NotImplementedError


class BallBody(Body):
    kind = "ball"

    def __init__(self, center, radius: float):
        ball = Ball(center, radius)
        self.dim = ball.dim
        self.bound = ball
        self.ball = ball
        self.exact_volume = math.exp(ball_volume_log(self.dim, radius)) if radius > 0 else 0.0

    def contains_many(self, points):
        pts = as_points(points, self.dim)
        return np.linalg.norm(pts - self.ball.center, axis=1) <= self.ball.radius

    def project(self, points):
        pts = as_points(points, self.dim)
        rel = pts - self.ball.center
        norms = np.linalg.norm(rel, axis=1)
        scale = np.ones_like(norms)
        outside = norms > self.ball.radius
        scale[outside] = self.ball.radius / norms[outside]
        return self.ball.center + rel * scale[:, None]

    def to_json_dict(self):
        return {"dim": self.dim, "kind": "ball", "ball": self.ball.to_json_dict()}


def _dykstra(points: np.ndarray, projectors: list, tol: float = PROJECTION_TOL,
             sweep_cap: int = PROJECTION_SWEEP_CAP) -> np.ndarray:
    """Batch Dykstra projection onto an intersection of convex sets."""
    x = points.copy()
    increments = [np.zeros_like(points) for _ in projectors]
    for _ in range(sweep_cap):
        move = 0.0
        for i, proj in enumerate(projectors):
            y = proj(x + increments[i])
            increments[i] = x + increments[i] - y
            move = max(move, float(np.abs(y - x).max(initial=0.0)))
            x = y
        if move <= tol:
            return x
    warnings.warn("Dykstra projection hit the sweep cap without converging "
                  f"to tolerance {tol}", RuntimeWarning)
    return x


class HalfspaceIntersectionBody(Body):
    """Intersection of halfspaces {x : normal . x <= offset}; a bounding
    ball must be supplied since the intersection itself may be unbounded."""

    kind = "halfspaces"

    def __init__(self, normals, offsets, bound: Ball, exact_volume: float | None = None):
        normals = as_points(normals)
        offsets = np.asarray(offsets, dtype=float).reshape(-1)
        if normals.shape[0] != offsets.size:
            raise ValueError("one offset per normal required")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms < 1e-15):
            raise ValueError("halfspace normals must be nonzero")
        self.normals = normals / norms[:, None]
        self.offsets = offsets / norms
        self.dim = normals.shape[1]
        if bound.dim != self.dim:
            raise ValueError("bound dimension mismatch")
        self.bound = bound
        self.exact_volume = exact_volume

    def contains_many(self, points):
        pts = as_points(points, self.dim)
        return np.all(pts @ self.normals.T <= self.offsets + 1e-12, axis=1)

    def project(self, points):
        pts = as_points(points, self.dim)

        def make(i):
            a = self.normals[i]
            b = self.offsets[i]

            def proj(x):
                excess = np.maximum(x @ a - b, 0.0)
                return x - excess[:, None] * a

            return proj

        return _dykstra(pts, [make(i) for i in range(len(self.offsets))])

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "kind": "halfspaces",
            "halfspaces": [
                {"normal": n.tolist(), "offset": float(b)}
                for n, b in zip(self.normals, self.offsets)
            ],
            "bound": self.bound.to_json_dict(),
            "exact_volume": self.exact_volume,
        }


class BallIntersectionBody(Body):
    kind = "ball_intersection"

    def __init__(self, balls: list[Ball]):
        if not balls:
            raise ValueError("ball intersection needs at least one ball")
        dims = {b.dim for b in balls}
        if len(dims) != 1:
            raise ValueError("all balls must share one dimension")
        self.balls = list(balls)
        self.dim = balls[0].dim
        self.bound = min(balls, key=lambda b: b.radius)

    def contains_many(self, points):
        pts = as_points(points, self.dim)
        ok = np.ones(len(pts), dtype=bool)
        for b in self.balls:
            ok &= np.linalg.norm(pts - b.center, axis=1) <= b.radius
        return ok

    def project(self, points):
        pts = as_points(points, self.dim)

        def make(ball):
            def proj(x):
                rel = x - ball.center
                norms = np.linalg.norm(rel, axis=1)
                scale = np.ones_like(norms)
                outside = norms > ball.radius
                scale[outside] = ball.radius / norms[outside]
                return ball.center + rel * scale[:, None]

            return proj

        return _dykstra(pts, [make(b) for b in self.balls])

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "kind": "ball_intersection",
            "balls": [b.to_json_dict() for b in self.balls],
        }


class ThickenedBody(Body):
    kind = "thickened"

    def __init__(self, base: Body, eps: float):
        if eps < 0:
            raise ValueError("thickening amount must be nonnegative")
        self.base = base
        self.eps = float(eps)
        self.dim = base.dim
        self.bound = Ball(base.bound.center, base.bound.radius + eps)

    def contains_many(self, points):
        pts = as_points(points, self.dim)
        return self.base.distance_many(pts) <= self.eps + PROJECTION_TOL

    def project(self, points):
        pts = as_points(points, self.dim)
        onto_base = self.base.project(pts)
        rel = pts - onto_base
        norms = np.linalg.norm(rel, axis=1)
        step = np.minimum(norms, self.eps)
        safe = norms > 1e-300
        out = onto_base.copy()
        out[safe] += rel[safe] * (step[safe] / norms[safe])[:, None]
        return out

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "kind": "thickened",
            "base": self.base.to_json_dict(),
            "eps": self.eps,
        }


class TransformedBody(Body):
    kind = "transformed"

    def __init__(self, base: Body, isometry: Isometry):
        if isometry.dim != base.dim:
            raise ValueError("isometry dimension mismatch")
        self.base = base
        self.isometry = isometry
        self.dim = base.dim
        self.bound = Ball(isometry.apply(base.bound.center.reshape(1, -1))[0],
                          base.bound.radius)
        self.exact_volume = base.exact_volume

    def contains_many(self, points):
        pts = as_points(points, self.dim)
        return self.base.contains_many(self.isometry.inverse().apply(pts))

    def project(self, points):
        pts = as_points(points, self.dim)
        back = self.isometry.inverse().apply(pts)
        return self.isometry.apply(self.base.project(back))

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "kind": "transformed",
            "base": self.base.to_json_dict(),
            "isometry": self.isometry.to_json_dict(),
        }


class UnionBody(Body):
    kind = "union"

    def __init__(self, parts: list[Body]):
        if not parts:
            raise ValueError("union needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValueError("all parts must share one dimension")
        self.parts = list(parts)
        self.dim = parts[0].dim
        centers = PointSet.from_array(np.array([p.bound.center for p in parts]))
        hub = min_enclosing_ball(centers).center if len(parts) > 1 else parts[0].bound.center
        radius = max(
            float(np.linalg.norm(hub - p.bound.center)) + p.bound.radius for p in parts
        )
        self.bound = Ball(hub, radius)

    def contains_many(self, points):
        pts = as_points(points, self.dim)
        ok = np.zeros(len(pts), dtype=bool)
        for p in self.parts:
            ok |= p.contains_many(pts)
        return ok

    def project(self, points):
        pts = as_points(points, self.dim)
        best = self.parts[0].project(pts)
        best_d = np.linalg.norm(pts - best, axis=1)
        for p in self.parts[1:]:
            cand = p.project(pts)
            d = np.linalg.norm(pts - cand, axis=1)
            closer = d < best_d
            best[closer] = cand[closer]
            best_d[closer] = d[closer]
        return best

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "kind": "union",
            "parts": [p.to_json_dict() for p in self.parts],
        }


def thicken(b: Body, eps: float) -> Body:
    """Minkowski sum with eps * B_n. Balls stay balls; stacked thickenings
    add their amounts."""
    if eps < 0:
        raise ValueError("thickening amount must be nonnegative")
    if eps == 0:
        return b
    if isinstance(b, BallBody):
        return BallBody(b.ball.center, b.ball.radius + eps)
    if isinstance(b, ThickenedBody):
        return ThickenedBody(b.base, b.eps + eps)
    return ThickenedBody(b, eps)


def transform(b: Body, g: Isometry) -> Body:
    """Isometric image: membership(result, p) = membership(b, g^-1 p)."""
    if g.dim != b.dim:
        raise ValueError("isometry dimension mismatch")
    if isinstance(b, BallBody):
        return BallBody(g.apply(b.ball.center.reshape(1, -1))[0], b.ball.radius)
    if isinstance(b, TransformedBody):
        # compose rather than nest, avoiding drift under long chains
        return TransformedBody(b.base, g.compose(b.isometry))
    return TransformedBody(b, g)


def reduce_to_ball(b: Body) -> Ball | None:
    """Collapse transformed/thickened balls to a plain ball when possible;
    None when the body is not exactly a ball."""
    if isinstance(b, BallBody):
        return b.ball
    if isinstance(b, ThickenedBody):
        inner = reduce_to_ball(b.base)
        if inner is not None:
            return Ball(inner.center, inner.radius + b.eps)
        return None
    if isinstance(b, TransformedBody):
        inner = reduce_to_ball(b.base)
        if inner is not None:
            return Ball(b.isometry.apply(inner.center.reshape(1, -1))[0], inner.radius)
        return None
    return None


def mc_volume(b: Body, samples: int, rng: RngStream) -> VolumeEstimate:
    """Monte Carlo volume: hit rate inside the bounding ball scaled by the
    exact bounding-ball volume, with a Wilson 95% interval on the rate."""
    if samples < 100:
        raise ValueError("at least 100 samples required")
    if b.bound.radius <= 0:
        raise ValueError("degenerate bounding ball (radius 0)")
    from .geom_core import sample_uniform_ball

    pts = sample_uniform_ball(b.dim, b.bound.radius, samples, rng).points + b.bound.center
    hits = int(np.count_nonzero(b.contains_many(pts)))
    vol_bound = math.exp(ball_volume_log(b.dim, b.bound.radius))
    lo, hi = _wilson_interval(hits, samples)
    return VolumeEstimate(
        mean=vol_bound * hits / samples,
        ci_low=vol_bound * lo,
        ci_high=vol_bound * hi,
        samples=samples,
    )


def mc_overlap_fraction(b: Body, window: Ball, samples: int, rng: RngStream) -> VolumeEstimate:
    """Estimate Vol(b intersect window) / Vol(window) by uniform sampling
    in the window."""
    if samples < 100:
        raise ValueError("at least 100 samples required")
    if window.radius <= 0:
        raise ValueError("degenerate window (radius 0)")
    if window.dim != b.dim:
        raise ValueError("window dimension mismatch")
    from .geom_core import sample_uniform_ball

    pts = sample_uniform_ball(b.dim, window.radius, samples, rng).points + window.center
    hits = int(np.count_nonzero(b.contains_many(pts)))
    lo, hi = _wilson_interval(hits, samples)
    return VolumeEstimate(mean=hits / samples, ci_low=lo, ci_high=hi, samples=samples)


def probe_points(b: Body, count: int, rng: RngStream) -> np.ndarray:
    """Points of the body obtained by projecting bounding-ball samples onto
    it; includes extremal points with high probability for convex bodies."""
    from .geom_core import sample_uniform_ball

    raw = sample_uniform_ball(b.dim, b.bound.radius, count, rng).points + b.bound.center
    return b.project(raw)


def body_from_json_dict(d: dict) -> Body:
    kind = d["kind"]
    if kind == "ball":
        ball = Ball.from_json_dict(d["ball"])
        return BallBody(ball.center, ball.radius)
    if kind == "halfspaces":
        normals = [h["normal"] for h in d["halfspaces"]]
        offsets = [h["offset"] for h in d["halfspaces"]]
        return HalfspaceIntersectionBody(
            normals, offsets, Ball.from_json_dict(d["bound"]),
            exact_volume=d.get("exact_volume"),
        )
    if kind == "ball_intersection":
        return BallIntersectionBody([Ball.from_json_dict(x) for x in d["balls"]])
    if kind == "thickened":
        return ThickenedBody(body_from_json_dict(d["base"]), float(d["eps"]))
    if kind == "transformed":
        return TransformedBody(
            body_from_json_dict(d["base"]), Isometry.from_json_dict(d["isometry"])
        )
    if kind == "union":
        return UnionBody([body_from_json_dict(x) for x in d["parts"]])
    raise ValueError(f"unknown body kind: {kind}")

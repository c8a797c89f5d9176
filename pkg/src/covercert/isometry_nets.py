"""Finite nets over rigid motions: orthogonal-group nets with coverage
certificates, translation grids, and product cover families.

Distances: rotations are compared in the operator norm; full isometries in
the conservative surrogate  d(f, g) = |A - B|_op + |v - w|.  For n <= 3 the
operator distance between same-determinant orthogonal matrices reduces to
an exact trace formula; opposite determinant classes are always at operator
distance >= 2, so nets cover each class separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom_core import Ball, RngStream, as_points, as_vector, sample_uniform_ball

ORTHOGONALITY_TOL = 1e-10
DET_TOL = 1e-8
COVER_SLACK = 1e-9  # float slack when comparing distances against delta
MAX_NET_DIM = 6


def _check_orthogonal(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square")
    n = m.shape[0]
    if np.abs(m.T @ m - np.eye(n)).max() > ORTHOGONALITY_TOL:
        raise ValueError(f"{name} is not orthogonal within {ORTHOGONALITY_TOL}")
    if abs(abs(float(np.linalg.det(m))) - 1.0) > DET_TOL:
        raise ValueError(f"{name} determinant is not +-1 within {DET_TOL}")
    return m


@dataclass(frozen=True)
class Isometry:
    """Rigid motion x -> matrix @ x + translation."""

    matrix: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        m = _check_orthogonal(self.matrix, "isometry matrix")
        v = as_vector(self.translation)
        if v.size != m.shape[0]:
            raise ValueError("translation dimension mismatch")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", v)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def identity(n: int) -> "Isometry":
        return Isometry(np.eye(n), np.zeros(n))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.dim)
        return pts @ self.matrix.T + self.translation

    def inverse(self) -> "Isometry":
        return Isometry(self.matrix.T, -(self.matrix.T @ self.translation))

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: x -> self(other(x))."""
        return Isometry(self.matrix @ other.matrix,
                        self.matrix @ other.translation + self.translation)

    def to_json_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "translation": self.translation.tolist()}

    @staticmethod
    def from_json_dict(d: dict) -> "Isometry":
        return Isometry(np.asarray(d["matrix"], dtype=float),
                        np.asarray(d["translation"], dtype=float))


def op_norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest singular value of a - b for orthogonal a, b."""
    a = _check_orthogonal(a, "first matrix")
    b = _check_orthogonal(b, "second matrix")
    if a.shape != b.shape:
        raise ValueError("matrix shape mismatch")
    return float(np.linalg.svd(a - b, compute_uv=False)[0])


def iso_distance_surrogate(f: Isometry, g: Isometry) -> float:
    """|A - B|_op + |v - w|; upper-bounds sup |f(x) - g(x)| over the unit ball."""
    if f.dim != g.dim:
        raise ValueError("isometry dimension mismatch")
    return op_norm_distance(f.matrix, g.matrix) + float(
        np.linalg.norm(f.translation - g.translation)
    )


@dataclass
class IsometryNet:
    dim: int
    delta: float
    elements: list[Isometry]
    certificate: dict

    def __len__(self) -> int:
        return len(self.elements)

    def matrices(self) -> np.ndarray:
        return np.stack([e.matrix for e in self.elements])

    def translations(self) -> np.ndarray:
        return np.stack([e.translation for e in self.elements])

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "delta": self.delta,
            "elements": [e.to_json_dict() for e in self.elements],
            "certificate": self.certificate,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "IsometryNet":
        return IsometryNet(
            dim=int(d["dim"]),
            delta=float(d["delta"]),
            elements=[Isometry.from_json_dict(e) for e in d["elements"]],
            certificate=dict(d["certificate"]),
        )


def haar_orthogonal(n: int, gen: np.random.Generator, count: int | None = None):
    """Haar-distributed orthogonal matrices: QR of a Gaussian matrix with the
    R-diagonal sign correction; hits both determinant classes."""
    m = 1 if count is None else int(count)
    g = gen.standard_normal((m, n, n))
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1).copy()
    signs = np.where(diag >= 0, 1.0, -1.0)
    q = q * signs[:, None, :]
    if count is None:
        return q[0]
    return q


def _rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _rot_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def min_distance_to_net(mats: np.ndarray, net_mats: np.ndarray,
                        chunk: int = 2048) -> np.ndarray:
    """Operator-norm distance from each matrix to the nearest net element.

    Same-determinant pairs only (opposite classes are at distance >= 2, so
    they contribute 2.0). Exact trace formula for n <= 3; Frobenius
    prefilter plus batched SVD refinement for n >= 4.
    """
    mats = np.asarray(mats, dtype=float)
    net_mats = np.asarray(net_mats, dtype=float)
    b, n, _ = mats.shape
    det_p = np.linalg.det(mats) > 0
    det_e = np.linalg.det(net_mats) > 0
    out = np.full(b, 2.0)
    flat_e = net_mats.reshape(len(net_mats), n * n)
    for coset in (True, False):
        rows = np.flatnonzero(det_p == coset)
        cols = np.flatnonzero(det_e == coset)
        if rows.size == 0 or cols.size == 0:
            continue
        fe = flat_e[cols]
        for start in range(0, rows.size, chunk):
            idx = rows[start:start + chunk]
            fp = mats[idx].reshape(len(idx), n * n)
            gram = fp @ fe.T  # <A, E> Frobenius inner products
            if n == 1:
                out[idx] = 0.0  # same coset in O(1) means equal matrices
            elif n <= 3:
                # |A - E|_op = sqrt(n - <A, E>) for proper/improper pairs
                best = gram.max(axis=1)
                out[idx] = np.sqrt(np.maximum(0.0, n - best))
            else:
                frob2 = np.maximum(0.0, 2.0 * n - 2.0 * gram)
                # op <= frob, op >= frob / sqrt(n): candidates in between
                quick = np.sqrt(frob2.min(axis=1))
                for local, row in enumerate(idx):
                    cand = np.flatnonzero(frob2[local] <= n * min(4.0, quick[local] ** 2) + 1e-12)
                    diffs = mats[row][None] - net_mats[cols[cand]]
                    svs = np.linalg.svd(diffs, compute_uv=False)[:, 0]
                    out[row] = float(svs.min())
    return out


def audit_orthogonal_net(net: IsometryNet, probes: int, rng: RngStream) -> dict:
    """Probabilistic coverage certificate: random orthogonal probes must all
    lie within net.delta of some element."""
    gen = rng.generator()
    mats = haar_orthogonal(net.dim, gen, probes)
    dists = min_distance_to_net(mats, net.matrices())
    failures = int(np.count_nonzero(dists > net.delta + COVER_SLACK))
    return {
        "probes": int(probes),
        "failures": failures,
        "max_min_dist": float(dists.max()) if probes else 0.0,
        "delta": net.delta,
        "pass": failures == 0,
    }


def build_orthogonal_net(n: int, delta: float, rng: RngStream | None = None,
                         trials: int = 2000) -> IsometryNet:
    """Net over O(n) with covering radius <= delta in the operator norm.

    n = 1: exact two-element group. n = 2: angle grids on each determinant
    class (spacing 2 arcsin(delta/2)). n = 3: ZYZ Euler grid with a
    deterministic triangle-inequality certificate, mirrored onto the
    improper class. n in {4, 5, 6}: greedy farthest-point packing over Haar
    samples with a probabilistic certificate (`trials` consecutive covered
    probes).
    """
    if int(n) != n or not 1 <= n <= MAX_NET_DIM:
        raise ValueError(f"orthogonal nets support dimensions 1..{MAX_NET_DIM}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = int(n)

    def iso(m):
        return Isometry(m, np.zeros(n))

    if n == 1:
        elements = [iso(np.array([[1.0]])), iso(np.array([[-1.0]]))]
        cert = {"kind": "exact", "covering_radius": 0.0}
        return IsometryNet(1, float(delta), elements, cert)

    if n == 2:
        theta = 2.0 * math.asin(min(delta, 2.0) / 2.0)
        count = int(math.ceil(2.0 * math.pi / theta))
        reflector = np.diag([1.0, -1.0])
        elements = []
        for j in range(count):
            r = _rotation_2d(2.0 * math.pi * j / count)
            elements.append(iso(r))
        for j in range(count):
            r = _rotation_2d(2.0 * math.pi * j / count)
            elements.append(iso(r @ reflector))
        cert = {
            "kind": "grid",
            "covering_radius": 2.0 * math.sin(math.pi / count),
            "spacing": theta,
            "per_class": count,
        }
        return IsometryNet(2, float(delta), elements, cert)

    if n == 3:
        # three Euler factors; each contributes chord 2 sin(spacing/4), so
        # spacing = 4 arcsin(delta/6) certifies total coverage <= delta
        s = 4.0 * math.asin(min(delta, 6.0) / 6.0)
        n_phi = int(math.ceil(2.0 * math.pi / s))
        n_theta = int(math.ceil(math.pi / s)) + 1
        n_psi = int(math.ceil(2.0 * math.pi / s))
        reflector = np.diag([1.0, 1.0, -1.0])
        rotations = []
        for i in range(n_phi):
            rz1 = _rot_z(2.0 * math.pi * i / n_phi)
            for j in range(n_theta):
                ry = _rot_y(min(j * s, math.pi))
                left = rz1 @ ry
                for k in range(n_psi):
                    rotations.append(left @ _rot_z(2.0 * math.pi * k / n_psi))
        elements = [iso(r) for r in rotations]
        elements += [iso(r @ reflector) for r in rotations]
        cert = {
            "kind": "grid",
            "covering_radius": 6.0 * math.sin(s / 4.0),
            "spacing": s,
            "per_class": len(rotations),
        }
        return IsometryNet(3, float(delta), elements, cert)

    if rng is None:
        raise ValueError("dimensions 4..6 use randomized construction; rng required")
    gen = rng.generator()
    mats = [np.eye(n), np.diag([1.0] * (n - 1) + [-1.0])]
    batch = 256
    # greedy farthest-point: repeatedly add the worst-covered sample
    while True:
        sample = haar_orthogonal(n, gen, batch)
        dists = min_distance_to_net(sample, np.stack(mats))
        worst = int(np.argmax(dists))
        if dists[worst] <= delta + COVER_SLACK:
            break
        order = np.argsort(-dists)
        for idx in order:
            if dists[idx] > delta + COVER_SLACK:
                d_new = min_distance_to_net(sample[idx:idx + 1], np.stack(mats))[0]
                if d_new > delta + COVER_SLACK:
                    mats.append(sample[idx])
    # certification: `trials` fresh probes in a row must be covered
    covered_in_a_row = 0
    while covered_in_a_row < trials:
        take = min(512, trials - covered_in_a_row)
        sample = haar_orthogonal(n, gen, take)
        dists = min_distance_to_net(sample, np.stack(mats))
        bad = np.flatnonzero(dists > delta + COVER_SLACK)
        if bad.size:
            for idx in bad:
                if min_distance_to_net(sample[idx:idx + 1], np.stack(mats))[0] > delta + COVER_SLACK:
                    mats.append(sample[idx])
            covered_in_a_row = 0
        else:
            covered_in_a_row += take
    elements = [iso(m) for m in mats]
    cert = {"kind": "probabilistic", "trials": int(trials), "failures": 0}
    return IsometryNet(n, float(delta), elements, cert)


def build_translation_cover(v_ball: Ball, rho: float) -> np.ndarray:
    """Centers of a cubic grid of pitch 2 rho / sqrt(n), clipped to the ball
    inflated by rho; every point of the ball is within rho of a center."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    n = v_ball.dim
    if v_ball.radius <= rho:
        return v_ball.center.reshape(1, n).copy()
    pitch = 2.0 * rho / math.sqrt(n)
    reach = v_ball.radius + rho
    k = int(math.ceil(reach / pitch))
    axis = pitch * np.arange(-k, k + 1)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    grid = grid + v_ball.center
    keep = np.linalg.norm(grid - v_ball.center, axis=1) <= reach + 1e-12
    return grid[keep]


def _size_bound_log(n: int, d_bound: float, eps: float, translation_count: int) -> float:
    """log of 2 * N_translations * (500 D / eps)^(n(n-1)/2)."""
    return (
        math.log(2.0)
        + math.log(translation_count)
        + 0.5 * n * (n - 1) * math.log(500.0 * d_bound / eps)
    )


def build_cover_family(k_body, d_bound: float, v_ball: Ball, eps: float,
                       rng: RngStream | None = None, trials: int = 2000) -> IsometryNet:
    """Finite family T of isometries such that any placement A K + v with
    v in the translation window lies inside g(thicken(K, eps)) for some
    g in T.

    Components: an (eps / 2D)-net over the orthogonal group and a
    translation grid of covering radius eps / (2 max(D, 1)) over the window.
    For any f = (A, v), its nearest g = (A', v') satisfies, for x in K
    (which lies in D B_n since K contains the origin and diam(K) <= D):
    |f(x) - g(x)| <= D |A - A'|_op + |v - v'| <= eps/2 + eps/2.
    Rotation-invariant bodies (balls centered at the origin) only need the
    identity rotation.
    """
    from . import bodies as _bodies

    if eps <= 0:
        raise ValueError("eps must be positive")
    if d_bound <= 0:
        raise ValueError("diameter bound must be positive")
    n = k_body.dim
    if v_ball.dim != n:
        raise ValueError("translation window dimension mismatch")
    if not k_body.contains(np.zeros(n)):
        raise ValueError("body must contain the origin")

    delta = eps / (2.0 * d_bound)
    ball_form = _bodies.reduce_to_ball(k_body)
    if ball_form is not None and float(np.linalg.norm(ball_form.center)) <= 1e-12:
        rotations = [Isometry.identity(n)]
        rot_cert = {"kind": "symmetry", "covering_radius": 0.0,
                    "note": "origin-centered ball is rotation invariant"}
    else:
        rot_net = build_orthogonal_net(n, delta, rng=rng, trials=trials)
        rotations = rot_net.elements
        rot_cert = rot_net.certificate

    rho = eps / (2.0 * max(d_bound, 1.0))
    translations = build_translation_cover(v_ball, rho)

    elements = [
        Isometry(r.matrix, t) for r in rotations for t in translations
    ]
    size = len(elements)
    cert = {
        "kind": "product-grid",
        "rotation_certificate": rot_cert,
        "rotation_count": len(rotations),
        "translation_count": int(len(translations)),
        "translation_radius": rho,
        "orthogonal_delta": delta,
        "guarantee_eps": eps,
        "diameter_bound": d_bound,
        "window": v_ball.to_json_dict(),
        "size": size,
        "size_bound_log": _size_bound_log(n, d_bound, eps, len(translations)),
    }
    return IsometryNet(n, delta + rho, elements, cert)


def audit_cover_family(t_net: IsometryNet, k_body, v_ball: Ball, eps: float,
                       trials: int, rng: RngStream,
                       probes_per_trial: int = 16,
                       candidates: int = 32) -> dict:
    """Randomized check of the covering guarantee: sample placements
    (A, v), probe points of A K + v, and require some g in T whose
    eps-thickening of K contains every probe.

    Candidates are ranked by a Frobenius-plus-translation proxy; a failed
    shortlist falls back to an exhaustive scan, so reported failures are
    real, not search artifacts.
    """
    from . import bodies as _bodies

    if trials < 1:
        raise ValueError("at least one trial required")
    thickened = _bodies.thicken(k_body, eps)
    gen = rng.generator()
    net_mats = t_net.matrices().reshape(len(t_net), -1)
    net_trans = t_net.translations()
    failures = 0
    failure_examples = []
    base_probes = _bodies.probe_points(k_body, probes_per_trial, rng.child(0))
    for trial in range(trials):
        a = haar_orthogonal(k_body.dim, gen)
        # uniform translation in the window
        sub = rng.child(trial + 1)
        if v_ball.radius > 0:
            v = sample_uniform_ball(k_body.dim, v_ball.radius, 1, sub).points[0] \
                + v_ball.center
        else:
            v = v_ball.center.copy()
        placed = base_probes @ a.T + v
        proxy = np.linalg.norm(net_mats - a.reshape(1, -1), axis=1) + \
            np.linalg.norm(net_trans - v, axis=1)
        order = np.argsort(proxy)
        shortlist = order[:candidates]
        found = False
        for j in shortlist:
            g = t_net.elements[int(j)]
            if np.all(thickened.contains_many(g.inverse().apply(placed))):
                found = True
                break
        if not found:
            for j in order[candidates:]:
                g = t_net.elements[int(j)]
                if np.all(thickened.contains_many(g.inverse().apply(placed))):
                    found = True
                    break
        if not found:
            failures += 1
            if len(failure_examples) < 5:
                failure_examples.append({
                    "trial": trial,
                    "matrix": a.tolist(),
                    "translation": v.tolist(),
                })
    return {
        "trials": int(trials),
        "failures": failures,
        "failure_examples": failure_examples,
        "pass": failures == 0,
    }

"""Command-line front end: reproducible bound sweeps, Jung-radius spot
checks, invariant audit suites, and the end-to-end non-cover witness
pipeline with self-contained certificates.

Every randomized command takes a mandatory --seed and is a deterministic
function of (arguments, seed); rerunning reproduces output files byte for
byte (output paths are excluded from the echoed configuration for exactly
this reason). Probabilistic pipeline steps only inform diagnostics; a
witness verdict rests solely on directly checked facts: the diameter of X
and the per-member containment counts.

Exit codes: 0 success / verdict true, 1 audit failure / verdict false,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import bounds as _bounds
from .bodies import BallBody, HalfspaceIntersectionBody, body_from_json_dict, thicken, transform
from .coclique import (
    CocliqueParams,
    build_coclique,
    check_hypotheses,
    edge_measure_audit,
    family_counts,
    family_membership_matrix,
    geometric_spec,
)
from .geom_core import (
    Ball,
    PointSet,
    RngStream,
    cap_measure_bounds,
    cap_measure_exact,
    diameter,
    jung_radius,
    min_enclosing_ball,
    regular_simplex,
    sample_uniform_ball,
    uniform_ball_points,
)
from .isometry_nets import IsometryNet, audit_cover_family, build_cover_family

SCHEMA_VERSION = 1
ENUMERATION_CAP = 1_000_000  # k-subsets enumerated exhaustively below this


@dataclass(frozen=True)
class RunConfig:
    """Echo of the arguments that determine a command's output. Output
    paths are deliberately not part of the record."""

    command: str
    seed: int | None
    params: dict

    def to_json_dict(self) -> dict:
        return {"command": self.command, "seed": self.seed,
                "params": dict(self.params)}


def _jsonable(x):
    """Recursively convert numpy scalars/arrays so json.dumps never sees a
    non-primitive."""
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def render_json(obj: dict) -> str:
    """Canonical JSON: sorted keys, compact separators, one trailing
    newline — the byte-identical replay contract."""
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":")) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# bounds


_SWEEP_COLUMNS = ["n", "r_n", "bound_log", "borsuk_log", "eps_log",
                  "diam_bound_log", "family_margin_log"]


def render_sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_bounds(args) -> int:
    if args.sweep is not None:
        lo, hi = args.sweep
        if lo < 2 or hi < lo:
            raise ValueError("sweep range must satisfy 2 <= start <= stop")
        _emit(render_sweep_csv(_bounds.sweep_rows(range(lo, hi + 1))), args.out)
        return 0
    if args.n is None:
        raise ValueError("either --n or --sweep is required")
    n = args.n
    config = RunConfig("bounds", None, {"n": n, "lam": args.lam,
                                        "r": args.r, "alpha": args.alpha})
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_json_dict(),
        "theorem_lower_bound_log": _bounds.theorem_lower_bound(n),
        "borsuk": _bounds.borsuk_report(n),
        "pipeline": _bounds.proof_pipeline_budget(n).to_json_dict(),
        "thickening": _bounds.thickening_budget(n)._asdict(),
        "constant_width": _bounds.constant_width_geometry()._asdict(),
    }
    if args.lam is not None:
        report["choose_alpha"] = _bounds.choose_alpha(n, args.lam).to_json_dict()
    if args.r is not None:
        alpha = args.alpha
        if alpha is None and args.lam is not None:
            alpha = report["choose_alpha"]["alpha"]
        if alpha is None:
            raise ValueError("main inequality needs --alpha or --lam besides --r")
        report["main_inequality"] = _bounds.main_inequality(n, args.r, alpha).to_json_dict()
    _emit(render_json(report), args.out)
    return 0


# ---------------------------------------------------------------------------
# jung-check


def cmd_jung_check(args) -> int:
    n = args.n
    if not 1 <= n <= 10:
        raise ValueError("jung-check is desk-scale: 1 <= n <= 10")
    if args.cloud_size < 2:
        raise ValueError("clouds need at least two points")
    rng = RngStream(args.seed, 0)
    r_n = jung_radius(n)
    solver_tol = min(1e-8, args.tol / 10.0)

    simplex = regular_simplex(n)
    simplex_ball = min_enclosing_ball(simplex, tol=solver_tol)
    simplex_ok = abs(simplex_ball.radius - r_n) <= args.tol

    max_radius = 0.0
    for trial in range(args.samples):
        pts = sample_uniform_ball(n, 1.0, args.cloud_size, rng.child(trial)).points
        d = diameter(PointSet(n, pts))
        if d <= 0.0:
            continue  # coincident cloud; nothing to normalize
        ball = min_enclosing_ball(PointSet(n, pts / d), tol=solver_tol)
        max_radius = max(max_radius, ball.radius)
    clouds_ok = max_radius <= r_n + args.tol

    config = RunConfig("jung-check", args.seed,
                       {"n": n, "samples": args.samples,
                        "cloud_size": args.cloud_size, "tol": args.tol})
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_json_dict(),
        "r_n": r_n,
        "simplex": {"radius": simplex_ball.radius, "ok": simplex_ok},
        "clouds": {"trials": args.samples, "max_radius": max_radius,
                   "ok": clouds_ok},
        "pass": simplex_ok and clouds_ok,
    }
    _emit(render_json(report), args.out)
    return 0 if report["pass"] else 1


# ---------------------------------------------------------------------------
# witness


def _default_alpha(r: float) -> float:
    """Largest cap angle keeping the edge threshold 2 r cos(alpha/2) at 1
    (so cocliques have diameter <= 1); a fixed interior angle when r <= 1/2
    already keeps the threshold below 1."""
    if r > 0.5:
        return 2.0 * math.acos(1.0 / (2.0 * r))
    return 1.0


def _non_coverage(counts: np.ndarray, k: int, x_size: int,
                  masks: np.ndarray | None) -> tuple[bool, str]:
    """Does every k-subset of the family fail to cover X?

    k = 1 reads off the counts. Small k-subset spaces are enumerated
    exhaustively on the membership matrix; above the enumeration cap, the
    sum of the k largest counts < |X| certificate is used (a union never
    covers more than the sum of its parts).
    """
    if x_size == 0:
        return False, "empty"
    counts = np.asarray(counts)
    if counts.size == 0:
        return True, "empty-family"
    if k == 1:
        return bool(np.all(counts < x_size)), "per-member-counts"
    if masks is not None and math.comb(counts.size, k) <= ENUMERATION_CAP:
        for combo in itertools.combinations(range(counts.size), k):
            if bool(np.all(np.any(masks[list(combo)], axis=0))):
                return False, "exhaustive-enumeration"
        return True, "exhaustive-enumeration"
    top = np.sort(counts)[-k:]
    return bool(int(top.sum()) < x_size), "count-sum"


def _witness_verdict(points: np.ndarray, counts: np.ndarray, threshold: float,
                     k: int, members: list) -> tuple[bool, float, str]:
    if points.shape[0] == 0:
        return False, 0.0, "empty"
    diam = diameter(PointSet(points.shape[1], points))
    masks = None
    if k > 1 and math.comb(len(members), k) <= ENUMERATION_CAP:
        masks = family_membership_matrix(members, points)
    uncovered, method = _non_coverage(counts, k, points.shape[0], masks)
    return bool(diam <= threshold) and uncovered, diam, method


def cmd_witness(args) -> int:
    if args.verify_cert:
        with open(args.verify_cert, encoding="utf-8") as fh:
            cert = json.load(fh)
        report = verify_witness_certificate(cert)
        _emit(render_json(report), args.out)
        return 0 if report["pass"] else 1

    n = args.n
    if n not in (2, 3):
        raise ValueError("witness search is desk-scale: n in {2, 3}")
    if args.body:
        with open(args.body, encoding="utf-8") as fh:
            base = body_from_json_dict(json.load(fh))
        if base.dim != n:
            raise ValueError("body dimension does not match --n")
    else:
        base = BallBody(np.zeros(n), args.ball_radius)
    r = args.r
    if r <= 0:
        raise ValueError("r must be positive")
    alpha = args.alpha if args.alpha is not None else _default_alpha(r)
    eps = args.eps
    if eps <= 0:
        raise ValueError("eps must be positive")

    rng = RngStream(args.seed, 0)
    config = RunConfig("witness", args.seed, {
        "n": n, "r": r, "alpha": alpha, "k": args.k, "eps": eps,
        "M": args.M, "p": args.p, "max_retries": args.max_retries,
        "samples": args.samples, "ball_radius": None if args.body else args.ball_radius,
        "body": args.body,
    })

    # (1) cover family over the translation window that any copy touching
    # r B_n can occupy: |g(0)| <= r + diam(K) + eps
    diam_bound = 2.0 * (float(np.linalg.norm(base.bound.center)) + base.bound.radius)
    window = Ball(np.zeros(n), r + diam_bound + eps)
    net = build_cover_family(base, diam_bound, window, eps, rng=rng.child(1))

    # (2) the family: thickened copies along the net
    members = [transform(thicken(base, eps), g) for g in net.elements]

    # (3) shared-sample estimate of the worst member measure on r B_n
    probe = uniform_ball_points(rng.child(2).generator(), n, r, args.samples)
    member_hits = family_counts(members, probe)
    nu_hat = member_hits / float(args.samples)
    p_hat_max = float(nu_hat.max()) if nu_hat.size else 0.0

    # (4) hypothesis report (diagnostic only; never gates the verdict)
    threshold = 2.0 * r * math.cos(alpha / 2.0)
    pair_gen = rng.child(3).generator()
    xs = uniform_ball_points(pair_gen, n, r, args.samples)
    ys = uniform_ball_points(pair_gen, n, r, args.samples)
    edge_hat = float(np.count_nonzero(
        np.linalg.norm(xs - ys, axis=1) >= threshold)) / args.samples
    params = CocliqueParams(M=args.M, k=args.k, p=args.p,
                            max_retries=args.max_retries)
    hypotheses = check_hypotheses(params, len(members), nu_hat, edge_hat)
    if not hypotheses["pass"]:
        warnings.warn("lemma hypotheses fail on measured estimates; "
                      "continuing — the verdict is decided by direct "
                      "verification", UserWarning)

    # (5) randomized coclique search, accepting on the certificate rule
    spec = geometric_spec(n, r, alpha, members, unit_diameter=True)

    def accept(points: np.ndarray, counts: np.ndarray) -> bool:
        verdict, _, _ = _witness_verdict(points, counts, threshold, args.k, members)
        return verdict

    result = build_coclique(spec, params, rng.child(4), accept=accept)

    # (6) certificate from directly checked facts
    verdict, diam_x, method = _witness_verdict(
        result.X.points, np.asarray(result.per_Y_counts), threshold, args.k, members)
    cert = {
        "schema_version": SCHEMA_VERSION,
        "kind": "witness-certificate",
        "config": config.to_json_dict(),
        "n": n,
        "k": args.k,
        "r": r,
        "alpha": alpha,
        "threshold": threshold,
        "family_manifest": {
            "base_body": base.to_json_dict(),
            "eps": eps,
            "net": net.to_json_dict(),
            "member_rule": "member = g(thicken(base_body, eps)) for g in net.elements",
        },
        "X": result.X.to_json_dict(),
        "diam_X": diam_x,
        "per_member_counts": list(result.per_Y_counts),
        "verdict": verdict,
        "non_coverage_method": method,
        "coclique": {
            "success": result.success,
            "retries_used": result.retries_used,
            "edges_found_per_attempt": result.edges_found_per_attempt,
            "rule": result.rule,
            "diagnostics": result.diagnostics,
        },
        "estimates": {
            "samples": args.samples,
            "p_hat_max": p_hat_max,
            "edge_measure_hat": edge_hat,
        },
        "hypotheses": hypotheses,
    }
    _emit(render_json(cert), args.out)
    return 0 if verdict else 1


def verify_witness_certificate(cert: dict) -> dict:
    """Recheck a certificate from its JSON alone: rebuild the family from
    the manifest, recompute the diameter and membership counts, and re-derive
    the verdict. No search is re-run."""
    checks = []
    n = int(cert["n"])
    k = int(cert["k"])
    threshold = float(cert["threshold"])
    X = PointSet.from_json_dict(cert["X"])
    manifest = cert["family_manifest"]
    base = body_from_json_dict(manifest["base_body"])
    eps = float(manifest["eps"])
    net = IsometryNet.from_json_dict(manifest["net"])
    members = [transform(thicken(base, eps), g) for g in net.elements]

    checks.append({"name": "dimensions",
                   "ok": X.dim == n and base.dim == n and net.dim == n})

    if len(X) > 0:
        diam = diameter(X)
        checks.append({"name": "diameter-recomputed",
                       "ok": abs(diam - float(cert["diam_X"])) <= 1e-12,
                       "recomputed": diam})
        checks.append({"name": "diameter-threshold",
                       "ok": diam <= threshold, "threshold": threshold})
    else:
        diam = 0.0
        checks.append({"name": "diameter-recomputed", "ok": True,
                       "recomputed": 0.0})
        checks.append({"name": "diameter-threshold", "ok": False,
                       "note": "empty witness"})

    counts = family_counts(members, X.points)
    stored = np.asarray(cert["per_member_counts"], dtype=int)
    checks.append({"name": "membership-counts",
                   "ok": counts.shape == stored.shape and bool(np.all(counts == stored))})

    masks = None
    if k > 1 and math.comb(len(members), k) <= ENUMERATION_CAP:
        masks = family_membership_matrix(members, X.points)
    uncovered, method = _non_coverage(counts, k, len(X), masks)
    checks.append({"name": "non-coverage", "ok": uncovered, "method": method,
                   "stored_method": cert["non_coverage_method"]})

    verdict = (len(X) > 0) and diam <= threshold and uncovered
    checks.append({"name": "verdict-matches",
                   "ok": verdict == bool(cert["verdict"]),
                   "recomputed": verdict})

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "witness-verification",
        "checks": checks,
        "verdict": verdict,
        "pass": all(c["ok"] for c in checks),
    }


# ---------------------------------------------------------------------------
# audit suites


def _suite_caps() -> dict:
    failures = []
    for n in (2, 3, 5, 8, 13, 21, 34, 55, 89):
        for alpha in np.linspace(0.1, math.pi / 2.0 - 0.1, 15):
            alpha = float(alpha)
            m = cap_measure_exact(n, alpha)
            lo, hi = cap_measure_bounds(n, alpha)
            if not lo < m < hi:
                failures.append({"n": n, "alpha": alpha, "lower": lo,
                                 "exact": m, "upper": hi})
            sym = cap_measure_exact(n, alpha) + cap_measure_exact(n, math.pi - alpha)
            if abs(sym - 1.0) > 1e-12:
                failures.append({"n": n, "alpha": alpha, "symmetry": sym})
    return {"suite": "caps", "failures": failures, "pass": not failures}


_CONE_GRID = [(math.pi / 6.0, 0.5), (math.pi / 6.0, 1.5),
              (math.pi / 3.0, 0.5), (math.pi / 3.0, 1.5),
              (1.3, 0.5), (1.3, 1.5)]


def _cone_spec(n: int, alpha: float, ell: float) -> _bounds.ConeSpec:
    axis = np.zeros(n)
    axis[-1] = 1.0
    return _bounds.ConeSpec(np.zeros(n), axis, alpha, ell)


def _suite_cone(rng: RngStream, probes: int, expect_fail: bool) -> dict:
    reports = []
    failures = []
    cell = 0
    for n in (2, 3):
        for alpha, ell in _CONE_GRID:
            cone = _cone_spec(n, alpha, ell)
            sub = rng.child(cell)
            cell += 1
            if expect_fail:
                rep = _bounds.cone_negative_control(n, cone, probes, sub)
                ok = rep["violations"] >= 1
            else:
                const = _bounds.cone_constants(alpha, ell)
                rep = _bounds.verify_cone_inclusion(n, cone, 0.5 * const.eps0,
                                                    probes, sub)
                ok = rep["pass"]
            reports.append(rep)
            if not ok:
                failures.append({"n": n, "alpha": alpha, "ell": ell,
                                 "violations": rep["violations"]})
    return {"suite": "cone", "fault_injection": expect_fail,
            "reports": reports, "failures": failures, "pass": not failures}


def _suite_sweep(rng: RngStream, trials: int) -> dict:
    rep = _bounds.verify_sweep_inequality(trials, rng.child(0))
    return {"suite": "sweep", "report": rep, "failures": rep["examples"],
            "pass": rep["pass"]}


def _suite_edges(rng: RngStream, trials: int) -> dict:
    reports = []
    failures = []
    idx = 0
    for n in (2, 3, 5):
        for alpha in (1.0, 1.3):
            rep = edge_measure_audit(n, alpha, trials, rng.child(idx), anchors=8)
            idx += 1
            reports.append(rep)
            if not rep["pass"]:
                failures.append({"n": n, "alpha": alpha})
    return {"suite": "edges", "reports": reports, "failures": failures,
            "pass": not failures}


def segment_body() -> HalfspaceIntersectionBody:
    """Unit segment on the x-axis as a degenerate halfspace intersection."""
    normals = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    offsets = [0.5, 0.5, 0.0, 0.0]
    return HalfspaceIntersectionBody(normals, offsets, Ball(np.zeros(2), 0.5))


def strip_rotations(net: IsometryNet) -> IsometryNet:
    """Fault injection for cover audits: drop every element whose matrix is
    not the identity, destroying rotational coverage."""
    eye = np.eye(net.dim)
    kept = [e for e in net.elements if np.allclose(e.matrix, eye, atol=1e-12)]
    cert = dict(net.certificate)
    cert["fault"] = "rotation net removed"
    return IsometryNet(net.dim, net.delta, kept, cert)


def _suite_cover(rng: RngStream, trials: int, expect_fail: bool) -> dict:
    body = segment_body()
    eps = 0.2
    window = Ball(np.zeros(2), 1.0)
    net = build_cover_family(body, 1.0, window, eps, rng=rng.child(1))
    if expect_fail:
        net = strip_rotations(net)
    rep = audit_cover_family(net, body, window, eps, trials, rng.child(2))
    ok = (rep["failures"] > 0) if expect_fail else rep["pass"]
    return {"suite": "cover", "fault_injection": expect_fail,
            "net_size": len(net), "report": rep,
            "failures": rep["failure_examples"] if not ok else [],
            "pass": ok}


def cmd_audit(args) -> int:
    rng = RngStream(args.seed, 0)
    suite = args.suite
    if args.expect_fail and suite not in ("cone", "cover"):
        raise ValueError(f"suite {suite!r} has no fault-injection mode")
    if suite == "caps":
        result = _suite_caps()
    elif suite == "cone":
        result = _suite_cone(rng, args.samples or 2000, args.expect_fail)
    elif suite == "sweep":
        result = _suite_sweep(rng, args.samples or 1000)
    elif suite == "edges":
        result = _suite_edges(rng, args.samples or 20000)
    else:
        result = _suite_cover(rng, args.samples or 200, args.expect_fail)
    config = RunConfig("audit", args.seed,
                       {"suite": suite, "samples": args.samples,
                        "expect_fail": args.expect_fail})
    out = {"schema_version": SCHEMA_VERSION, "config": config.to_json_dict()}
    out.update(result)
    _emit(render_json(out), args.out)
    return 0 if result["pass"] else 1


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covercert",
        description="Desk-scale constructions and verifiers for universal-"
                    "cover volume bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate the bound pipeline at one n "
                                      "or sweep a range to CSV")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sweep", type=int, nargs=2, metavar=("START", "STOP"),
                   default=None)
    p.add_argument("--lam", type=float, default=None,
                   help="cap-angle parameter lambda")
    p.add_argument("--r", type=float, default=None,
                   help="witness radius for the main inequality")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("witness", help="run the non-cover witness pipeline "
                                       "or verify a certificate")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, required=False, default=None)
    p.add_argument("--body", default=None, help="JSON body spec path")
    p.add_argument("--ball-radius", type=float, default=0.5)
    p.add_argument("--r", type=float, default=0.55)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--M", type=int, default=64)
    p.add_argument("--p", type=float, default=0.05)
    p.add_argument("--max-retries", type=int, default=64)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--verify-cert", default=None,
                   help="verify an existing certificate instead of searching")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("jung-check", help="stochastic audit of the "
                                          "enclosing-ball radius bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--cloud-size", type=int, default=16)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_jung_check)

    p = sub.add_parser("audit", help="run a named invariant suite")
    p.add_argument("--suite", required=True,
                   choices=["caps", "cone", "sweep", "edges", "cover"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--expect-fail", action="store_true",
                   help="run the suite's fault-injected variant and succeed "
                        "iff failures are detected")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "witness" and args.verify_cert is None and args.seed is None:
        print("error: witness search requires --seed", file=sys.stderr)
        return 2
    try:
        return int(args.func(args))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

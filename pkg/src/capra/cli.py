"""Command-line interface: ``capra <command> [options]``.

Every evaluation command prints one JSON document with the keys
``command``, ``inputs``, ``results``, ``residuals`` and ``version``.
Exit status: 0 on success, 1 when ``check`` finds a violation, 2 on
validation errors, 3 when a solver does not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bounds import l0_lower_bound
from .checks import run_checks
from .conjugacy import (PhiSpec, capra_biconjugate, capra_conjugate, subdiff_at_zero_contains,
                        subdiff_membership)
from .l0core import as_vector, l0
from .norms import (SourceNorm, TopNormGauge, coordinate_norm, coordinate_norm_result,
                    dual_coordinate_norm, norm_sequence, sparsity_from_grading)
from .solver import NonConvergenceError, SolverConfig, SolverError, gauge_bisection

SCHEMA_VERSION = "1"
DOC_KEYS = ("command", "inputs", "results", "residuals", "version")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class ValidationError(ValueError):
    pass


def _jsonable(v):
    """Replace non-finite floats by the ``"inf"`` / ``"-inf"`` tokens."""
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            raise ValidationError("result contains NaN")
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def parse_vector(text: str, where: str = "vector") -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{where}: not a JSON array ({exc.msg})") from None
    if not isinstance(data, list) or not data or not all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in data):
        raise ValidationError(f"{where}: expected a nonempty array of numbers")
    try:
        return as_vector(data)
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def read_vector_file(path: str) -> list:
    """One vector per CSV line; blank lines are skipped, bad lines are named."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    vectors, dim = [], None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            v = np.array([float(c) for c in row])
            v = as_vector(v)
        except ValueError:
            raise ValidationError(f"{path}: line {lineno}: malformed vector {','.join(row)!r}") from None
        if dim is not None and v.size != dim:
            raise ValidationError(f"{path}: line {lineno}: dimension {v.size}, expected {dim}")
        dim = v.size
        vectors.append(v)
    if not vectors:
        raise ValidationError(f"{path}: no vectors")
    return vectors


def _cfg(args) -> SolverConfig:
    return SolverConfig(max_iters=args.max_iters, tol=args.solver_tol, seed=args.seed)


def _phi(args, d):
    if args.phi is None:
        raise ValidationError("--phi is required for this command")
    try:
        return PhiSpec.parse(args.phi, d)
    except ValueError as exc:
        raise ValidationError(f"--phi: {exc}") from None


def _k(args, d, lo):
    if args.k is None:
        raise ValidationError("--k is required for this command")
    if not lo <= args.k <= d:
        raise ValidationError(f"--k must lie in {lo}..{d}")
    return args.k


def _eval_one(command, args, v, w=None):
    """Evaluate one vector; returns ``(results, residuals)``."""
    src = args.source
    d = v.size
    if command == "norm":
        k = _k(args, d, 1)
        if args.method == "solver":
            r = coordinate_norm_result(v, k, src, _cfg(args))
            return {"value": r.value}, {"lower": r.lower, "upper": r.upper, "ball": r.residual}
        return {"value": coordinate_norm(v, k, src)}, {}
    if command == "dual-norm":
        k = _k(args, d, 0)
        return {"value": dual_coordinate_norm(v, k, src)}, {}
    if command == "seq":
        seq = norm_sequence(v, src, y=w)
        return seq.to_json(), {}
    if command == "sparsity":
        if not np.any(v):
            raise ValidationError("sparsity needs x != 0")
        k_hat = sparsity_from_grading(v, src, tol=args.tol)
        return {"k_hat": k_hat, "l0": l0(v), "is_exact": src.strictly_convex}, {}
    if command == "conjugate":
        return {"value": capra_conjugate(_phi(args, d), v, src).to_json()}, {}
    if command == "biconjugate":
        r = capra_biconjugate(_phi(args, d), v, src, _cfg(args))
        out = r.to_json()
        resid = {"gap": r.gap, **r.residuals}
        if r.ascent_upper is not None and r.ascent is not None:
            resid["ascent_certificate"] = r.ascent_upper - r.ascent
        return out, resid
    if command == "bound":
        if not np.any(v):
            raise ValidationError("bound needs x != 0")
        rep = l0_lower_bound(v, _phi(args, d), src, _cfg(args))
        return rep.to_json(), {"certificate_gap": rep.certificate_gap}
    raise ValidationError(f"unknown command {command}")  # pragma: no cover


def _subdiff(args, x, y):
    phi = _phi(args, x.size)
    if x.size != y.size:
        raise ValidationError("--x and --y must have the same dimension")
    if not np.any(x):
        cert = subdiff_at_zero_contains(phi, y, args.source, tol=args.tol)
    else:
        cert = subdiff_membership(phi, x, y, args.source, tol=args.tol)
    out = cert.to_json()
    return out, {"coupling_eq": out["residual_coupling_eq"], "argmax": out["residual_argmax"]}


def _worker(payload):
    command, args, v = payload
    try:
        return "ok", _eval_one(command, args, v)
    except ValidationError as exc:
        return "usage", str(exc)
    except ValueError as exc:
        return "usage", str(exc)
    except NonConvergenceError as exc:
        return "solver", f"{exc} (residual {exc.residual})"


def ball_slice_csv(k: int, src, resolution: int, dual: bool = False) -> str:
    """Boundary of the d = 2 coordinate-k unit ball (or its dual ball) as CSV."""
    src = SourceNorm.parse(src)
    if dual:
        gauge = TopNormGauge(k, src.q)
        name = "dual"
    else:
        def gauge(u):
            return coordinate_norm(u, k, src)
        name = "primal"
    buf = io.StringIO(newline="")
    buf.write("theta,x1,x2,ball\n")
    for i in range(resolution):
        theta = 2.0 * math.pi * i / resolution
        u = np.array([math.cos(theta), math.sin(theta)])
        r = 1.0 / gauge_bisection(u, gauge)
        buf.write("%.12g,%.12g,%.12g,%s\n" % (theta, r * u[0], r * u[1], name))
    return buf.getvalue()


def validate_document(doc) -> None:
    """Schema check applied to every emitted document (after a JSON round trip)."""
    if not isinstance(doc, dict) or tuple(sorted(doc)) != tuple(sorted(DOC_KEYS)):
        raise ValidationError(f"document keys must be {DOC_KEYS}")
    if doc["version"] != SCHEMA_VERSION or not isinstance(doc["command"], str):
        raise ValidationError("bad version or command field")
    if not isinstance(doc["inputs"], dict):
        raise ValidationError("inputs must be an object")
    if not isinstance(doc["results"], (dict, list)) or not isinstance(doc["residuals"], (dict, list)):
        raise ValidationError("results and residuals must be objects or arrays")


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _document(command, inputs, results, residuals) -> str:
    doc = _jsonable({"command": command, "inputs": inputs, "results": results,
                     "residuals": residuals, "version": SCHEMA_VERSION})
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
    validate_document(json.loads(text))
    return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capra", description="Coordinate-k norms, Capra conjugacy and l0 bounds.")
    ap.add_argument("--version", action="version", version=f"capra {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, x=True, y=False, k=False, phi=False):
        p.add_argument("--p", default="2", help="source exponent: a number >= 1 or 'inf' (default 2)")
        if x:
            p.add_argument("--x", help="JSON array, e.g. '[1,0,2]'")
        if y:
            p.add_argument("--y", help="JSON array")
        if k:
            p.add_argument("--k", type=int)
        if phi:
            p.add_argument("--phi", help="l0 | identity | sqrt | power:a | levelset:k | JSON array with 'inf' tokens")
        p.add_argument("--file", help="CSV file, one vector per line (batch mode)")
        p.add_argument("--workers", type=int, default=1, help="parallel workers in batch mode")
        p.add_argument("--tol", type=float, default=None, help="decision tolerance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-iters", type=int, default=2000)
        p.add_argument("--solver-tol", type=float, default=1e-9)
        p.add_argument("--output", help="write to this file instead of stdout")

    p = sub.add_parser("norm", help="coordinate-k norm of x")
    common(p, k=True)
    p.add_argument("--method", choices=["auto", "closed", "solver"], default="auto")
    common(sub.add_parser("dual-norm", help="dual coordinate-k (top-(k,q)) norm of y"), x=False, y=True, k=True)
    common(sub.add_parser("seq", help="coordinate-k and dual coordinate-k norm sequences"), y=True)
    common(sub.add_parser("sparsity", help="sparsity read off the graded norm sequence"))
    common(sub.add_parser("conjugate", help="Capra conjugate of phi(l0) at y"), x=False, y=True, phi=True)
    common(sub.add_parser("biconjugate", help="Capra biconjugate of phi(l0) at x"), phi=True)
    common(sub.add_parser("subdiff", help="Capra subdifferential membership of y at x"), y=True, phi=True)
    common(sub.add_parser("bound", help="phi-norm ratio lower bound on l0(x)"), phi=True)
    p = sub.add_parser("ball-slice", help="CSV boundary of the d=2 coordinate-k ball")
    p.add_argument("--p", default="2")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--resolution", type=int, default=360)
    p.add_argument("--dual", action="store_true", help="emit the dual ball instead")
    p.add_argument("--output")
    p = sub.add_parser("check", help="run the property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--output")
    return ap


DEFAULT_TOL = {"sparsity": 1e-6, "subdiff": 1e-7}


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"capra: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"capra: solver did not converge: {exc} (residual {exc.residual})", file=sys.stderr)
        return EXIT_SOLVER
    except SolverError as exc:
        print(f"capra: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"capra: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args) -> int:
    command = args.command
    if command == "check":
        report = run_checks(args.seed, args.trials)
        text = _document("check", {"seed": args.seed, "trials": args.trials},
                         report, {"failed": [c["name"] for c in report["checks"] if not c["passed"]]})
        _emit(text, args.output)
        if not report["passed"]:
            first = next(c for c in report["checks"] if not c["passed"])
            print(f"capra: check {first['name']} failed; counterexample {first['counterexample']}",
                  file=sys.stderr)
            return EXIT_VIOLATION
        return EXIT_OK
    try:
        args.source = SourceNorm.parse(args.p)
    except ValueError as exc:
        raise ValidationError(f"--p: {exc}") from None
    if command == "ball-slice":
        if args.d != 2:
            raise ValidationError("ball-slice is only defined for d = 2")
        if not 1 <= args.k <= 2 or args.resolution < 1:
            raise ValidationError("ball-slice needs 1 <= k <= 2 and resolution >= 1")
        _emit(ball_slice_csv(args.k, args.source, args.resolution, args.dual), args.output)
        return EXIT_OK
    if args.tol is None:
        args.tol = DEFAULT_TOL.get(command, 1e-7)
    inputs = {"p": args.source.to_json()}
    for name in ("k", "phi"):
        if getattr(args, name, None) is not None:
            inputs[name] = getattr(args, name)
    if command == "subdiff":
        if args.x is None or args.y is None:
            raise ValidationError("subdiff needs --x and --y")
        x, y = parse_vector(args.x, "--x"), parse_vector(args.y, "--y")
        inputs.update(x=x, y=y)
        results, residuals = _subdiff(args, x, y)
        _emit(_document(command, inputs, results, residuals), args.output)
        return EXIT_OK
    key = "y" if command in ("dual-norm", "conjugate") else "x"
    if args.file:
        vectors = read_vector_file(args.file)
        inputs["file"] = args.file
        payloads = [(command, args, v) for v in vectors]
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as ex:
                outs = list(ex.map(_worker, payloads))
        else:
            outs = [_worker(pl) for pl in payloads]
        for i, (status, body) in enumerate(outs, start=1):
            if status == "usage":
                raise ValidationError(f"vector {i}: {body}")
            if status == "solver":
                raise NonConvergenceError(f"vector {i}: {body}")
        results = [body[0] for _, body in outs]
        residuals = [body[1] for _, body in outs]
        inputs["count"] = len(vectors)
    else:
        text = getattr(args, key)
        if text is None:
            raise ValidationError(f"--{key} or --file is required")
        v = parse_vector(text, f"--{key}")
        inputs[key] = v
        w = None
        if command == "seq" and args.y is not None:
            w = parse_vector(args.y, "--y")
            if w.size != v.size:
                raise ValidationError("--x and --y must have the same dimension")
            inputs["y"] = w
        results, residuals = _eval_one(command, args, v, w)
    _emit(_document(command, inputs, results, residuals), args.output)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()

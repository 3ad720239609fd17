"""Batch front end: load cocycle files, run analyses, write reports.

Reports are JSON carrying the tool version, the resolved flag set and a
sha256 digest of the input, so every number in them traces back to one exact
invocation.  Plot-ready data (per-sample residuals, gap certificates,
exponents) goes to CSV sidecars next to the report; '.' decimal point, no
locale.  Exit codes: 0 success (a not-dominated verdict is a result, not an
error), 2 bad input, 3 unsupported base dynamics, 4 numerical failure with a
diagnostic on stderr, 5 output I/O failure.

Wall-clock timings are the one report field exempt from bit-for-bit
reproducibility; everything else is deterministic at --threads 1.
"""

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .cocycle import Cocycle, detect_nilpotency, lyapunov_spectrum, rank_profile
from .domination import dominated_splitting, is_dominated, split_infinite_part
from .errors import CocycleError, UnsupportedBase
from .normalform import jordan_form, triangularize
from .trigpoly import default_grid_size


class _InputError(Exception):
    """Unreadable, unparseable or invalid input; exit code 2."""


class _OutputError(Exception):
    """Could not write an artifact; exit code 5."""


def _jsonable(obj):
    """Recursively convert to plain JSON types; non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _mat_pairs(arr):
    a = np.asarray(arr)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def _flags_dict(args):
    return {
        "grid": args.grid,
        "iters": args.iters,
        "tol": args.tol,
        "alpha": args.alpha,
        "seed": args.seed,
        "out": args.out,
        "threads": args.threads,
    }


def _validate_flags(args):
    if args.grid is not None and args.grid < 8:
        raise _InputError("--grid must be at least 8")
    if args.iters is not None and args.iters < 1:
        raise _InputError("--iters must be positive")
    if args.tol is not None and not 0.0 < args.tol < 1.0:
        raise _InputError("--tol must lie in (0, 1)")
    if args.alpha is not None and not math.isfinite(args.alpha):
        raise _InputError("--alpha must be finite")
    if args.threads < 1:
        raise _InputError("--threads must be positive")


def _apply_threads(n):
    # best effort: BLAS pools are configured at import time, so without
    # threadpoolctl the flag is only recorded in the report
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        pass


def _load(args):
    p = Path(args.path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise _InputError(f"cannot read {p}: {exc}")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _InputError(f"{p} is not valid JSON: {exc}")
    try:
        C = Cocycle.from_json_dict(doc)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise _InputError(f"{p} is not a cocycle description: {exc}")
    if args.alpha is not None:
        if C.base_dim != 1:
            raise _InputError("--alpha override needs a one-frequency cocycle")
        C = Cocycle((args.alpha,), C.matrix)
    return C, hashlib.sha256(raw).hexdigest()


def _outplace(args):
    p = Path(args.path)
    outdir = Path(args.out) if args.out else p.parent
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _OutputError(f"cannot create {outdir}: {exc}")
    return outdir, p.stem


def _base_report(cmd, args, digest):
    return {
        "tool": "cocycles",
        "version": __version__,
        "command": cmd,
        "input": str(args.path),
        "input_sha256": digest,
        "flags": _flags_dict(args),
    }


def _write_report(path, report):
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"
    try:
        path.write_text(text)
    except OSError as exc:
        raise _OutputError(f"cannot write {path}: {exc}")
    return path


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise _OutputError(f"cannot write {path}: {exc}")
    return path


def _tolkw(args):
    return {} if args.tol is None else {"tol": args.tol}


def _lyap_section(rep):
    return {
        "exponents": list(rep.exponents),
        "raw_estimates": list(rep.raw_estimates),
        "stderr": list(rep.stderr),
        "divergent": [bool(f) for f in rep.divergent],
        "n": rep.n,
        "grid": rep.grid,
    }


def _run_lyapunov(C, args):
    kw = {"n": args.iters if args.iters is not None else 1000}
    if args.grid is not None:
        kw["M"] = args.grid
    return lyapunov_spectrum(C, **kw)


def _exponent_rows(rep):
    return [(j, float(e), float(s))
            for j, (e, s) in enumerate(zip(rep.exponents, rep.stderr))]


def _triangular_samples(T, M=None):
    """Per-sample residual of the triangular form: unitarity defect of U and
    mass on or below the diagonal blocks of B."""
    if M is None:
        M = max(256, default_grid_size(max(T.U.degree, 1)))
    us = T.U.sample_grid(M)
    d = T.U.cols
    unit = np.abs(np.conj(np.swapaxes(us, 1, 2)) @ us - np.eye(d)).max(axis=(1, 2))
    bs = T.B.sample_grid(M)
    edges = np.concatenate([[0], np.cumsum(T.block_sizes)])
    shape = np.zeros(M)
    for n in range(len(T.block_sizes)):
        low = np.abs(bs[:, edges[n]:, edges[n]:edges[n + 1]])
        if low.size:
            shape = np.maximum(shape, low.max(axis=(1, 2)))
    return np.arange(M) / M, np.maximum(unit, shape)


def _jordan_samples(C, F, M=None):
    """Per-sample spectral norm of M(x+a)^{-1} A(x) M(x) - J."""
    if M is None:
        M = max(256, default_grid_size(max(F.M.degree, 1)))
    msamp = F.M.sample_grid(M)
    mshift = F.M.sample_grid(M, shift=C.alpha)
    asamp = C.matrix.sample_grid(M)
    conj = np.linalg.solve(mshift, asamp @ msamp)
    vals = np.linalg.svd(conj - F.J, compute_uv=False)[:, 0]
    return np.arange(M) / M, vals


def _sample_rows(xs, vals):
    return [(float(x), float(v)) for x, v in zip(xs, vals)]


def cmd_lyapunov(args):
    C, digest = _load(args)
    outdir, stem = _outplace(args)
    t0 = time.perf_counter()
    rep = _run_lyapunov(C, args)
    report = _base_report("lyapunov", args, digest)
    report["lyapunov"] = _lyap_section(rep)
    report["timings"] = {"lyapunov": time.perf_counter() - t0}
    side = _write_csv(outdir / f"{stem}.lyapunov.exponents.csv",
                      ("j", "exponent", "stderr"), _exponent_rows(rep))
    report["sidecars"] = [side.name]
    print(_write_report(outdir / f"{stem}.lyapunov.json", report))
    return 0


def cmd_triangularize(args):
    C, digest = _load(args)
    outdir, stem = _outplace(args)
    t0 = time.perf_counter()
    T = triangularize(C, M=args.grid, **_tolkw(args))
    report = _base_report("triangularize", args, digest)
    report["triangular"] = {
        "block_sizes": list(T.block_sizes),
        "residual": T.residual,
        "U": T.U.to_json_dict(),
        "B": T.B.to_json_dict(),
    }
    report["timings"] = {"triangularize": time.perf_counter() - t0}
    xs, vals = _triangular_samples(T)
    side = _write_csv(outdir / f"{stem}.triangularize.residuals.csv",
                      ("x", "value"), _sample_rows(xs, vals))
    report["sidecars"] = [side.name]
    print(_write_report(outdir / f"{stem}.triangularize.json", report))
    return 0


def cmd_jordan(args):
    C, digest = _load(args)
    outdir, stem = _outplace(args)
    t0 = time.perf_counter()
    F = jordan_form(C, M=args.grid, **_tolkw(args))
    report = _base_report("jordan", args, digest)
    report["jordan"] = {
        "chains": list(F.chains),
        "J": _mat_pairs(F.J),
        "cond_max": F.cond_max,
        "residual": F.residual,
        "M": F.M.to_json_dict(),
    }
    report["timings"] = {"jordan": time.perf_counter() - t0}
    xs, vals = _jordan_samples(C, F)
    side = _write_csv(outdir / f"{stem}.jordan.residuals.csv",
                      ("x", "value"), _sample_rows(xs, vals))
    report["sidecars"] = [side.name]
    print(_write_report(outdir / f"{stem}.jordan.json", report))
    return 0


def cmd_dominate(args):
    C, digest = _load(args)
    outdir, stem = _outplace(args)
    report = _base_report("dominate", args, digest)
    sidecars = []
    t0 = time.perf_counter()
    S = split_infinite_part(C, M=args.grid, **_tolkw(args))
    verdict = is_dominated(S, C, **_tolkw(args))
    section = {
        "k": S.k,
        "p": S.p,
        "split_residual": S.residual,
        "dominated": verdict["dominated"],
        "evidence": verdict["evidence"],
        "U": S.U.to_json_dict(),
    }
    if verdict["dominated"]:
        R = dominated_splitting(S, **_tolkw(args))
        section["M"] = R.M.to_json_dict()
        section["C"] = R.C.to_json_dict()
        section["splitting_residual"] = R.residual
        rows = [(n, float(r)) for n, r in sorted(R.gap_certificate.items())]
        sidecars.append(_write_csv(outdir / f"{stem}.dominate.gaps.csv",
                                   ("n", "ratio"), rows).name)
    report["dominate"] = section
    report["timings"] = {"dominate": time.perf_counter() - t0}
    report["sidecars"] = sidecars
    print(_write_report(outdir / f"{stem}.dominate.json", report))
    return 0


def cmd_analyze(args):
    C, digest = _load(args)
    outdir, stem = _outplace(args)
    report = _base_report("analyze", args, digest)
    timings = {}
    sidecars = []

    t0 = time.perf_counter()
    prof = rank_profile(C, **_tolkw(args))
    timings["rank_profile"] = time.perf_counter() - t0
    report["rank_profile"] = {
        "ranks": list(prof.ranks),
        "stabilized_at": prof.stabilized_at,
        "min_rank": prof.min_rank,
        "exceptional_counts": {str(n): len(v) for n, v in prof.exceptional.items()},
    }

    t0 = time.perf_counter()
    nil = detect_nilpotency(C, **_tolkw(args))
    timings["nilpotency"] = time.perf_counter() - t0
    report["nilpotency"] = {
        "nilpotent": nil.nilpotent,
        "degree": nil.degree,
        "witness": nil.witness,
    }

    t0 = time.perf_counter()
    lyap = _run_lyapunov(C, args)
    timings["lyapunov"] = time.perf_counter() - t0
    report["lyapunov"] = _lyap_section(lyap)
    sidecars.append(_write_csv(outdir / f"{stem}.analyze.exponents.csv",
                               ("j", "exponent", "stderr"),
                               _exponent_rows(lyap)).name)

    pipeline = "lyapunov"
    result = {}
    if nil.nilpotent:
        t0 = time.perf_counter()
        try:
            T = triangularize(C, M=args.grid, **_tolkw(args))
        except UnsupportedBase as exc:
            result["note"] = f"normal forms unavailable: {exc}"
        else:
            pipeline = "triangularize"
            result["block_sizes"] = list(T.block_sizes)
            result["residual"] = T.residual
            xs, vals = _triangular_samples(T)
            sidecars.append(_write_csv(outdir / f"{stem}.analyze.residuals.csv",
                                       ("x", "value"),
                                       _sample_rows(xs, vals)).name)
            try:
                F = jordan_form(C, M=args.grid, **_tolkw(args))
            except CocycleError as exc:
                # the complete reduction is optional: rank variation or a
                # non-analytic kernel bundle leaves the triangular form
                result["jordan"] = {"error": type(exc).__name__,
                                    "detail": str(exc)}
            else:
                pipeline = "jordan"
                result["jordan"] = {
                    "chains": list(F.chains),
                    "cond_max": F.cond_max,
                    "residual": F.residual,
                }
        timings["normal_form"] = time.perf_counter() - t0
    elif prof.stabilized_at is not None and 0 < prof.min_rank < C.dim:
        t0 = time.perf_counter()
        try:
            S = split_infinite_part(C, M=args.grid, **_tolkw(args))
        except UnsupportedBase as exc:
            result["note"] = f"splitting unavailable: {exc}"
        else:
            pipeline = "dominate"
            verdict = is_dominated(S, C, **_tolkw(args))
            result["k"] = S.k
            result["p"] = S.p
            result["split_residual"] = S.residual
            result["dominated"] = verdict["dominated"]
            result["evidence"] = verdict["evidence"]
            if verdict["dominated"]:
                R = dominated_splitting(S, **_tolkw(args))
                result["splitting_residual"] = R.residual
                rows = [(n, float(r)) for n, r in sorted(R.gap_certificate.items())]
                sidecars.append(_write_csv(outdir / f"{stem}.analyze.gaps.csv",
                                           ("n", "ratio"), rows).name)
        timings["splitting"] = time.perf_counter() - t0
    else:
        result["note"] = "all exponents finite; spectrum only"

    report["pipeline"] = pipeline
    report["result"] = result
    report["timings"] = timings
    report["sidecars"] = sidecars
    print(_write_report(outdir / f"{stem}.analyze.json", report))
    return 0


def _fixture_set(seed):
    return {
        "nilpotent_3x3_variable_rank": fixtures.nilpotent_3x3_variable_rank(),
        "nilpotent_4x4_variable_rank2": fixtures.nilpotent_4x4_variable_rank2(),
        "twofrequency_rank_one": fixtures.twofrequency_rank_one(),
        "not_dominated_2x2": fixtures.not_dominated_2x2(),
        "dominated_2x2": fixtures.dominated_2x2(),
        "nilpotent_plus_invertible_3x3": fixtures.nilpotent_plus_invertible_3x3(),
        "constant_jordan_3": fixtures.constant_jordan((3,)),
        "constant_jordan_2_1": fixtures.constant_jordan((2, 1)),
        f"synthetic_nilpotent_seed{seed}": fixtures.random_nilpotent(seed),
        f"synthetic_jordan_seed{seed}": fixtures.random_constant_rank_jordan(seed)[0],
    }


def cmd_fixtures(args):
    outdir = Path(args.outdir or args.out or "fixtures")
    seed = 42 if args.seed is None else args.seed
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _OutputError(f"cannot create {outdir}: {exc}")
    for name, c in sorted(_fixture_set(seed).items()):
        path = outdir / f"{name}.json"
        text = json.dumps(c.to_json_dict(), sort_keys=True, indent=2) + "\n"
        try:
            path.write_text(text)
        except OSError as exc:
            raise _OutputError(f"cannot write {path}: {exc}")
        print(path)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cocycles",
        description="Structure analysis of analytic matrix cocycles "
                    "over torus rotations.",
    )
    parser.add_argument("--version", action="version",
                        version=f"cocycles {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, metavar="M",
                        help="sample grid size override")
    common.add_argument("--iters", type=int, metavar="N",
                        help="Lyapunov iterate count (default 1000)")
    common.add_argument("--tol", type=float, metavar="TOL",
                        help="numerical tolerance override")
    common.add_argument("--alpha", type=float, metavar="A",
                        help="replace the rotation number (one-frequency only)")
    common.add_argument("--seed", type=int, metavar="S",
                        help="seed for the synthetic fixture generators")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (default: beside the input)")
    common.add_argument("--threads", type=int, default=1, metavar="T",
                        help="BLAS thread cap (default 1, reproducible)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, blurb in [
        ("analyze", cmd_analyze,
         "rank profile, nilpotency, then normal form or splitting"),
        ("lyapunov", cmd_lyapunov, "Lyapunov spectrum with standard errors"),
        ("triangularize", cmd_triangularize, "analytic block-triangular form"),
        ("jordan", cmd_jordan, "analytic Jordan form (constant-rank nilpotent)"),
        ("dominate", cmd_dominate, "kernel splitting and domination verdict"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=blurb)
        sp.add_argument("path", help="cocycle JSON file")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("fixtures", parents=[common],
                        help="write the bundled example cocycles")
    sp.add_argument("outdir", nargs="?",
                    help="destination directory (default: fixtures)")
    sp.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (None, 0) else 2
    try:
        _validate_flags(args)
        _apply_threads(args.threads)
        return args.func(args)
    except _InputError as exc:
        print(f"cocycles: input error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedBase as exc:
        print(f"cocycles: unsupported base: {exc}", file=sys.stderr)
        return 3
    except _OutputError as exc:
        print(f"cocycles: i/o error: {exc}", file=sys.stderr)
        return 5
    except CocycleError as exc:
        print(f"cocycles: numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 4


def entry():
    raise SystemExit(main(sys.argv[1:]))

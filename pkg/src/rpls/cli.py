"""Command-line front end: ``rpls validate|matrix|kernel|density|verify|simulate|example``.

Exit codes: 0 success, 1 a mathematical check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .gallery import GALLERY, gallery, parse_param
from .density import (
    density_from_csv,
    density_to_csv,
    invariant_densities,
    plot_data,
    verify_invariant,
)
from .fundamental import (
    EXACT,
    TRUNCATED,
    ExactProvider,
    SelfCheckError,
    TruncatedProvider,
    UnsupportedConfigurationError,
    build_matrix,
    kernel,
    matrix_to_csv,
    matrix_to_json,
    self_check,
)
from .orbits import DEFAULT_CAP, DEFAULT_DEPTH, CapacityError, closure_to_csv, depth_for_bound
from .scalar import RATIONAL, FloatField, QuadraticField
from .simulate import SimConfig, birkhoff_frequency, histogram_distance, histogram_to_csv
from .system import SystemFileError, contraction_bound, dump_system, load_system, system_to_dict, validate

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

EXAMPLE_PARAMS = {
    "random_beta": {"beta": "golden", "p": "1/2"},
    "random_alpha_beta": {"alpha": "1/beta", "beta": "golden", "p": "1/4"},
    "luroth23": {"p": "1/2"},
    "single_map": {"map": "doubling"},
}


class InputError(Exception):
    pass


def _scalar_override():
    mode = os.environ.get("RPLS_SCALAR_MODE")
    if not mode:
        return None
    mode = mode.strip().lower()
    if mode == "rational":
        return RATIONAL
    if mode == "float":
        return FloatField()
    if mode.startswith("quadratic"):
        d = mode.partition(":")[2] or "5"
        return QuadraticField(int(d))
    raise InputError(f"RPLS_SCALAR_MODE={mode!r}: expected rational, quadratic[:d] or float")


def _example_params(args) -> dict:
    params = dict(EXAMPLE_PARAMS.get(args.example, {}))
    for key in ("alpha", "beta", "p", "map"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    allowed = {"random_beta": {"beta", "p"}, "random_alpha_beta": {"alpha", "beta", "p"},
               "luroth23": {"p"}, "single_map": {"map"}}[args.example]
    return {k: v for k, v in params.items() if k in allowed}


def _load(args):
    override = _scalar_override()
    if getattr(args, "example", None):
        if args.example not in GALLERY:
            raise InputError(f"unknown example {args.example!r}; choose from {sorted(GALLERY)}")
        try:
            sys_ = gallery(args.example, **_example_params(args))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(str(exc)) from exc
        return sys_.converted(override) if override is not None else sys_
    if not getattr(args, "system", None):
        raise InputError("give a system file or --example NAME")
    try:
        return load_system(args.system, override)
    except OSError as exc:
        raise InputError(f"{args.system}: {exc.strerror}") from exc
    except SystemFileError as exc:
        raise InputError(f"{args.system}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{args.system}: {exc}") from exc


def _depth(args, system) -> int:
    if args.depth == "auto":
        return depth_for_bound(contraction_bound(system), 1e-12)
    try:
        d = int(args.depth)
    except ValueError:
        raise InputError(f"--depth must be an integer or 'auto', got {args.depth!r}") from None
    if d < 0:
        raise InputError("--depth must be non-negative")
    return d


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _require_valid(system):
    report = validate(system)
    if not report.ok:
        for line in report.diagnostics:
            print(line, file=sys.stderr)
        print(f"rho = {system.field.format(report.rho)} ({float(report.rho):.6g})", file=sys.stderr)
        return report, False
    return report, True


def _provider(system, args):
    mode = args.mode
    if mode == EXACT and system.field.exact:
        try:
            return ExactProvider(system, cap=args.cap)
        except CapacityError as exc:
            print(f"note: {exc}; using truncated mode", file=sys.stderr)
    return TruncatedProvider(system, _depth(args, system))


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    system = _load(args)
    report = validate(system)
    doc = report.as_dict(system.field.format)
    print(json.dumps(doc, indent=2))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_matrix(args) -> int:
    system = _load(args)
    _, ok = _require_valid(system)
    if not ok:
        return EXIT_FAIL
    provider = _provider(system, args)
    M = build_matrix(system, provider)
    _write(args.out, matrix_to_json(M) + "\n" if args.json else matrix_to_csv(M))
    if args.closure and isinstance(provider, ExactProvider):
        _write(args.closure, closure_to_csv(provider.closure))
    return EXIT_OK


def cmd_kernel(args) -> int:
    system = _load(args)
    _, ok = _require_valid(system)
    if not ok:
        return EXIT_FAIL
    M = build_matrix(system, _provider(system, args))
    try:
        basis = kernel(M)
        if M.mode == EXACT:
            report = self_check(M, basis)
            for note in report.skipped:
                print(f"skipped: {note}", file=sys.stderr)
    except SelfCheckError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _write(args.out, matrix_to_json(M, basis) + "\n")
    return EXIT_OK


def _density_doc(system, result, elapsed):
    fmt = system.field.format

    def sval(v):
        return repr(float(v)) if isinstance(v, float) else fmt(v)

    return {
        "system": system_to_dict(system),
        "validation": validate(system).as_dict(fmt),
        "mode": result.mode,
        "depth": result.depth,
        "error_bound": result.error_bound,
        "matrix": [[sval(v) for v in row] for row in result.matrix.entries],
        "kernel": [[sval(v) for v in g] for g in result.basis],
        "kernel_dimension": result.dimension,
        "normalization": [sval(1 / h.integral()) if h.integral() != 0 else None for h in result.functions],
        "densities": [
            {
                "pieces": [[fmt(l), fmt(r), sval(v)] for l, r, v in d.pieces()],
                "verification": chk.as_dict(),
            }
            for d, chk in zip(result.densities, result.verification)
        ],
        "notes": result.notes,
        "seconds": elapsed,
    }


def cmd_density(args) -> int:
    system = _load(args)
    _, ok = _require_valid(system)
    if not ok:
        return EXIT_FAIL
    t0 = time.perf_counter()
    try:
        result = invariant_densities(system, args.mode, _depth(args, system), args.cap, args.tol)
        if result.mode == EXACT:
            self_check(result.matrix, result.basis)
    except (SelfCheckError, UnsupportedConfigurationError) as exc:
        print(f"pipeline failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    elapsed = time.perf_counter() - t0
    fmt = system.field.format
    print(f"mode: {result.mode}" + (f" (depth {result.depth}, bound {result.error_bound:.3g})" if result.depth else ""))
    print(f"kernel dimension: {result.dimension}")
    for g, h in zip(result.basis, result.functions):
        total = h.integral()
        const = "n/a (zero integral)" if total == 0 else (repr(float(1 / total)) if isinstance(total, float) else fmt(1 / total))
        print(f"gamma = ({', '.join(repr(float(v)) if isinstance(v, float) else fmt(v) for v in g)}), normalization {const}")
    for note in result.notes:
        print(f"note: {note}")
    for k, (d, chk) in enumerate(zip(result.densities, result.verification)):
        print(f"density {k}: {len(d)} pieces, invariant={chk.ok} (L1 residual {chk.l1_residual:.3g})")
        if args.out:
            path = args.out if len(result.densities) == 1 else _suffixed(args.out, k)
            _write(path, density_to_csv(system, d))
        if args.plot:
            path = args.plot if len(result.densities) == 1 else _suffixed(args.plot, k)
            _write(path, plot_data(d, args.resolution))
    if args.report:
        _write(args.report, json.dumps(_density_doc(system, result, elapsed), indent=2) + "\n")
    return EXIT_OK if all(c.ok for c in result.verification) else EXIT_FAIL


def _suffixed(path, k):
    root, ext = os.path.splitext(path)
    return f"{root}_{k}{ext}"


def cmd_verify(args) -> int:
    system = _load(args)
    try:
        with open(args.density, encoding="utf-8") as fh:
            h = density_from_csv(system, fh.read())
    except OSError as exc:
        raise InputError(f"{args.density}: {exc.strerror}") from exc
    except ValueError as exc:
        raise InputError(f"{args.density}: {exc}") from exc
    report = verify_invariant(system, h, args.tol)
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    system = _load(args)
    if args.event is None and args.hist is None:
        raise InputError("simulate needs --event A B or --hist DENSITY.csv")
    try:
        cfg = SimConfig(args.seed, args.steps, args.orbits, args.burn_in, args.bins, args.dither)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    f = system.field
    x0 = None if args.x0 is None else _parse(f, args.x0, "--x0")
    doc = {}
    status = EXIT_OK
    if args.event is not None:
        lo, hi = (_parse(f, v, "--event") for v in args.event)
        try:
            est = birkhoff_frequency(system, x0, (lo, hi), cfg, args.closed)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        doc["frequency"] = est.as_dict()
        if args.expect is not None:
            target = float(_parse(f, args.expect, "--expect"))
            z = abs(est.estimate - target) / est.stderr if est.stderr > 0 else (0.0 if est.estimate == target else float("inf"))
            doc["frequency"]["expected"] = target
            doc["frequency"]["z"] = z
            if z > args.sigmas:
                status = EXIT_FAIL
    if args.hist is not None:
        try:
            with open(args.hist, encoding="utf-8") as fh:
                h = density_from_csv(system, fh.read())
        except OSError as exc:
            raise InputError(f"{args.hist}: {exc.strerror}") from exc
        except ValueError as exc:
            raise InputError(f"{args.hist}: {exc}") from exc
        res = histogram_distance(system, h, cfg, x0)
        doc["histogram"] = {"l1": res.l1, "samples": res.n, "bins": cfg.bins}
        if args.out:
            _write(args.out, histogram_to_csv(res))
        if args.max_l1 is not None and res.l1 > args.max_l1:
            status = EXIT_FAIL
    print(json.dumps(doc, indent=2))
    return status


def _parse(f, text, where):
    try:
        return f.parse(text) if f.exact else float(parse_param(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{where}: {exc}") from exc


def cmd_example(args) -> int:
    if args.action == "list":
        for name, params in EXAMPLE_PARAMS.items():
            defaults = " ".join(f"--{k} {v}" for k, v in params.items())
            print(f"{name:20s} {defaults}")
        return EXIT_OK
    if not args.example:
        raise InputError("example show needs a name")
    system = _load(args)
    _write(args.out, dump_system(system) + "\n")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _add_system(p, positional=True):
    if positional:
        p.add_argument("system", nargs="?", help="system-definition JSON file")
    p.add_argument("--example", help="gallery system instead of a file")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--p")
    p.add_argument("--map", help="single_map variant")


def _add_mode(p):
    p.add_argument("--mode", choices=[EXACT, TRUNCATED], default=EXACT)
    p.add_argument("--depth", default=str(DEFAULT_DEPTH), help="truncation depth or 'auto' (bound < 1e-12)")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="orbit-closure point cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rpls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the standing assumptions")
    _add_system(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("matrix", help="print the fundamental matrix")
    _add_system(p)
    _add_mode(p)
    p.add_argument("--json", action="store_true", help="exact-string JSON instead of CSV")
    p.add_argument("--out")
    p.add_argument("--closure", help="also write the orbit closure as CSV")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("kernel", help="null space of the fundamental matrix, with self-checks")
    _add_system(p)
    _add_mode(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("density", help="full pipeline to verified invariant densities")
    _add_system(p)
    _add_mode(p)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", help="density CSV")
    p.add_argument("--report", help="run report JSON")
    p.add_argument("--plot", help="sampled x,h(x) data")
    p.add_argument("--resolution", type=int, default=512)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("verify", help="check P_T h = h for a density CSV")
    _add_system(p)
    p.add_argument("--density", required=True)
    p.add_argument("--tol", type=float, default=None, help="L1 tolerance; exact equality when omitted")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo frequencies and histograms")
    _add_system(p)
    p.add_argument("--event", nargs=2, metavar=("LO", "HI"))
    p.add_argument("--closed", choices=["right", "left", "both", "neither"], default="right")
    p.add_argument("--expect", help="exact frequency to compare with")
    p.add_argument("--sigmas", type=float, default=4.0)
    p.add_argument("--hist", help="density CSV for the histogram comparison")
    p.add_argument("--max-l1", type=float, default=None)
    p.add_argument("--out", help="histogram CSV")
    p.add_argument("--x0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--orbits", type=int, default=1)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--dither", type=float, default=1e-12)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="list gallery systems or print one as JSON")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("example", nargs="?")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--p")
    p.add_argument("--map")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``apollonian <command> ...``.

Roots are given as ``--root=a,b,c,d`` (the ``=`` keeps argparse from reading a
leading minus sign as a flag).  Exit codes: 0 ok, 1 invariant or verification
failure, 2 bad input, 3 overflow or resource cap, 130 interrupted.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .analysis import fit_exponent, report
from .arithmetic import (
    crt_projection_ok,
    local_density,
    mod_p_summary,
    orbit_mod,
    orbit_mod_p,
    sieve_ratio_report,
)
from .descartes import Quadruple, as_root, descartes_form, flip, parse_quadruple, reduce_to_root
from .errors import (
    ApollonianError,
    ArithmeticOverflowError,
    InternalInvariantError,
    InvalidInputError,
    ResourceError,
)
from .orbit import (
    GENERATORS,
    apply_generator,
    circle_curvatures,
    count_series,
    default_workers,
    enumerate_circles,
)
from .series import CountSeries, geometric_grid


def _err(msg):
    print(f"apollonian: {msg}", file=sys.stderr)


def _root_arg(text: str, strict: bool):
    """Parse a root, reducing it first unless ``strict``."""
    q = parse_quadruple(text)
    form = descartes_form(q)
    if form != 0:
        raise InvalidInputError(f"{tuple(q)} is not a Descartes quadruple (form = {form})")
    try:
        return as_root(q)
    except InvalidInputError:
        if strict:
            raise
    red = reduce_to_root(q)
    word = "".join(str(i) for i in red.flips) or "-"
    _err(f"note: reduced {tuple(q)} to root {tuple(red.root.quad)} via flips {word}")
    return red.root


def _grid(args) -> list[int]:
    if args.t0 is None:
        return [args.tmax]
    return geometric_grid(args.t0, args.ratio, args.tmax)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


# --- commands ---------------------------------------------------------------------


def cmd_count(args) -> int:
    root = _root_arg(args.root, args.strict)
    grid = _grid(args)
    workers = args.workers or default_workers()
    out, close = _open_out(args.output)
    w = csv.writer(out, lineterminator="\n")
    try:
        if args.format == "csv":
            w.writerow(["T", "N", "N2", "pi", "pi2"])
            out.flush()
        if args.events:
            _write_events(root, grid[-1], args.events, args.events_format)
        # the traversal is a single pass; rows become available together
        series = count_series(root, grid, workers=workers)
        if args.format == "json":
            json.dump(report(series), out, indent=2)
            out.write("\n")
        else:
            for row in series.rows():
                w.writerow(["" if v is None else v for v in row])
                out.flush()
    except KeyboardInterrupt:
        if args.format == "csv":
            out.write("# incomplete\n")
            out.flush()
        _err("interrupted; output incomplete")
        return 130
    finally:
        if close:
            out.close()
    return 0


def _write_events(root, bound, path, fmt):
    out, close = _open_out(path)
    try:
        if fmt == "jsonl":
            def visit(ev):
                out.write(json.dumps({"curvature": ev.curvature, "depth": ev.depth, "parents": list(ev.parents)}))
                out.write("\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(["curvature", "depth", "p1", "p2", "p3"])

            def visit(ev):
                w.writerow(ev.csv_row())
        enumerate_circles(root, bound, visit)
    except KeyboardInterrupt:
        out.write("# incomplete\n")
        raise
    finally:
        if close:
            out.close()


def cmd_reduce(args) -> int:
    text = args.quad if args.quad is not None else args.quadruple
    if text is None:
        raise InvalidInputError("no quadruple given")
    q = parse_quadruple(text)
    red = reduce_to_root(q)
    print(json.dumps({"schema": "1", "input": list(q), "root": list(red.root.quad), "flips": list(red.flips)}))
    return 0


def cmd_primes(args) -> int:
    root = _root_arg(args.root, args.strict)
    t0 = args.t0 if args.t0 is not None else 100
    grid = geometric_grid(t0, args.ratio, args.tmax)
    series = count_series(root, grid, workers=args.workers or default_workers())
    fit = None
    ratios = None
    try:
        fit = fit_exponent(series, (args.tmin, args.tmax) if args.tmin else None)
    except InvalidInputError as exc:
        _err(f"note: no exponent fit ({exc})")
    if fit is not None:
        ratios = sieve_ratio_report(series, fit.alpha_hat, tmin=args.tmin, factor=args.factor)
    rep = report(series, fit, ratios)
    json.dump(rep, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0 if ratios is None or ratios.bounded else 1


def cmd_fit(args) -> int:
    if args.series == "-":
        text = sys.stdin.read()
    else:
        with open(args.series) as fh:
            text = fh.read()
    series = CountSeries.from_csv(text)
    window = (args.tmin, args.tmax) if args.tmin is not None or args.tmax is not None else None
    fit = fit_exponent(series, window)
    json.dump({"schema": "1", **report(series, fit)["fit"]}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_modp(args) -> int:
    root = _root_arg(args.root, args.strict)
    primes = [int(p) for p in args.primes.split(",") if p.strip()]
    rows = [mod_p_summary(root, p, max_p=args.max_p) for p in primes]
    out = {"schema": "1", "root": list(root.quad), "primes": rows}
    if args.crt:
        p, q = (int(x) for x in args.crt.split(","))
        direct = orbit_mod(root.quad, p * q)
        ok = crt_projection_ok(direct, [orbit_mod_p(root, p, args.max_p), orbit_mod_p(root, q, args.max_p)])
        out["crt"] = {"moduli": [p, q], "orbit_size": direct.size, "product_ok": ok}
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_render(args) -> int:
    from .geometry import count_svg_elements, render_svg

    root = _root_arg(args.root, args.strict)
    if args.tmax is None and args.depth is None:
        raise InvalidInputError("render needs --tmax or --depth")
    svg = render_svg(root, bound=args.tmax, max_depth=args.depth, labels=args.labels, size=args.size, cap=args.cap)
    out, close = _open_out(args.output)
    try:
        out.write(svg)
    finally:
        if close:
            out.close()
    if close:
        _err(f"wrote {count_svg_elements(svg)} elements to {args.output}")
    return 0


# --- verify ---------------------------------------------------------------------


def _word_oracle(root, bound, depth):
    """Curvatures from every non-returning word up to ``depth``, no pruning."""
    q0 = tuple(root.quad)
    out = [v for v in q0 if v < bound]
    level = [(q0, 0)]
    for _ in range(depth):
        nxt = []
        for q, last in level:
            for i in (1, 2, 3, 4):
                if i == last:
                    continue
                c = flip(q, i)
                if c[i - 1] < bound:
                    out.append(c[i - 1])
                nxt.append((c, i))
        level = nxt
    return sorted(out)


def verify_suite(plant: str | None = None) -> list[tuple[str, bool, str]]:
    """Run the built-in invariant checks; ``plant`` injects a known fault."""
    results = []

    def check(name, fn):
        t = time.perf_counter()
        try:
            ok, detail = fn()
        except ApollonianError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), f"{detail} ({time.perf_counter() - t:.2f}s)"))

    mats = [m.copy() for m in GENERATORS]
    if plant == "generator":
        mats[0][1, 1] += 1

    def generators():
        rng = np.random.default_rng(0)
        for start in ((-1, 2, 2, 3), (0, 0, 1, 1)):
            q = Quadruple(*start)
            for _ in range(500):
                i = int(rng.integers(1, 5))
                nq = apply_generator(q, i, mats)
                if descartes_form(nq) != 0:
                    return False, f"form broke at {tuple(nq)} via S{i}"
                if nq != flip(q, i) or apply_generator(nq, i, mats) != q:
                    return False, f"S{i} disagrees with the flip at {tuple(q)}"
                q = nq if max(nq) < 10**12 else Quadruple(*start)
        return True, "form preserved, matrices match flips"

    check("generators", generators)

    def oracle():
        root = as_root((-1, 2, 2, 3))
        for T in (4, 10, 100):
            events = []
            enumerate_circles(root, T, events.append)
            shallow = sorted(e.curvature for e in events if e.depth <= 8)
            if shallow != _word_oracle(root, T, 8):
                return False, f"pruned walk differs from depth-8 word oracle at T={T}"
            # depth 10 already covers every circle below 100
            if sorted(e.curvature for e in events) != _word_oracle(root, T, 10):
                return False, f"pruned walk differs from depth-10 word oracle at T={T}"
        n10 = len(circle_curvatures(root, 10))
        return n10 == 9, f"N(10) = {n10}"

    check("enumeration-oracle", oracle)

    def n2():
        s = count_series((-1, 2, 2, 3), [4, 10, 100, 1000])
        if plant == "n2":
            s.N2[-1] += 1
        bad = [t for t, n, m in zip(s.thresholds, s.N, s.N2) if m != 3 * n - 6]
        return not bad, "N2 = 3N-6 at all thresholds" if not bad else f"N2 != 3N-6 at T={bad}"

    check("n2-identity", n2)

    def strip():
        n = count_series((0, 0, 1, 1), [2]).N[-1]
        return n == 4, f"strip N(2) = {n}"

    check("strip", strip)

    def geometry():
        from .geometry import all_pairs_tangent, conjugation_check, count_svg_elements, render_svg, standard_embedding

        W = standard_embedding((-1, 2, 2, 3))
        res = conjugation_check(W)
        tangent = all_pairs_tangent(W)
        svg = count_svg_elements(render_svg((-1, 2, 2, 3), bound=10))
        ok = res < 1e-6 and tangent and svg == 9
        return ok, f"conjugation residual {res:.2e}, tangent={tangent}, svg elements={svg}"

    check("geometry", geometry)

    def modp():
        notes = []
        for p in (7, 11, 13):
            s = mod_p_summary((-1, 2, 2, 3), p)
            if not s["good"] or s["g1_scaled_error"] > 10 or s["g2_scaled_error"] > 10:
                return False, f"p={p}: {s}"
            notes.append(f"{p}:{s['orbit_size']}")
        g = local_density((-1, 2, 2, 3), 7) * local_density((-1, 2, 2, 3), 11)
        direct = orbit_mod((-1, 2, 2, 3), 77)
        ok = crt_projection_ok(direct, [orbit_mod_p((-1, 2, 2, 3), 7), orbit_mod_p((-1, 2, 2, 3), 11)])
        return ok, f"orbits = cone ({', '.join(notes)}), g1(77) = {g}"

    check("mod-p", modp)

    def overflow():
        big = [x << 124 for x in (-1, 2, 2, 3)]
        try:
            count_series(big, [(1 << 127) - 1])
        except ArithmeticOverflowError:
            return True, "overflow reported"
        return False, "no overflow raised"

    check("overflow", overflow)
    return results


def cmd_verify(args) -> int:
    results = verify_suite(args.plant)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="apollonian", description="Integral Apollonian packing counts and checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def root_opts(sp):
        sp.add_argument("--root", required=True, help="quadruple a,b,c,d (use --root=...)")
        sp.add_argument("--strict", action="store_true", help="reject non-root input instead of reducing")

    def grid_opts(sp, tmax_required=True):
        sp.add_argument("--tmax", type=int, required=tmax_required)
        sp.add_argument("--t0", type=int, default=None, help="first grid threshold (default: only tmax)")
        sp.add_argument("--ratio", type=float, default=10**0.125, help="geometric grid ratio")
        sp.add_argument("--workers", type=int, default=None, help="default from APOLLONIAN_WORKERS")

    sp = sub.add_parser("count", help="N, N2, pi, pi2 over a threshold grid")
    root_opts(sp)
    grid_opts(sp)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", default=None)
    sp.add_argument("--events", default=None, help="also write one row per circle to this file")
    sp.add_argument("--events-format", choices=("csv", "jsonl"), default="csv")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("reduce", help="reduce a Descartes quadruple to its root")
    sp.add_argument("quadruple", nargs="?")
    sp.add_argument("--quad", default=None, help="same as the positional, for negative entries")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("primes", help="prime counts, exponent fit and normalized ratios")
    root_opts(sp)
    grid_opts(sp)
    sp.add_argument("--tmin", type=int, default=None, help="lower end of fit and ratio window")
    sp.add_argument("--factor", type=float, default=3.0)
    sp.set_defaults(func=cmd_primes)

    sp = sub.add_parser("fit", help="fit N ~ c T^alpha to a series CSV")
    sp.add_argument("series", help="CSV path or - for stdin")
    sp.add_argument("--tmin", type=int, default=None)
    sp.add_argument("--tmax", type=int, default=None)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("modp", help="orbit mod p, cone comparison and local densities")
    root_opts(sp)
    sp.add_argument("--primes", default="5,7,11,13")
    sp.add_argument("--max-p", type=int, default=101)
    sp.add_argument("--crt", default=None, help="p,q: check the mod pq orbit against the CRT product")
    sp.set_defaults(func=cmd_modp)

    sp = sub.add_parser("render", help="SVG drawing of the packing")
    root_opts(sp)
    sp.add_argument("--tmax", type=int, default=None)
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--labels", action="store_true")
    sp.add_argument("--size", type=int, default=800)
    sp.add_argument("--cap", type=int, default=10**5)
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("verify", help="run the built-in invariant suite")
    sp.add_argument("--plant", choices=("generator", "n2"), default=None, help="inject a fault (negative control)")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        _err("interrupted")
        return 130
    except (InvalidInputError, OSError) as exc:
        _err(str(exc))
        return 2
    except (ArithmeticOverflowError, ResourceError) as exc:
        _err(str(exc))
        return 3
    except (InternalInvariantError, ApollonianError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

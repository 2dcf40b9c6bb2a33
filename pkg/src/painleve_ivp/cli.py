"""Command-line front end: ``painleve-ivp <subcommand> ...``.

Exit status is 2 for bad flags, 1 when the requested operation fails and
0 otherwise. Every subcommand accepts ``--json`` for machine output and
``--out FILE`` to write its main artifact.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import _svg
from .classify import classify
from .connection import fit_oscillation, fit_pole_train, predict
from .constants import constants, verify_constants
from .errors import PainleveError
from .ode_core import IntegratorOptions, InitialData, integrate
from .separatrix import find_sequence
from .stokes import (CASES, classify_from_stokes, constraint_residual, kapaev,
                     lemma_multipliers, leading_order_residual)

ATLAS_HEADER = ("i", "j", "a", "b", "verdict", "pole_count")
MAX_ATLAS_CELLS = 10 ** 6


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _jsonable(x):
    # NaN is not valid JSON; emit null instead
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _emit(args, payload: dict, text: str) -> None:
    body = json.dumps(_jsonable(payload), indent=1) if args.json else text
    print(body)


def _write(path, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _opts(args) -> IntegratorOptions:
    return IntegratorOptions() if args.rtol is None else IntegratorOptions(rtol=args.rtol)


def _table(rows, header) -> str:
    cols = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cols)


# ---- subcommands ---------------------------------------------------------


def cmd_integrate(args) -> int:
    if args.t_end >= 0:
        args.parser.error("--t-end must be negative")
    opts = _opts(args)
    if args.max_poles is not None:
        opts = opts.replace(max_poles=args.max_poles)
    traj = integrate(InitialData(args.a, args.b), args.t_end, opts)
    if args.out:
        traj.to_csv(args.out)
    if args.svg:
        _write(args.svg, _svg.trajectory_svg(traj, title=f"y(0) = {args.a:g}, y'(0) = {args.b:g}"))
    payload = {"a": args.a, "b": args.b, "t_end": float(traj.t[-1]), "samples": len(traj),
               "termination": traj.termination, "y_end": float(traj.y[-1]), "dy_end": float(traj.dy[-1]),
               **traj.sidecar()}
    text = (f"{len(traj)} samples to t = {traj.t[-1]:.6g} ({traj.termination}), "
            f"{len(traj.poles)} poles\ny = {traj.y[-1]:.17g}\ny' = {traj.dy[-1]:.17g}")
    if traj.poles:
        text += "\n" + _table([(k + 1, f"{p.t_p:.12g}", f"{p.h:.12g}") for k, p in enumerate(traj.poles)],
                              ["#", "t_p", "h"])
    _emit(args, payload, text)
    return 0


def cmd_classify(args) -> int:
    verdict = classify(InitialData(args.a, args.b), args.depth, _opts(args))
    if args.out:
        _write(args.out, json.dumps(_jsonable(verdict.to_json())) + "\n")
    _emit(args, verdict.to_json(), f"{verdict.tag}  (poles: {verdict.pole_count}, depth {verdict.depth:g})")
    return 0


def cmd_separatrix(args) -> int:
    kind = {"bn": "bn", "bn-tilde": "bn_tilde", "an": "an"}[args.kind]
    anchor = args.b if kind == "an" else args.a
    seq = find_sequence(kind, anchor, args.count, args.tol, depth=args.depth, opts=_opts(args), jobs=args.jobs)
    if args.out:
        seq.to_csv(args.out)
    payload = {"kind": kind, "anchor": anchor, "tolerance": seq.tolerance,
               "values": [{"n": v.n, "lo": v.lo, "hi": v.hi, "midpoint": v.value} for v in seq.values]}
    rows = [(r[0], f"{r[1]:.7f}", f"{r[2]:.5f}", f"{r[3]:.5f}", f"{r[4]:.2e}", f"{r[5]:.2e}") for r in seq.rows()]
    text = _table(rows, ["n", "found", "improved", "power_law", "err_improved", "err_power"])
    _emit(args, payload, text)
    return 0


def cmd_constants(args) -> int:
    c = constants()
    if args.verify:
        rows = verify_constants(args.tol)
        payload = {"rows": [{"name": r.name, "closed_form": [r.closed_form.real, r.closed_form.imag],
                             "quadrature": [r.quadrature.real, r.quadrature.imag], "residual": r.residual}
                            for r in rows]}
        text = _table([(r.name, f"{r.closed_form:.15g}", f"{r.quadrature:.15g}", f"{r.residual:.2e}") for r in rows],
                      ["name", "closed form", "quadrature", "residual"])
        if args.out:
            with open(args.out, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["name", "closed_re", "closed_im", "quad_re", "quad_im", "residual"])
                for r in rows:
                    w.writerow([r.name] + [f"{x:.17g}" for x in (r.closed_form.real, r.closed_form.imag,
                                                                 r.quadrature.real, r.quadrature.imag, r.residual)])
        _emit(args, payload, text)
        return 0 if all(r.residual <= args.tol for r in rows) else 1
    payload = c.as_dict()
    text = "\n".join(f"{k:5s} = {v}" for k, v in c.__dict__.items())
    if args.out:
        _write(args.out, json.dumps(payload, indent=1) + "\n")
    _emit(args, payload, text)
    return 0


def cmd_stokes(args) -> int:
    s = lemma_multipliers(args.case, args.a, args.b)
    res = constraint_residual(s)
    tag, params = kapaev(s)
    payload = {"case": args.case, "a": args.a, "b": args.b, "multipliers": s.to_json(),
               "type": tag, "constraints": res.to_json(),
               "leading_order_residual": leading_order_residual(s, drop_unit=args.case == "III"),
               "params": dict(zip(("d", "theta") if tag == "A" else ("rho", "sigma"), params))
               if tag != "B" else {"h": params}}
    if args.out:
        _write(args.out, json.dumps(_jsonable(payload), indent=1) + "\n")
    lines = [f"s{k} = {v:.12g}" for k, v in enumerate(s.as_tuple())]
    lines.append(f"type {classify_from_stokes(s)}; params {payload['params']}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_predict(args) -> int:
    pred = predict(args.case, args.a, args.b)
    payload = pred.to_json()
    if args.out:
        _write(args.out, json.dumps(_jsonable(payload), indent=1) + "\n")
    _emit(args, payload, f"case {pred.case}: {pred.params}")
    return 0


def cmd_fit(args) -> int:
    lo, hi = sorted(args.window)
    if hi >= 0:
        args.parser.error("--window must lie at negative t")
    depth = min(args.depth, lo)
    init = InitialData(args.a, args.b)
    opts = _opts(args)
    kind = args.kind
    if kind == "auto":
        kind = {"A": "oscillation", "C": "poles"}.get(classify(init, depth, opts).tag)
        if kind is None:
            print("error: verdict Undetermined at this depth; pass --kind", file=sys.stderr)
            return 1
    traj = integrate(init, depth, opts.replace(max_poles=100000))
    if kind == "oscillation":
        rep = fit_oscillation(traj, (lo, hi))
    else:
        rep = fit_pole_train([p for p in traj.poles if lo <= p.t_p <= hi], t_max=min(hi, -10.0))
    payload = {"a": args.a, "b": args.b, "window": [lo, hi], "kind": kind, **rep.to_json()}
    if args.out:
        _write(args.out, json.dumps(_jsonable(payload), indent=1) + "\n")
    _emit(args, payload, f"{kind}: {rep.params}  rms {rep.rms:.3g} over {rep.n_used} points")
    return 0


def _atlas_cell(job):
    i, j, a, b, depth, rtol = job
    opts = IntegratorOptions() if rtol is None else IntegratorOptions(rtol=rtol)
    try:
        v = classify(InitialData(a, b), depth, opts)
        tag, count = v.tag, v.pole_count if v.tag == "A" else -1
    except PainleveError:
        tag, count = "Undetermined", -1
    return i, j, a, b, tag, count


def cmd_atlas(args) -> int:
    na, nb = args.grid
    if na * nb > MAX_ATLAS_CELLS:
        args.parser.error(f"grid has {na * nb} cells, limit is {MAX_ATLAS_CELLS}")
    a_vals = np.linspace(*args.a_range, na) if na > 1 else np.array([args.a_range[0]])
    b_vals = np.linspace(*args.b_range, nb) if nb > 1 else np.array([args.b_range[0]])
    jobs = [(i, j, float(a), float(b), args.depth, args.rtol)
            for i, a in enumerate(a_vals) for j, b in enumerate(b_vals)]
    tags = [["Undetermined"] * nb for _ in range(na)]
    rows = []
    fh = open(args.out, "w", newline="") if args.out else None
    writer = csv.writer(fh or sys.stdout, lineterminator="\n")
    writer.writerow(ATLAS_HEADER)
    interrupted = False
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                results = ex.map(_atlas_cell, jobs, chunksize=max(1, len(jobs) // (8 * args.jobs)))
                for r in results:
                    rows.append(r)
                    writer.writerow([r[0], r[1], f"{r[2]:.17g}", f"{r[3]:.17g}", r[4], r[5]])
        else:
            for job in jobs:
                r = _atlas_cell(job)
                rows.append(r)
                writer.writerow([r[0], r[1], f"{r[2]:.17g}", f"{r[3]:.17g}", r[4], r[5]])
    except KeyboardInterrupt:
        interrupted = True
    finally:
        if fh:
            fh.close()
    for i, j, _, _, tag, _ in rows:
        tags[i][j] = tag
    if args.svg:
        _write(args.svg, _svg.atlas_svg(a_vals, b_vals, tags))
    if interrupted:
        print(f"interrupted after {len(rows)} of {len(jobs)} cells; partial results written", file=sys.stderr)
        return 1
    return 0


# ---- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--out", metavar="FILE", help="write the main artifact to FILE")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    common.add_argument("--rtol", type=_finite, default=None, help="integrator relative tolerance")
    common.add_argument("--depth", type=_finite, default=-60.0, help="most negative t examined")

    p = argparse.ArgumentParser(prog="painleve-ivp", description="Real solutions of y'' = 6y^2 + t on t < 0.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("integrate", parents=[common], help="integrate through poles to --t-end")
    s.add_argument("--a", type=_finite, required=True, help="y(0)")
    s.add_argument("--b", type=_finite, required=True, help="y'(0)")
    s.add_argument("--t-end", type=_finite, default=-20.0)
    s.add_argument("--max-poles", type=_positive_int, default=None)
    s.add_argument("--svg", metavar="FILE", help="line plot of the trajectory")
    s.set_defaults(func=cmd_integrate)

    s = sub.add_parser("classify", parents=[common], help="A / C / Undetermined verdict")
    s.add_argument("--a", type=_finite, required=True)
    s.add_argument("--b", type=_finite, required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("separatrix", parents=[common], help="locate separatrix sequences")
    s.add_argument("kind", choices=["bn", "bn-tilde", "an"])
    s.add_argument("--a", type=_finite, default=0.0, help="fixed y(0) for bn, bn-tilde")
    s.add_argument("--b", type=_finite, default=0.0, help="fixed y'(0) for an")
    s.add_argument("--count", type=_positive_int, default=5)
    s.add_argument("--tol", type=_finite, default=1e-6)
    s.set_defaults(func=cmd_separatrix)

    s = sub.add_parser("constants", parents=[common], help="asymptotic constants")
    s.add_argument("--verify", action="store_true", help="compare closed forms with quadrature")
    s.add_argument("--tol", type=_finite, default=1e-10)
    s.set_defaults(func=cmd_constants)

    for name, fn, text in (("stokes", cmd_stokes, "leading-order Stokes multipliers"),
                           ("predict", cmd_predict, "connection parameters for large data")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--case", choices=CASES, required=True)
        s.add_argument("--a", type=_finite, default=0.0)
        s.add_argument("--b", type=_finite, default=0.0)
        s.set_defaults(func=fn)

    s = sub.add_parser("fit", parents=[common], help="fit (d, theta) or (rho, sigma) on a window")
    s.add_argument("--a", type=_finite, required=True)
    s.add_argument("--b", type=_finite, required=True)
    s.add_argument("--window", type=_finite, nargs=2, metavar=("T_LO", "T_HI"), required=True)
    s.add_argument("--kind", choices=["auto", "oscillation", "poles"], default="auto")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("atlas", parents=[common], help="verdicts over an (a, b) grid")
    s.add_argument("--a-range", type=_finite, nargs=2, default=[0.0, 0.0], metavar=("LO", "HI"))
    s.add_argument("--b-range", type=_finite, nargs=2, default=[0.0, 9.0], metavar=("LO", "HI"))
    s.add_argument("--grid", type=_positive_int, nargs=2, default=[1, 91], metavar=("NA", "NB"))
    s.add_argument("--svg", metavar="FILE", help="heat map of the verdicts")
    s.set_defaults(func=cmd_atlas)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    if args.rtol is not None and not 0 < args.rtol < 1:
        parser.error("--rtol must lie in (0, 1)")
    if args.depth >= 0:
        parser.error("--depth must be negative")
    try:
        return args.func(args)
    except (PainleveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

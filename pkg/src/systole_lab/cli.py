"""Command-line front end.

Usage::

    systole-lab homology --catalog s4_surgery_Y --format json
    systole-lab validate complex.json
    systole-lab systole complex.json --degree 1 --mode z2
    systole-lab lattice loewner --hex | --random N | --gram gram.json
    systole-lab lattice minima --gram gram.json
    systole-lab family hodge --j 10,20,50 --format csv [--csv out.csv] [--svg out.svg]
    systole-lab mod2cycle --j 10

Exit status: 0 success, 1 bad input or failed validation, 2 infeasible
request (e.g. no nontrivial class), 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import discsys, families, homology, lattice

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class BadInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def fmt_float(x: float) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


def seed_from_env() -> int:
    try:
        return int(os.environ.get("SYSTOLE_LAB_SEED", "0"))
    except ValueError:
        raise UsageError("SYSTOLE_LAB_SEED must be an integer") from None


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise BadInputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise BadInputError(f"{path} is not valid JSON: {e}") from None


def _load_complex(path: str) -> homology.ChainComplex:
    obj = _load_json(path)
    try:
        return homology.ChainComplex.from_json(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise BadInputError(f"{path} is not a chain complex: {e}") from None


def _catalog(name: str) -> homology.ChainComplex:
    try:
        return homology.catalog(name)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from None
    except ValueError as e:
        raise UsageError(str(e)) from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- verbs -----------------------------------------------------------------

def cmd_homology(args, out):
    c = _catalog(args.catalog) if args.catalog else _load_complex(args.file)
    try:
        h = homology.homology(c)
    except homology.InvalidComplexError as e:
        raise BadInputError(f"invalid complex: {e}") from None
    if args.format == "json":
        obj = h.to_json()
        obj["complex"] = c.to_json()
        out.write(_dump(obj))
    else:
        out.write(f"{'k':>3} {'cells':>6} {'betti':>6} {'betti_mod2':>11}  torsion\n")
        for k in range(c.top_degree + 1):
            tor = ",".join(str(t) for t in h.torsion[k]) or "-"
            out.write(f"{k:>3} {c.cells(k):>6} {h.betti[k]:>6} {h.betti_mod2[k]:>11}  {tor}\n")
    return EXIT_OK


def cmd_validate(args, out):
    c = _catalog(args.catalog) if args.catalog else _load_complex(args.file)
    rep = homology.validate_complex(c)
    if args.format == "json":
        out.write(_dump({"valid": rep.valid, "problems": rep.problems,
                         "bad_degrees": rep.bad_degrees}))
    else:
        out.write("valid\n" if rep.valid else "invalid\n")
        for p in rep.problems:
            out.write(f"  {p}\n")
    return EXIT_OK if rep.valid else EXIT_BAD_INPUT


def cmd_systole(args, out):
    if args.catalog:
        wc = discsys.WeightedComplex.build(_catalog(args.catalog))
    else:
        obj = _load_json(args.file)
        try:
            wc = discsys.WeightedComplex.from_json(obj)
        except (KeyError, TypeError, ValueError) as e:
            raise BadInputError(f"{args.file} is not a weighted complex: {e}") from None
    if not homology.validate_complex(wc.complex):
        raise BadInputError("invalid complex: d d != 0 or bad shapes")
    if not 0 <= args.degree <= wc.complex.top_degree:
        raise UsageError(f"degree {args.degree} outside 0..{wc.complex.top_degree}")
    res = discsys.systole(wc, args.degree, args.mode, box=args.box)
    if args.format == "json":
        out.write(_dump(res.to_json()))
    else:
        out.write(f"systole_{args.degree} ({args.mode}) = {fmt_float(Fraction(res.value))}"
                  f" ~ {fmt_float(float(res.value))}\n")
        out.write(f"certificate: {res.certificate}\n")
        out.write(f"witness: {list(res.witness.coefficients)}\n")
    return EXIT_OK


def cmd_lattice(args, out):
    if args.action == "minima":
        if not args.gram:
            raise UsageError("lattice minima needs --gram FILE")
        tori = [_load_gram(args.gram)]
    else:
        picked = sum(bool(x) for x in (args.hex, args.random, args.gram))
        if picked != 1:
            raise UsageError("choose exactly one of --hex, --random N, --gram FILE")
        if args.hex:
            tori = [lattice.hexagonal()]
        elif args.gram:
            tori = [_load_gram(args.gram)]
        else:
            rng = random.Random(seed_from_env())
            tori = [lattice.random_gram_2d(rng) for _ in range(args.random)]

    if args.action == "minima":
        t = tori[0]
        m = lattice.successive_minima(t)
        obj = {
            "lambda1_sq": fmt_float(m.lambda1_sq), "lambda2_sq": fmt_float(m.lambda2_sq),
            "lambda1": fmt_float(m.lambda1), "lambda2": fmt_float(m.lambda2),
            "v1": list(m.v1), "v2": list(m.v2),
            "hermite_ratio": fmt_float(lattice.gromov_torus_ratio(t)),
        }
        if args.format == "json":
            out.write(_dump(obj))
        else:
            for k in sorted(obj):
                out.write(f"{k}: {obj[k]}\n")
        return EXIT_OK

    for t in tori:
        if t.dimension != 2:
            raise BadInputError("the Loewner ratio needs a 2-dimensional Gram matrix")
    sq = [lattice.loewner_ratio_exact_sq(t) for t in tori]
    ratios = [math.sqrt(s) for s in sq]
    worst = max(ratios)
    obj = {
        "count": len(tori),
        "max_ratio": fmt_float(worst),
        "bound": fmt_float(lattice.LOEWNER_CONSTANT),
        "holds": worst <= lattice.LOEWNER_CONSTANT + 1e-9,
    }
    if len(tori) == 1:
        obj["ratio_sq"] = fmt_float(sq[0])
    if args.format == "json":
        out.write(_dump(obj))
    else:
        for k in sorted(obj):
            out.write(f"{k}: {obj[k]}\n")
    return EXIT_OK if obj["holds"] else EXIT_BAD_INPUT


def _load_gram(path: str) -> lattice.FlatTorus:
    obj = _load_json(path)
    try:
        return lattice.FlatTorus.from_json(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise BadInputError(f"{path} is not a Gram matrix: {e}") from None


def _parse_js(text: str) -> list[int]:
    try:
        js = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--j expects comma-separated integers, got {text!r}") from None
    if not js:
        raise UsageError("--j needs at least one value")
    return js


def family_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(families.FreedomRow.COLUMNS)
    for r in rows:
        w.writerow([r.j, fmt_float(r.volume), fmt_float(r.sys1_bound),
                    fmt_float(r.sysk_bound), fmt_float(r.ratio), r.bound_kind])
    return buf.getvalue()


def family_svg(model: str, rows) -> str:
    """Static log-log plot of the freedom ratio against j."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = [(r.j, r.ratio) for r in rows if r.j > 0 and 0 < r.ratio < math.inf]
    if not pts:
        raise UsageError("nothing to plot: need j > 0 with finite positive ratios")
    with matplotlib.rc_context({"svg.hashsalt": "systole-lab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=model)
        ax.set_xlabel("j")
        ax.set_ylabel("vol / (sys1 sysk)")
        ax.set_title(f"{model} family freedom ratio")
        ax.legend()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return buf.getvalue()


def cmd_family(args, out):
    js = _parse_js(args.j)
    try:
        rows = families.freedom_table(args.model, js)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.csv:
        Path(args.csv).write_text(family_csv(rows))
    if args.svg:
        Path(args.svg).write_text(family_svg(args.model, rows))
    if args.format == "csv":
        out.write(family_csv(rows))
    elif args.format == "svg":
        out.write(family_svg(args.model, rows))
    elif args.format == "json":
        out.write(_dump([
            {"j": r.j, "volume": fmt_float(r.volume), "sys1_bound": fmt_float(r.sys1_bound),
             "sysk_bound": fmt_float(r.sysk_bound), "ratio": fmt_float(r.ratio),
             "bound_kind": r.bound_kind}
            for r in rows
        ]))
    else:
        out.write(f"{'j':>6} {'volume':>16} {'sys1_bound':>16} {'sysk_bound':>16} "
                  f"{'ratio':>16}  bound_kind\n")
        for r in rows:
            out.write(f"{r.j:>6} {fmt_float(r.volume):>16} {fmt_float(r.sys1_bound):>16} "
                      f"{fmt_float(r.sysk_bound):>16} {fmt_float(r.ratio):>16}  {r.bound_kind}\n")
    return EXIT_OK


def cmd_mod2cycle(args, out):
    try:
        m = families.mod2_cycle(args.j)
    except ValueError as e:
        raise UsageError(str(e)) from None
    cb = families.calibration_bound(args.j)
    if args.format == "json":
        out.write(_dump({
            "j": m.j,
            "area_c": fmt_float(m.area_c),
            "area": fmt_float(m.area),
            "calibration_bound": fmt_float(cb),
            "beats_calibration_bound": m.area < cb,
            "congruence_checked": m.congruence_checked,
            "pieces": [
                {"kind": p.kind, "copy": p.copy, "shear_power": p.shear_power,
                 "support": [fmt_float(p.support[0]), fmt_float(p.support[1])],
                 "mirrored": p.mirrored, "area": fmt_float(p.area)}
                for p in m.pieces
            ],
        }))
    else:
        out.write(f"j = {m.j}: {len(m.pieces)} pieces, area(c) = {fmt_float(m.area_c)}\n")
        out.write(f"area(d doubled) = {fmt_float(m.area)}\n")
        out.write(f"calibration bound = {fmt_float(cb)}\n")
        for p in m.pieces:
            lo, hi = p.support
            out.write(f"  {p.kind:<8} copy {p.copy:>3} shear^{p.shear_power:<3} "
                      f"[{fmt_float(float(lo))}, {fmt_float(float(hi))}]{' mirrored' if p.mirrored else ''}"
                      f"  area {fmt_float(p.area)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="systole-lab", description="Computational systolic geometry toolkit.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("file", nargs="?", help="ChainComplex JSON file")
        g.add_argument("--catalog", help="catalog complex name, e.g. klein or W(2)")

    sp = sub.add_parser("homology", help="Betti numbers, torsion, mod-2 Betti numbers")
    source(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_homology)

    sp = sub.add_parser("validate", help="check shapes and d d = 0")
    source(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("systole", help="discrete systole of a weighted complex")
    source(sp)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--mode", choices=discsys.MODES, default="all")
    sp.add_argument("--box", type=int, default=discsys.DEFAULT_BOX,
                    help="coefficient cap for zero-weight cells")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_systole)

    sp = sub.add_parser("lattice", help="flat-torus minima and Loewner ratios")
    sp.add_argument("action", choices=("loewner", "minima"))
    sp.add_argument("--hex", action="store_true")
    sp.add_argument("--random", type=int, metavar="N")
    sp.add_argument("--gram", metavar="FILE")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("family", help="freedom ratio table of a metric family")
    sp.add_argument("model", choices=("gromov", "hodge"))
    sp.add_argument("--j", required=True, help="comma-separated ascending j values")
    sp.add_argument("--format", choices=("text", "csv", "json", "svg"), default="text")
    sp.add_argument("--csv", metavar="PATH", help="also write CSV here")
    sp.add_argument("--svg", metavar="PATH", help="also write a log-log SVG plot here")
    sp.set_defaults(func=cmd_family)

    sp = sub.add_parser("mod2cycle", help="mod-2 relative cycle of the Hodge family")
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_mod2cycle)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as e:
        err.write(parser.format_usage())
        err.write(f"{e}\n")
        return EXIT_USAGE
    except BadInputError as e:
        err.write(f"error: {e}\n")
        return EXIT_BAD_INPUT
    except discsys.NoNontrivialClassError as e:
        err.write(f"infeasible: {e}\n")
        return EXIT_INFEASIBLE
    except discsys.SearchBoxExhaustedError as e:
        err.write(f"infeasible: {e}\n")
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())

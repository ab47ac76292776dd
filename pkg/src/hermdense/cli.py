"""Command-line interface.

Exit codes are a frozen contract:
  0 success, 1 identity failure, 2 input/validation error,
  3 density or fit not stabilized, 4 split class, 5 budget exceeded.

All numerics are emitted as exact rational strings; output is byte-stable
across runs and worker counts.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .errors import (
    CountInfeasible,
    Degenerate,
    FitNotStabilized,
    HermdenseError,
    InPiM,
    NotIntegral,
    NotInLattice,
    NotStabilized,
    OddPrimeRequired,
    OddRank,
    ParamMismatch,
    RankOrder,
    SplitClass,
    WitnessNotRepresentable,
)
from .lattice import (
    HermLattice,
    block_layout,
    fundamental_invariants,
    is_integral,
    normal_form,
    orthogonal_direct_sum,
    same_isometry_class_as_Mn,
    standard_H,
    standard_Mn,
)
from .density import (
    density_polynomial,
    density_series,
    derived_density,
    whittaker_value,
)
from .identities import run_suite

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NOT_STABILIZED = 3
EXIT_SPLIT = 4
EXIT_BUDGET = 5


def _budget_from(args) -> int | None:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("HERMDENSE_BUDGET")
    return int(env) if env else None


def _load_lattice(path: str) -> HermLattice:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON in {path}: {exc}")
    return HermLattice.from_json(data)


def _emit(data: dict, args) -> None:
    if getattr(args, "output", "json") == "table":
        for k, v in data.items():
            print(f"{k}: {json.dumps(v)}")
    else:
        print(json.dumps(data))


def _frac(x: Fraction) -> str:
    return str(x)


def cmd_info(args) -> int:
    L = _load_lattice(args.file)
    integral = is_integral(L)
    layout = block_layout(L)
    try:
        nf = normal_form(L)
        witness_exact = True
        unit_blocks = [[_frac(b), e] for b, e in nf.unit_blocks]
        hyp_blocks = list(nf.hyperbolic_blocks)
    except WitnessNotRepresentable:
        witness_exact = False
        unit_blocks = [[_frac(t[1]), t[2]] for t in layout if t[0] == "unit"]
        hyp_blocks = [t[1] for t in layout if t[0] == "hyp"]
    out = {
        "p": L.p,
        "rank": L.rank,
        "integral": integral,
        "normal_form": {
            "unit_blocks": unit_blocks,
            "hyperbolic_blocks": hyp_blocks,
            "witness_exact": witness_exact,
        },
        "class": "split" if same_isometry_class_as_Mn(L) else "nonsplit",
    }
    if integral:
        inv = fundamental_invariants(L)
        out["fundamental_invariants"] = list(inv)
        out["val"] = sum(inv)
    else:
        out["fundamental_invariants"] = None
        out["val"] = None
    _emit(out, args)
    return EXIT_OK


def _target_for(args, L) -> HermLattice:
    if args.target:
        M = _load_lattice(args.target)
        if M.p != L.p:
            raise ParamMismatch("target prime differs from source prime")
    else:
        M = standard_Mn(L.p, L.rank)
    if args.k:
        M = orthogonal_direct_sum(standard_H(L.p, args.k), M)
    return M


def cmd_density(args) -> int:
    L = _load_lattice(args.file)
    M = _target_for(args, L)
    budget = _budget_from(args)
    series = density_series(
        M, L, args.d_max, d_min=args.d_min, budget=budget, workers=args.workers
    )
    out = {
        "den": _frac(series.value()) if series.stabilized_at is not None else None,
        "stabilized_at": series.stabilized_at,
        "series": [[d, _frac(r)] for d, r in series.ratios],
        "counts": [[d, c] for d, c in series.counts],
    }
    if series.stabilized_at is None:
        _emit(out, args)
        return EXIT_NOT_STABILIZED
    _emit(out, args)
    return EXIT_OK


def cmd_denpoly(args) -> int:
    L = _load_lattice(args.file)
    M = standard_Mn(L.p, L.rank)
    budget = _budget_from(args)
    P = density_polynomial(M, L, args.k_max, budget=budget, workers=args.workers)
    _emit(
        {
            "coeffs": [_frac(c) for c in P.coeffs],
            "grid": [[k, _frac(v)] for k, v in P.grid],
            "fit_order": P.fit_order,
        },
        args,
    )
    return EXIT_OK


def cmd_pden(args, label: str) -> int:
    L = _load_lattice(args.file)
    budget = _budget_from(args)
    if label == "int_z":
        from .identities import int_z_even

        val = int_z_even(L, budget=budget, workers=args.workers)
        Lpoly = None
    else:
        val = derived_density(L, budget=budget, workers=args.workers)
        Lpoly = L
    out = {label: _frac(val)}
    if Lpoly is not None:
        P = density_polynomial(
            standard_Mn(L.p, L.rank), Lpoly, args.k_max, budget=budget,
            workers=args.workers,
        )
        out["series"] = [[k, _frac(v)] for k, v in P.grid]
        out["poly"] = [_frac(c) for c in P.coeffs]
    _emit(out, args)
    return EXIT_OK


def cmd_whittaker(args) -> int:
    L = _load_lattice(args.file)
    budget = _budget_from(args)
    rows = []
    for s in range(args.s_max + 1):
        val = whittaker_value(
            L,
            s,
            comparison_rank=args.comparison_rank,
            budget=budget,
            workers=args.workers,
        )
        rows.append((s, val))
    if args.emit == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["s", "value-num", "value-den"])
        for s, val in rows:
            writer.writerow([s, val.numerator, val.denominator])
        sys.stdout.write(buf.getvalue())
    else:
        _emit({"values": [[s, _frac(v)] for s, v in rows]}, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    budget = _budget_from(args)
    reports = run_suite(
        args.p,
        budget=budget,
        workers=args.workers,
        include_stretch=not args.skip_stretch,
    )
    for rep in reports:
        print(rep.line())
    n_fail = sum(1 for r in reports if r.passed is False)
    n_inf = sum(1 for r in reports if r.passed is None)
    print(f"# {len(reports)} identities: "
          f"{len(reports) - n_fail - n_inf} pass, {n_fail} fail, {n_inf} infeasible")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.to_json_dict() for r in reports], fh, indent=2)
    if n_fail:
        return EXIT_FAIL
    if n_inf:
        return EXIT_BUDGET
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hermdense",
        description="Exact local densities of hermitian lattices over Q_p(sqrt p).",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, needs_file=True):
        if needs_file:
            sp.add_argument("file", help="lattice JSON file")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--budget", type=int, default=None,
                        help="node budget (default env HERMDENSE_BUDGET or 2e9)")
        sp.add_argument("--output", choices=["json", "table"], default="json")

    sp = sub.add_parser("info", help="structure report for a lattice file")
    common(sp)

    sp = sub.add_parser("density", help="local density Den(M, L)")
    common(sp)
    sp.add_argument("--target", help="target lattice JSON (default M_n)")
    sp.add_argument("--k", type=int, default=0, help="add H^k to the target")
    sp.add_argument("--d-max", type=int, default=4)
    sp.add_argument("--d-min", type=int, default=1)

    sp = sub.add_parser("denpoly", help="density polynomial against M_n")
    common(sp)
    sp.add_argument("--k-max", type=int, default=None)

    for name in ("pden", "int-y", "int-z"):
        sp = sub.add_parser(name, help=f"derived density ({name})")
        common(sp)
        sp.add_argument("--k-max", type=int, default=None)

    sp = sub.add_parser("whittaker", help="Fourier-coefficient value table")
    common(sp)
    sp.add_argument("--s-max", type=int, default=2)
    sp.add_argument("--comparison-rank", type=int, default=None)
    sp.add_argument("--emit", choices=["json", "csv"], default="json")

    sp = sub.add_parser("verify", help="run the identity suite")
    common(sp, needs_file=False)
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--skip-stretch", action="store_true")
    sp.add_argument("--json", help="also write full reports to this path")
    return ap


_LABEL = {"pden": "partial_den", "int-y": "int_y", "int-z": "int_z"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "info":
            return cmd_info(args)
        if args.command == "density":
            return cmd_density(args)
        if args.command == "denpoly":
            return cmd_denpoly(args)
        if args.command in ("pden", "int-y", "int-z"):
            return cmd_pden(args, _LABEL[args.command])
        if args.command == "whittaker":
            return cmd_whittaker(args)
        if args.command == "verify":
            return cmd_verify(args)
        raise ValueError(f"unknown command {args.command}")
    except SplitClass as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPLIT
    except (NotStabilized, FitNotStabilized) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_STABILIZED
    except CountInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OddRank as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (
        ValueError,
        OddPrimeRequired,
        NotIntegral,
        Degenerate,
        ParamMismatch,
        RankOrder,
        NotInLattice,
        InPiM,
        HermdenseError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

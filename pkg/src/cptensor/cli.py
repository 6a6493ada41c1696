"""Command-line interface: check, verify, gen.

Exit codes for ``check``: 0 completely positive, 10 not completely
positive, 20 indeterminate, 1 input error.  ``verify`` exits 0 when the
result re-verifies, 2 when it does not, 1 on input errors.  All
randomness is controlled by --seed.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, formats
from .fixtures import FixtureError, cp_random, fixture_ids, load_fixture, notcp_random
from .pipeline import CpOptions, CpStatus, check_cp, verify_outcome
from .sdp import SolverOptions

EXIT_CP = 0
EXIT_NOT_CP = 10
EXIT_INDETERMINATE = 20
EXIT_INPUT_ERROR = 1
EXIT_VERIFY_FAILED = 2

_STATUS_EXIT = {
    CpStatus.COMPLETELY_POSITIVE: EXIT_CP,
    CpStatus.NOT_COMPLETELY_POSITIVE: EXIT_NOT_CP,
    CpStatus.INDETERMINATE: EXIT_INDETERMINATE,
}


def _add_tolerance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--degree", type=int, default=None,
                   help="even objective degree (default: smallest even value above the order)")
    p.add_argument("--kmax", type=int, default=None,
                   help="largest relaxation level to try (default: start level + 3)")
    p.add_argument("--seed", type=int, default=0, help="seed for the generic objective")
    p.add_argument("--tol-rank", type=float, default=CpOptions.tol_rank,
                   help="absolute singular-value cutoff for the rank rule")
    p.add_argument("--tol-feas", type=float, default=CpOptions.tol_feas,
                   help="feasibility tolerance for the flatness check")
    p.add_argument("--tol-residual", type=float, default=CpOptions.tol_residual,
                   help="relative reconstruction residual accepted for a decomposition")
    p.add_argument("--no-fast-path", action="store_true",
                   help="disable the entrywise-nonnegativity shortcut")


def _options_from_args(args) -> CpOptions:
    return CpOptions(
        degree=args.degree,
        k_max=args.kmax,
        seed=args.seed,
        tol_rank=args.tol_rank,
        tol_feas=args.tol_feas,
        tol_residual=args.tol_residual,
        fast_path=not args.no_fast_path,
        solver=SolverOptions(verbose=False),
    )


def _emit(text: str, out_path: str | None, quiet: bool) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
        if not quiet:
            print(f"wrote {out_path}")
    elif not quiet:
        print(text)


def cmd_check(args) -> int:
    try:
        tensor = formats.read_tensor(args.input)
    except formats.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        opts = _options_from_args(args)
        outcome = check_cp(tensor, opts)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.format == "pretty":
        text = formats.format_pretty(outcome, tensor)
    else:
        text = formats.write_json(formats.outcome_to_doc(outcome, tensor), None)
    _emit(text, args.out, args.quiet)
    return _STATUS_EXIT[outcome.status]


def cmd_verify(args) -> int:
    try:
        tensor = formats.read_tensor(args.tensor)
        outcome, doc = formats.read_outcome(args.result)
    except formats.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if (doc.get("order"), doc.get("dim")) != (tensor.m, tensor.n):
        print(
            f"error: result is for order {doc.get('order')}, dim {doc.get('dim')} "
            f"but the tensor has order {tensor.m}, dim {tensor.n}",
            file=sys.stderr,
        )
        return EXIT_INPUT_ERROR
    ok, report = verify_outcome(tensor, outcome)
    if not args.quiet:
        for key, value in report.items():
            print(f"{key}: {value}")
        print("verification:", "PASS" if ok else "FAIL")
    return 0 if ok else EXIT_VERIFY_FAILED


def cmd_gen(args) -> int:
    try:
        if args.kind == "paper-fixture":
            if not args.fixture_id:
                print(
                    f"error: paper-fixture needs an id; known: {', '.join(fixture_ids())}",
                    file=sys.stderr,
                )
                return EXIT_INPUT_ERROR
            tensor, meta = load_fixture(args.fixture_id)
            doc = formats.tensor_to_doc(tensor, name=meta["name"], provenance=meta["provenance"])
        else:
            if args.m is None or args.n is None or args.r is None:
                print("error: --m, --n and --r are required", file=sys.stderr)
                return EXIT_INPUT_ERROR
            if args.kind == "cp-random":
                tensor = cp_random(args.m, args.n, args.r, args.seed)
                name = f"cp-random-m{args.m}-n{args.n}-r{args.r}-seed{args.seed}"
            else:
                tensor = notcp_random(args.m, args.n, args.r, args.seed)
                name = f"notcp-random-m{args.m}-n{args.n}-r{args.r}-seed{args.seed}"
            doc = formats.tensor_to_doc(tensor, name=name)
    except (FixtureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    _emit(formats.write_json(doc, None), args.out, args.quiet)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cptensor",
        description="Decide complete positivity of a symmetric tensor: "
        "produce a nonnegative rank-one decomposition or an infeasibility certificate.",
    )
    parser.add_argument("--version", action="version", version=f"cptensor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="decide complete positivity of a tensor file")
    p_check.add_argument("input", help="tensor document (JSON)")
    _add_tolerance_flags(p_check)
    p_check.add_argument("--out", default=None, help="write the result document here")
    p_check.add_argument("--format", choices=("json", "pretty"), default="json")
    p_check.add_argument("--quiet", action="store_true")
    p_check.set_defaults(func=cmd_check)

    p_verify = sub.add_parser("verify", help="re-verify a result against its tensor")
    p_verify.add_argument("tensor", help="tensor document (JSON)")
    p_verify.add_argument("result", help="result document (JSON)")
    p_verify.add_argument("--quiet", action="store_true")
    p_verify.set_defaults(func=cmd_verify)

    p_gen = sub.add_parser("gen", help="generate tensor documents")
    p_gen.add_argument("kind", choices=("cp-random", "notcp-random", "paper-fixture"))
    p_gen.add_argument("fixture_id", nargs="?", default=None,
                       help="fixture id for paper-fixture (e.g. sec2, ex4.5)")
    p_gen.add_argument("--m", type=int, default=None, help="tensor order")
    p_gen.add_argument("--n", type=int, default=None, help="tensor dimension")
    p_gen.add_argument("--r", type=int, default=None, help="number of generators")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default=None)
    p_gen.add_argument("--format", choices=("json",), default="json")
    p_gen.add_argument("--quiet", action="store_true")
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

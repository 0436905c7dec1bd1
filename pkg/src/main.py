import argparse
import logging
import sys
import traceback

from controller.controller import Controller
from model.model import EXIT_ERROR


def build_parser():
    # type: () -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(
        prog="shapecast",
        description="Gradual refinement type checker for tensor shapes.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--stub", action="append", dest="stubs", metavar="FILE",
                        help="extra stub file, loaded after the prelude (repeatable)")
    common.add_argument("--smt-out", metavar="DIR", help="write unknown queries as SMT-LIB 2")
    common.add_argument("--smt-solver", metavar="CMD", help="external solver for unknown queries")
    common.add_argument("--dump-chc", metavar="FILE", help="write the inferred clauses")
    common.add_argument("--fuel", type=int, help="reduction steps before giving up")
    common.add_argument("--no-poly", dest="poly", action="store_false", default=None,
                        help="do not split shape-polymorphic functions")
    common.add_argument("--json", action="store_true", default=None, help="print JSON")
    common.add_argument("-v", "--verbose", action="count", default=0)

    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", parents=[common], help="type-check a program")
    check.add_argument("file")
    check.add_argument("--emit", action="store_true", help="also print the elaboration")
    elaborate = sub.add_parser("elaborate", parents=[common], help="print the elaborated program")
    elaborate.add_argument("file")
    elaborate.add_argument("--emit", metavar="FILE",
                           help="write the elaborated program to FILE instead of printing it")
    run = sub.add_parser("run", parents=[common], help="check and evaluate a program")
    run.add_argument("file")
    run.add_argument("args", nargs="*", metavar="ARG",
                     help="values the last binding is applied to: 2, true, [1;2], tensor[20]")
    prop = sub.add_parser("proptest", parents=[common], help="check the gradual guarantees")
    prop.add_argument("--cases", type=int, default=100)
    prop.add_argument("--seed", type=int, default=0)
    prop.add_argument("--size", type=int, default=3, help="operations per generated program")
    prop.add_argument("--plot", metavar="PNG", help="save a chart of the outcomes")
    return parser


def settings_from_args(args):
    # type: (argparse.Namespace) -> dict
    """Settings given on the command line; absent flags are left out."""
    flags = {
        "stubs": args.stubs, "smt_out": args.smt_out, "smt_solver": args.smt_solver,
        "dump_chc": args.dump_chc, "fuel": args.fuel, "poly": args.poly, "json": args.json,
    }
    return {k: v for k, v in flags.items() if v is not None}


def configure_logging(verbosity):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        controller = Controller(settings_from_args(args))
        match args.command:
            case "check":
                return controller.check(args.file, emit=args.emit, verbose=args.verbose > 0)
            case "elaborate":
                return controller.elaborate(args.file, args.emit, verbose=args.verbose > 0)
            case "run":
                return controller.run(args.file, args.args, args.fuel)
            case "proptest":
                return controller.proptest(args.cases, args.seed, args.fuel, args.size, args.plot)
    except Exception as exc:
        traceback.print_exc()
        print(f"Error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())

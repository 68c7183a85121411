"""Command-line driver.

Exit codes: 0 when every reported verdict is true, 1 when one is false,
2 on input or usage errors.
"""

import argparse
import json
import sys
from functools import partial
from typing import List, Optional, Sequence, TextIO

import structlog

from src.config import settings
from src.exceptions import SpaceFormatError, UltrametricError
from src.logging_config import configure_logging
from src.models import CheckFlag
from src.services.analysis_service import analysis_service
from src.services.generator_service import generator_service
from src.ultrametric.funcspace import embed_space, parse_degree_spec
from src.ultrametric.isometry import extend_isometry, isometric
from src.ultrametric.nerve import build_nerve
from src.ultrametric.twostruct import decomposition_tree, from_space, nerve_matches_decomposition
from src.utils.rational import format_rational, parse_rational_list
from src.utils.rendering import render_tree, render_verdicts
from src.utils.space_io import dump_space, dump_tree, load_space, tree_to_model, write_space

logger = structlog.get_logger(__name__)

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_ERROR = 2

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def parse_map(text: str) -> dict:
    """Read ``"a:b,c:d"`` into ``{"a": "b", "c": "d"}``."""
    mapping = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        source, sep, target = item.partition(":")
        if not sep or not source.strip() or not target.strip():
            raise SpaceFormatError(f"expected 'x:y' in map, got {item!r}")
        if source.strip() in mapping:
            raise SpaceFormatError(f"point {source.strip()} mapped twice")
        mapping[source.strip()] = target.strip()
    return mapping


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors go to a chosen stream."""

    def __init__(self, *args, err: Optional[TextIO] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.err = err

    def error(self, message: str):
        stream = self.err or sys.stderr
        self.print_usage(stream)
        stream.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_ERROR)


def build_parser(err: Optional[TextIO] = None) -> argparse.ArgumentParser:
    sub_parser = partial(UsageParser, err=err)
    parser = UsageParser(prog="ultrametric", description=settings.APP_NAME, err=err)
    parser.add_argument(
        "--log-level",
        default="WARNING",
        type=str.upper,
        choices=LOG_LEVELS,
        help="diagnostic log level (default WARNING)",
    )
    parser.add_argument("--log-json", action="store_true", help="emit diagnostics as JSON")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=sub_parser)

    validate = commands.add_parser("validate", help="check the ultrametric axioms")
    validate.add_argument("file")

    info = commands.add_parser("info", help="spectrum, degrees and property h")
    info.add_argument("file")
    info.add_argument("--json", action="store_true")

    nerve = commands.add_parser("nerve", help="print the nerve")
    nerve.add_argument("file")
    nerve.add_argument("--json", action="store_true", help="machine format")

    check = commands.add_parser("check", help="decide homogeneity and related properties")
    check.add_argument("file")
    for flag in CheckFlag:
        check.add_argument(f"--{flag.value}", dest="flags", action="append_const", const=flag)
    check.add_argument("--brute-force", action="store_true", help="cross-check by exhaustive search")

    extend = commands.add_parser("extend", help="extend a partial isometry to the whole space")
    extend.add_argument("file")
    extend.add_argument("--map", required=True, dest="mapping", help='e.g. "a:b,c:d"')

    embed = commands.add_parser("embed", help="canonical embedding into the product space")
    embed.add_argument("file")
    embed.add_argument("--json", action="store_true")

    iso = commands.add_parser("isometric", help="decide whether two spaces are isometric")
    iso.add_argument("first")
    iso.add_argument("second")

    decompose = commands.add_parser("decompose", help="modular decomposition tree")
    decompose.add_argument("file")
    decompose.add_argument("--json", action="store_true", help="machine format")
    decompose.add_argument("--verify-nerve", action="store_true", help="compare with the nerve")

    gen = commands.add_parser("gen", help="generate a space file")
    kinds = gen.add_subparsers(dest="kind", required=True, parser_class=sub_parser)
    cantor = kinds.add_parser("cantor")
    cantor.add_argument("--depth", type=int, required=True)
    product = kinds.add_parser("product")
    product.add_argument("--spectrum", required=True, help='e.g. "1/2:2,1:3"')
    rnd = kinds.add_parser("random")
    rnd.add_argument("--points", type=int, required=True)
    rnd.add_argument("--seed", type=int, default=0)
    rnd.add_argument("--pool", required=True, help='e.g. "1/3,1/2,1"')
    for sub in (cantor, product, rnd):
        sub.add_argument("--output", help="write to a file instead of stdout")

    verify = commands.add_parser("verify", help="run every cross-check on one space")
    verify.add_argument("file")

    serve = commands.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default=settings.HOST)
    serve.add_argument("--port", type=int, default=settings.PORT)

    return parser


def _verdict_code(verdicts) -> int:
    return EXIT_TRUE if all(verdicts.values()) else EXIT_FALSE


def _cmd_validate(args, out: TextIO) -> int:
    space = load_space(args.file)
    out.write(f"valid: {len(space)} points\n")
    return EXIT_TRUE


def _cmd_info(args, out: TextIO) -> int:
    report = analysis_service.info(load_space(args.file))
    if args.json:
        out.write(report.model_dump_json(indent=2) + "\n")
        return EXIT_TRUE
    out.write(f"points: {report.points}\n")
    out.write(f"spectrum: {{{', '.join(report.spectrum)}}}\n")
    out.write("multispectrum:\n")
    for s in report.multispectrum:
        out.write(f"  {{{', '.join(s)}}}\n")
    degrees = ", ".join(f"{r}: {k}" for r, k in report.degree_sequence.items())
    out.write(f"degree sequence: {{{degrees}}}\n")
    out.write(f"nerve nodes: {report.nerve_nodes}\n")
    out.write(f"orbits: {len(report.orbits)}\n")
    out.write(render_verdicts({"h1": report.property_h.h1, "h2": report.property_h.h2}))
    return EXIT_TRUE


def _cmd_nerve(args, out: TextIO) -> int:
    space = load_space(args.file)
    nerve = build_nerve(space)
    if args.json:
        model = tree_to_model(
            space, [n.members for n in nerve.nodes], lambda m: nerve.node(m).diameter, nerve.parent
        )
        out.write(dump_tree(model))
    else:
        out.write(
            render_tree(
                space,
                nerve.root.members,
                lambda m: [child.members for child in nerve.children(nerve.node(m))],
                lambda m: nerve.node(m).diameter,
            )
        )
    return EXIT_TRUE


def _cmd_check(args, out: TextIO) -> int:
    space = load_space(args.file)
    flags = args.flags or list(CheckFlag)
    verdicts = analysis_service.check(space, flags, brute_force=args.brute_force)
    out.write(render_verdicts(verdicts))
    return _verdict_code(verdicts)


def _cmd_extend(args, out: TextIO) -> int:
    space = load_space(args.file)
    result = extend_isometry(space, parse_map(args.mapping))
    if result is None:
        out.write("extends: false\n")
        return EXIT_FALSE
    out.write("extends: true\n")
    for point in space.points:
        out.write(f"{point} -> {result[point]}\n")
    return EXIT_TRUE


def _cmd_embed(args, out: TextIO) -> int:
    space = load_space(args.file)
    result = embed_space(space)
    if args.json:
        payload = {
            "degree_function": {format_rational(r): k for r, k in result.df.entries},
            "embedding": {p: {format_rational(r): k for r, k in result.psi[p].assignment} for p in space.points},
        }
        out.write(json.dumps(payload, indent=2) + "\n")
        return EXIT_TRUE
    for point in space.points:
        out.write(f"{point} → {result.psi[point].describe()}\n")
    out.write(f"degree function: {{{result.df.describe()}}}\n")
    return EXIT_TRUE


def _cmd_isometric(args, out: TextIO) -> int:
    first, second = load_space(args.first), load_space(args.second)
    witness = isometric(first, second)
    if witness is None:
        out.write("isometric: false\n")
        return EXIT_FALSE
    out.write("isometric: true\n")
    for point in first.points:
        out.write(f"{point} -> {witness[point]}\n")
    return EXIT_TRUE


def _cmd_decompose(args, out: TextIO) -> int:
    space = load_space(args.file)
    tree = decomposition_tree(from_space(space))
    if args.json:
        out.write(dump_tree(tree_to_model(space, tree.nodes, tree.node_label.get, tree.parent)))
    else:
        out.write(render_tree(space, tree.root, tree.children, tree.node_label.get))
    if args.verify_nerve:
        verdicts = {"nerve-matches": nerve_matches_decomposition(space)}
        out.write(render_verdicts(verdicts))
        return _verdict_code(verdicts)
    return EXIT_TRUE


def _cmd_gen(args, out: TextIO) -> int:
    if args.kind == "cantor":
        space = generator_service.gen_cantor(args.depth)
    elif args.kind == "product":
        space = generator_service.gen_product(parse_degree_spec(args.spectrum))
    else:
        space = generator_service.gen_random(args.points, args.seed, parse_rational_list(args.pool))
    if args.output:
        write_space(space, args.output)
        logger.info("Space written", path=args.output, points=len(space))
    else:
        out.write(dump_space(space))
    return EXIT_TRUE


def _cmd_verify(args, out: TextIO) -> int:
    verdicts = analysis_service.verify_theorems(load_space(args.file))
    out.write(render_verdicts(verdicts))
    return _verdict_code(verdicts)


def _cmd_serve(args, out: TextIO) -> int:
    import uvicorn

    uvicorn.run("src.main:app", host=args.host, port=args.port, log_level=settings.LOG_LEVEL.lower())
    return EXIT_TRUE


COMMANDS = {
    "validate": _cmd_validate,
    "info": _cmd_info,
    "nerve": _cmd_nerve,
    "check": _cmd_check,
    "extend": _cmd_extend,
    "embed": _cmd_embed,
    "isometric": _cmd_isometric,
    "decompose": _cmd_decompose,
    "gen": _cmd_gen,
    "verify": _cmd_verify,
    "serve": _cmd_serve,
}


def run(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser(err)
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_TRUE if e.code in (0, None) else EXIT_ERROR

    configure_logging(level=args.log_level, json_logs=args.log_json)
    try:
        return COMMANDS[args.command](args, out)
    except UltrametricError as e:
        logger.debug("Command failed", command=args.command, error=e.message)
        err.write(f"error: {e.message}\n")
        return e.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

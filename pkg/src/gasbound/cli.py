"""Command-line front end.

    gasbound analyze CODE [--model M] [--resource R] [--filter a,b] [--function F] ...
    gasbound optimize CODE --solidity SRC --layout L ...
    gasbound functions CODE [--signatures FILE]

Exit status: 0 when every requested bound is finite, 2 when some key is
unbounded (its bound still prints as ``inf``), 1 on bad input or flags.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from gasbound import corpus
from gasbound.bounds.costmodel import RESOURCES, SCOPES, CostModelConfig, MissingSourceMap
from gasbound.cfg.dot import to_dot
from gasbound.evm.asm import AsmError, assemble
from gasbound.evm.disasm import TruncatedPush
from gasbound.evm.schedule import load_schedule
from gasbound.ingest.layout import MalformedLayout, parse_storage_layout
from gasbound.ingest.selector import BadSelector, load_signatures
from gasbound.ingest.srcmap import MalformedSrcmap
from gasbound.optimizer import optimize_function, opt_path
from gasbound.pipeline import FunctionNotFound, load_program

log = logging.getLogger("gasbound")

INPUT_ERRORS = (OSError, ValueError, KeyError, AsmError, TruncatedPush, MalformedLayout,
                MalformedSrcmap, BadSelector, MissingSourceMap, FunctionNotFound)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # exit status 2 means "unbounded" here, so bad flags use 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def read_code(path: str) -> bytes:
    """Hex bytecode, with or without ``0x``; whitespace is ignored. ``.asm`` is assembled."""
    text = Path(path).read_text()
    if path.endswith(".asm"):
        return assemble(text).code
    text = "".join(text.split())
    if text[:2].lower() == "0x":
        text = text[2:]
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise ValueError(f"{path}: not a hex bytecode file") from None


def _split_filter(text):
    if not text:
        return ()
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _add_inputs(p):
    p.add_argument("code", nargs="?", help="hex bytecode file (or .asm)")
    p.add_argument("--fixture", choices=sorted(corpus.FIXTURES),
                   help="use a built-in corpus contract instead of CODE")
    p.add_argument("--signatures", help="file with one canonical signature per line")


def _add_analysis(p):
    _add_inputs(p)
    p.add_argument("--resource", choices=RESOURCES, default=None)
    p.add_argument("--model", "--scope", dest="model", choices=SCOPES, default=None)
    p.add_argument("--filter", default="", help="comma-separated keys to report")
    p.add_argument("--function", action="append", default=[],
                   help="signature, 0x selector, fallback or anonymous (repeatable)")
    p.add_argument("--layout", help="storage layout JSON")
    p.add_argument("--srcmap", help="compressed source map file")
    p.add_argument("--source", help="Solidity source the source map refers to")
    p.add_argument("--solidity", help="Solidity source to rewrite with --optimize")
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--schedule", help="gas schedule JSON")
    p.add_argument("--sstore", choices=("worst", "best"), default="worst")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dot", help="write the CFG in DOT format to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gasbound", description="Static gas bounds for EVM bytecode.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser,
                                metavar="{analyze,optimize,functions}")
    _add_analysis(sub.add_parser("analyze", help="print symbolic bounds per function"))
    _add_analysis(sub.add_parser("optimize", help="analyze --model storage-optimization --optimize"))
    _add_inputs(sub.add_parser("functions", help="list the functions found by the dispatcher"))
    ex = sub.add_parser("exec")  # debugging aid, left out of the help text
    ex.add_argument("code")
    ex.add_argument("--calldata", default="")
    ex.add_argument("--storage", default="{}", help='JSON object, e.g. {"0": 5}')
    ex.add_argument("--gas-limit", type=int, default=10_000_000)
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "exec"]
    return parser


def _load(args, with_source_map=True):
    """Program plus the Solidity text the options point at."""
    if args.fixture:
        fx = corpus.get(args.fixture)
        code, layout, srcmap, source = fx.code, fx.layout, fx.srcmap, fx.source
        signatures = fx.signature_map
    else:
        if not args.code:
            raise UsageError("a bytecode file or --fixture is required")
        code = read_code(args.code)
        layout = srcmap = source = None
        signatures = {}
    if getattr(args, "layout", None):
        layout = parse_storage_layout(Path(args.layout).read_text())
    if getattr(args, "srcmap", None):
        srcmap = Path(args.srcmap).read_text().strip()
    if getattr(args, "source", None):
        source = Path(args.source).read_text()
    if args.signatures:
        signatures = {**signatures, **load_signatures(Path(args.signatures).read_text())}
    if not with_source_map:
        srcmap = None
    return load_program(code, layout, srcmap, source, signatures), source


def _check_flags(args):
    """Reject flag combinations before any analysis starts."""
    if args.command == "optimize":
        args.optimize = True
        args.model = args.model or "storage-optimization"
    args.model = args.model or "all"
    if args.optimize and args.model != "storage-optimization":
        raise UsageError("--optimize requires --model storage-optimization")
    if args.optimize and not (args.solidity or args.source or args.fixture):
        raise UsageError("--optimize needs the Solidity source (--solidity)")
    if bool(args.srcmap) != bool(args.source) and not args.fixture:
        raise UsageError("--srcmap and --source go together")
    if args.model == "line" and not ((args.srcmap and args.source) or args.fixture):
        raise UsageError("--model line requires --srcmap and --source")
    if args.model == "storage-optimization":
        if args.resource == "gas":
            log.warning("storage-optimization counts instructions; using --resource instructions")
        args.resource = "instructions"
    args.resource = args.resource or "gas"


def cmd_analyze(args, out) -> int:
    _check_flags(args)
    schedule = load_schedule(args.schedule)
    if args.sstore == "best":
        schedule = schedule.best_case()
    program, source = _load(args)
    config = CostModelConfig(args.resource, args.model, _split_filter(args.filter))
    units = [program.unit(f) for f in args.function] if args.function else program.units
    if args.dot:
        Path(args.dot).write_text(to_dot(program.cfg))
    reports = [program.analyze(u, config, schedule) for u in units]

    outcomes = []
    if args.optimize:
        text = Path(args.solidity).read_text() if args.solidity else source
        for u in units:
            if u.kind != "function":
                continue
            o = optimize_function(program, u, text, schedule=load_schedule(args.schedule))
            outcomes.append(o)
            text = o.new_source or text
        target = opt_path(args.solidity or (args.source or f"{args.fixture}.sol"))
        if any(o.applied for o in outcomes):
            Path(target).write_text(text)
        sidecar = Path(target).with_suffix(".json")
        sidecar.write_text(json.dumps([o.to_json() for o in outcomes], indent=2) + "\n")

    if args.format == "json":
        doc = {"reports": [r.to_json() for r in reports]}
        if args.optimize:
            doc["optimization"] = [o.to_json() for o in outcomes]
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write("\n\n".join(r.render_text() for r in reports) + "\n")
        for o in outcomes:
            out.write("\n" + render_outcome(o) + "\n")
    unbounded = any(r.unbounded or (r.memory_gas is not None and r.memory_gas.unbounded)
                    for r in reports)
    return 2 if unbounded else 0


def render_outcome(o) -> str:
    lines = [f"optimization candidates for {o.function}:"]
    if not o.candidates:
        lines.append("  none")
    for c in o.candidates:
        worst, best = o.savings[c.field]
        verdict = "safe" if c.safe else f"unsafe ({c.reason_if_unsafe})"
        mode = "read-only" if c.read_only else "read-write"
        lines.append(f"  {c.field}: {c.total_bound} accesses, {mode}, {verdict}, "
                     f"savings {float(worst):.2%} worst / {float(best):.2%} best")
        if c.field in o.applied:
            lines.append(f"    rewritten with get_field_{c.field}"
                         + ("" if c.read_only else f" / set_field_{c.field}"))
        elif c.field in o.skipped:
            lines.append(f"    not rewritten: {o.skipped[c.field]}")
    return "\n".join(lines)


def cmd_functions(args, out) -> int:
    program, _ = _load(args, with_source_map=False)
    for u in program.units:
        if u.kind == "anonymous":
            out.write("anonymous  (no dispatcher found; the whole code is one unit)\n")
        elif u.kind == "function":
            out.write(f"{u.selector_hex}  {u.signature or ''}".rstrip() + "\n")
    return 0


def cmd_exec(args, out) -> int:
    from gasbound.interp.machine import execute

    code = read_code(args.code)
    calldata = bytes.fromhex(args.calldata.removeprefix("0x"))
    storage = {int(k, 0): int(v, 0) if isinstance(v, str) else int(v)
               for k, v in json.loads(args.storage).items()}
    r = execute(code, calldata, storage, gas_limit=args.gas_limit)
    out.write(json.dumps({
        "status": r.status,
        "reason": r.reason,
        "gas_used": r.gas_used,
        "memory_gas": r.mem_gas,
        "return_data": r.return_data.hex(),
        "storage": {hex(k): hex(v) for k, v in sorted(r.storage.items())},
        "opcode_counts": dict(sorted(r.opcode_counts.items())),
    }, indent=2) + "\n")
    return 0 if r.success else 1


COMMANDS = {"analyze": cmd_analyze, "optimize": cmd_analyze, "functions": cmd_functions,
            "exec": cmd_exec}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        print(f"gasbound: {e}", file=sys.stderr)
        return 1
    except INPUT_ERRORS as e:
        print(f"gasbound: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

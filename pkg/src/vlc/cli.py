"""Command-line driver: ``vlc check | run | build | core-eval | bench``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .builtins import VLRuntimeError
from .driver import CompileFailure, CompileResult, compile_program, constraint_text, module_interfaces
from .evaluator import EvalError, run_program
from .lambdavl import FuelExhausted, LParseError, evaluate, parse_lterm, show, synth_declarative
from .loader import LoadError, load_repository
from .parser import ParseError
from .solver import export_smt2
from .version_algebra import VersionError

EXIT_OK, EXIT_DIAG, EXIT_IO = 0, 1, 2


def _entry_and_roots(entry: str, paths: list[str]) -> tuple[str, list[str]]:
    """Accept a module name, or a path ``root/Module/version/Module.vl``."""
    roots = list(paths)
    if entry.endswith(".vl"):
        p = Path(entry).resolve()
        roots.append(str(p.parents[2]))
        entry = p.stem
    if not roots:
        roots = ["."]
    return entry, list(dict.fromkeys(roots))


def _compile(args) -> CompileResult:
    entry, roots = _entry_and_roots(args.entry, args.module_path)
    repo = load_repository(roots)
    trace: list | None = [] if getattr(args, "emit", None) == "constraints" else None
    return compile_program(repo, entry, version=args.version, trace=trace)


def _emit(args, result: CompileResult) -> None:
    kind = getattr(args, "emit", None)
    if not kind:
        return
    if kind == "constraints":
        text = constraint_text(result)
    elif kind == "interface":
        entry, roots = _entry_and_roots(args.entry, args.module_path)
        bundles = module_interfaces(load_repository(roots), entry)
        text = "".join(f"-- {name}\n{b.render()}" for name, b in bundles.items())
    else:
        text = export_smt2(result.constraint, result.registry)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(result: CompileResult) -> int:
    for d in result.diagnostics:
        print(d.render(), file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_DIAG


def cmd_check(args) -> int:
    result = _compile(args)
    _emit(args, result)
    status = _report(result)
    if status == EXIT_OK:
        for name in sorted(result.entry_defs()):
            d = result.entry_defs()[name]
            print(f"{d.compiled.name} : {d.type} @ {result.label_of(d.compiled.name)}")
    return status


def cmd_run(args) -> int:
    result = _compile(args)
    _emit(args, result)
    status = _report(result)
    if status != EXIT_OK:
        return status
    program = result.specialize(args.symbol)
    try:
        out = run_program(program.defs, program.entry, fuel=args.fuel)
    except (VLRuntimeError, EvalError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_DIAG
    for line in out.output:
        print(line)
    print(out.show())
    return EXIT_OK


def cmd_build(args) -> int:
    result = _compile(args)
    _emit(args, result)
    status = _report(result)
    if status != EXIT_OK:
        return status
    program = result.specialize(args.symbol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{result.entry_module}.vl"
    target.write_text(program.render(result.entry_module), encoding="utf-8")
    print(f"wrote {target}")
    return EXIT_OK


def cmd_core_eval(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    term = parse_lterm(source)
    ty = synth_declarative(term)
    print(f"type: {ty if ty is not None else 'ill-typed'}")
    res = evaluate(term, args.fuel, trace=True)
    steps = res.trace if args.trace else res.trace[-1:]
    for i, t in enumerate(steps):
        prefix = f"{i:>3}  " if args.trace else ""
        print(prefix + show(t))
    print(f"{res.status} after {res.steps} steps")
    return EXIT_OK if res.status == "value" else EXIT_DIAG


def cmd_bench(args) -> int:
    rows = bench.run_bench(args.mods, args.vers, args.reps, seed=args.seed)
    sys.stdout.write(bench.to_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vlc", description="Compiler for a functional language with versioned modules.")
    sub = p.add_subparsers(dest="command", required=True)

    def compile_opts(sp):
        sp.add_argument("entry", help="entry module name, or path to root/Module/version/Module.vl")
        sp.add_argument("--module-path", action="append", default=[], metavar="DIR",
                        help="repository root (repeatable)")
        sp.add_argument("--version", help="entry module version (default: newest)")
        sp.add_argument("--emit", choices=["constraints", "interface", "smt2"])
        sp.add_argument("--output", "-o", help="write --emit output here instead of stdout")

    c = sub.add_parser("check", help="type check and resolve versions")
    compile_opts(c)
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="compile and interpret the entry point")
    compile_opts(r)
    r.add_argument("--symbol", default="main")
    r.add_argument("--fuel", type=int, default=1_000_000)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("build", help="write the version-specialized program")
    compile_opts(b)
    b.add_argument("--symbol", default="main")
    b.add_argument("--out", required=True, metavar="DIR")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("core-eval", help="evaluate a core calculus term")
    e.add_argument("file")
    e.add_argument("--fuel", type=int, default=10_000)
    e.add_argument("--trace", action="store_true", help="print every reduction step")
    e.set_defaults(func=cmd_core_eval)

    n = sub.add_parser("bench", help="constraint-resolution benchmark (CSV)")
    n.add_argument("--mods", type=int, default=4)
    n.add_argument("--vers", type=int, default=4)
    n.add_argument("--reps", type=int, default=10)
    n.add_argument("--seed", type=int, default=0)
    n.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "fuel", 1) <= 0:
        print("error: --fuel must be positive", file=sys.stderr)
        return EXIT_IO
    try:
        return args.func(args)
    except (OSError, LoadError, ParseError, LParseError, VersionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CompileFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DIAG
    except FuelExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAG


if __name__ == "__main__":
    sys.exit(main())

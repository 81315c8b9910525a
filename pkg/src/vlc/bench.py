"""Constraint-resolution benchmark over a chain of duplicated List modules.

``List_i`` imports ``List_{i-1}``; every version of every module carries the
same definitions (several renamed copies) with the module index appended to
each symbol.  A ``Main``
module uses the last one.  Only the solve step is timed.
"""
from __future__ import annotations

import csv
import gc
import io
import random
import statistics
from dataclasses import dataclass

from .driver import compile_program
from .loader import Repository, repository_from_sources

_BODY = """\
concat_{i} xss = foldLeft (\\(acc, xs) -> acc ++ xs) [] xss
reverse_{i} xs = foldLeft (\\(acc, x) -> x : acc) [] xs
sum_{i} xs = foldLeft (\\(acc, x) -> acc + x) 0 xs
length_{i} xs = foldLeft (\\(acc, x) -> acc + 1) 0 xs
map_{i} f xs = reverse (foldLeft (\\(acc, x) -> f x : acc) [] xs)
concatMap_{i} f xs = concat_{i} (map_{i} f xs)
"""

_LINK = """\
lift_{i} xss = concat_{p} (map_{p} reverse_{p} xss)
total_{i} xs = sum_{p} xs + length_{p} xs
"""


# Independent copies of the body per module; keeps per-configuration solve
# times well above timer jitter on small machines.
COPIES = 4


def list_module(i: int, copies: int = COPIES) -> str:
    lines = [f"module List_{i} where"]
    if i > 1:
        lines.append(f"import List_{i - 1}")
    for k in range(copies):
        tag = f"{i}" if k == 0 else f"{i}c{k}"
        lines.append(_BODY.replace("_{i}", "_" + tag))
    if i > 1:
        lines.append(_LINK.format(i=i, p=i - 1))
    return "\n".join(lines)


def main_module(mods: int) -> str:
    n = mods
    return (
        f"module Main where\nimport List_{n}\n"
        f"main = total_{n} (concatMap_{n} (\\x -> [x, x]) (concat_{n} [[1, 2], [3]]))\n"
        if n > 1
        else "module Main where\nimport List_1\nmain = sum_1 (concatMap_1 (\\x -> [x, x]) (concat_1 [[1, 2], [3]]))\n"
    )


def workload(mods: int, vers: int) -> Repository:
    if mods < 1 or vers < 1:
        raise ValueError("mods and vers must be at least 1")
    sources = {("Main", "1.0.0"): main_module(mods)}
    for i in range(1, mods + 1):
        for v in range(1, vers + 1):
            sources[(f"List_{i}", f"{v}.0.0")] = list_module(i)
    return repository_from_sources(sources)


def workload_loc(mods: int, vers: int) -> int:
    repo = workload(mods, vers)
    total = 0
    for (name, version), m in repo.modules.items():
        total += len(m.defs) + len(m.imports) + 1
    return total


@dataclass
class BenchRow:
    mods: int
    vers: int
    reps: int
    mean_ms: float
    stddev_ms: float


def timed_solve(repo: Repository) -> float:
    """Compile once; milliseconds spent in the solver."""
    # as timeit does: keep collector pauses out of the measurement
    gc.collect()
    gc.disable()
    try:
        result = compile_program(repo, "Main")
    finally:
        gc.enable()
    if not result.ok:
        raise RuntimeError(f"benchmark workload failed to compile: {result.diagnostics}")
    return result.solve_seconds * 1000.0


def _row(mods: int, vers: int, times: list[float]) -> BenchRow:
    sd = statistics.stdev(times) if len(times) > 1 else 0.0
    return BenchRow(mods, vers, len(times), statistics.fmean(times), sd)


def bench_config(mods: int, vers: int, reps: int = 10) -> BenchRow:
    repo = workload(mods, vers)
    return _row(mods, vers, [timed_solve(repo) for _ in range(reps)])


def run_bench(mods: int, vers: int, reps: int = 10, seed: int | None = None) -> list[BenchRow]:
    """One row per configuration in 1..mods x 1..vers.

    Repetitions are interleaved: each round times every configuration once in
    a freshly shuffled order, so a slow spell on the host is spread over all
    configurations instead of skewing one of them.
    """
    configs = [(m, v) for m in range(1, mods + 1) for v in range(1, vers + 1)]
    repos = {c: workload(*c) for c in configs}
    times: dict[tuple[int, int], list[float]] = {c: [] for c in configs}
    rng = random.Random(seed)
    for _ in range(reps):
        order = list(configs)
        rng.shuffle(order)
        for c in order:
            times[c].append(timed_solve(repos[c]))
    return [_row(m, v, times[(m, v)]) for m, v in configs]


def to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mods", "vers", "reps", "mean_ms", "stddev_ms"])
    for r in rows:
        w.writerow([r.mods, r.vers, r.reps, f"{r.mean_ms:.3f}", f"{r.stddev_ms:.3f}"])
    return buf.getvalue()

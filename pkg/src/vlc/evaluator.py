"""Call-by-need interpreter for (specialized) surface programs."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Mapping

from . import surface as S
from .builtins import PairV, RuntimeEnv, VLRuntimeError, make_primitives, to_text
from .lambdavl import FuelExhausted


class EvalError(Exception):
    pass


class MatchFailure(EvalError):
    pass


class Thunk:
    __slots__ = ("term", "env", "value", "done")

    def __init__(self, term=None, env=None, value=None, done=False):
        self.term = term
        self.env = env
        self.value = value
        self.done = done


@dataclass
class Closure:
    param: str
    body: S.Term
    env: dict


@dataclass
class Partial:
    name: str
    arity: int
    fn: object
    args: tuple = ()


@dataclass
class Machine:
    program: Mapping[str, S.Term]
    fuel: int = 1_000_000
    world: RuntimeEnv = field(default_factory=RuntimeEnv)
    output: list[str] = field(default_factory=list)
    steps: int = 0

    def __post_init__(self) -> None:
        self.globals: dict[str, Thunk] = {name: Thunk(body, {}) for name, body in self.program.items()}
        prims = make_primitives(self.world, self.force, self.apply, lambda v: Thunk(value=v, done=True))
        inner_print = prims["print"][1]

        def printing(t):
            v = inner_print(t)
            self.output.append(show_value(v))
            return v

        prims["print"] = (1, printing)
        self.prims = prims

    def tick(self, t) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            raise FuelExhausted(t, self.steps)

    def force(self, th: Thunk):
        if not th.done:
            th.value = self.eval(th.term, th.env)
            th.done = True
            th.term = th.env = None
        return th.value

    def lookup(self, name: str, env: dict):
        if name in env:
            return self.force(env[name])
        if name in self.globals:
            return self.force(self.globals[name])
        if name in self.prims:
            arity, fn = self.prims[name]
            return Partial(name, arity, fn)
        raise EvalError(f"unbound name {name}")

    def apply(self, f, arg: Thunk):
        if isinstance(f, Closure):
            env = f.env if f.param == S.WILDCARD else {**f.env, f.param: arg}
            return self.eval(f.body, env)
        if isinstance(f, Partial):
            args = f.args + (arg,)
            if len(args) == f.arity:
                return f.fn(*args)
            return Partial(f.name, f.arity, f.fn, args)
        raise EvalError(f"cannot apply {show_value(f)}")

    def eval(self, t, env: dict):
        self.tick(t)
        if isinstance(t, S.IntLit):
            return t.value
        if isinstance(t, S.Var):
            return self.lookup(t.name, env)
        if isinstance(t, S.Lam):
            return Closure(t.param, t.body, env)
        if isinstance(t, S.App):
            return self.apply(self.eval(t.fn, env), Thunk(t.arg, env))
        if isinstance(t, S.Let):
            return self.eval(t.body, {**env, t.name: Thunk(t.bound, env)})
        if isinstance(t, S.Pair):
            return PairV(self.eval(t.fst, env), self.eval(t.snd, env))
        if isinstance(t, S.ListLit):
            return tuple(self.eval(i, env) for i in t.items)
        if isinstance(t, S.Case):
            v = self.eval(t.scrutinee, env)
            for b in t.branches:
                binds = match(b.pattern, v)
                if binds is not None:
                    new = dict(env)
                    for k, x in binds.items():
                        new[k] = Thunk(value=x, done=True)
                    return self.eval(b.body, new)
            raise MatchFailure(f"no branch matches {show_value(v)}")
        if isinstance(t, (S.VerOf, S.Unversion)):
            return self.eval(t.body, env)
        raise EvalError(f"cannot evaluate {t!r}")


def match(p, v) -> dict | None:
    if isinstance(p, S.PVar):
        return {} if p.name == S.WILDCARD else {p.name: v}
    if isinstance(p, S.PInt):
        return {} if v == p.value else None
    if isinstance(p, S.PPair):
        if not isinstance(v, PairV):
            return None
        a, b = match(p.fst, v[0]), match(p.snd, v[1])
        return None if a is None or b is None else {**a, **b}
    if isinstance(p, S.PList):
        if not isinstance(v, tuple) or isinstance(v, PairV) or len(v) != len(p.items):
            return None
        out: dict = {}
        for q, x in zip(p.items, v):
            m = match(q, x)
            if m is None:
                return None
            out.update(m)
        return out
    if isinstance(p, S.PCons):
        if not isinstance(v, tuple) or isinstance(v, PairV) or not v:
            return None
        a, b = match(p.head, v[0]), match(p.tail, v[1:])
        return None if a is None or b is None else {**a, **b}
    raise EvalError(f"unknown pattern {p!r}")


def _texty(v) -> bool:
    return bool(v) and all(isinstance(c, int) and 32 <= c < 127 for c in v)


def show_value(v) -> str:
    """Render a runtime value; non-empty lists of printable codes show as strings."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, PairV):
        return f"({show_value(v[0])}, {show_value(v[1])})"
    if isinstance(v, tuple):
        if _texty(v):
            return '"' + to_text(v) + '"'
        return "[" + ",".join(show_value(x) for x in v) + "]"
    if isinstance(v, (Closure, Partial)):
        return "<function>"
    return repr(v)


@dataclass
class RunResult:
    value: object
    output: list[str]
    steps: int

    def show(self) -> str:
        return show_value(self.value)


def run_program(program: Mapping[str, S.Term], entry: str, *, fuel: int = 1_000_000,
                world: RuntimeEnv | None = None) -> RunResult:
    """Evaluate ``entry``; a function-valued entry is applied to unit."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        m = Machine(program, fuel, world or RuntimeEnv())
        v = m.lookup(entry, {})
        if isinstance(v, (Closure, Partial)):
            v = m.apply(v, Thunk(value=0, done=True))
        return RunResult(v, m.output, m.steps)
    finally:
        sys.setrecursionlimit(old)


__all__ = ["EvalError", "MatchFailure", "RunResult", "VLRuntimeError", "run_program", "show_value"]

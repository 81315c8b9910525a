"""Built-in primitives: their surface types and runtime behaviour.

Each occurrence of a primitive is typed by the Girard image of its surface
signature with fresh type and resource variables, so primitives behave as
polymorphic constants and never enter a typing context.
"""
from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass
from typing import Callable

from .vlmini import INT, KindContext, TArrow, TBox, TCon, TInt, TVar, Type, t_list, t_pair


class VLRuntimeError(Exception):
    """Raised by ``error`` and by partial primitives such as ``head []``."""


# Signatures use the plain (unboxed) type grammar; lowercase names are variables.
def _a(x: str) -> TVar:
    return TVar(x)


_L = t_list
_INT = INT
_STR = t_list(INT)

SIGNATURES: dict[str, Type] = {
    "+": TArrow(_INT, TArrow(_INT, _INT)),
    "-": TArrow(_INT, TArrow(_INT, _INT)),
    "*": TArrow(_INT, TArrow(_INT, _INT)),
    "div": TArrow(_INT, TArrow(_INT, _INT)),
    "mod": TArrow(_INT, TArrow(_INT, _INT)),
    "negate": TArrow(_INT, _INT),
    "==": TArrow(_a("a"), TArrow(_a("a"), _INT)),
    "/=": TArrow(_a("a"), TArrow(_a("a"), _INT)),
    "<": TArrow(_INT, TArrow(_INT, _INT)),
    "<=": TArrow(_INT, TArrow(_INT, _INT)),
    ">": TArrow(_INT, TArrow(_INT, _INT)),
    ">=": TArrow(_INT, TArrow(_INT, _INT)),
    "||": TArrow(_INT, TArrow(_INT, _INT)),
    "&&": TArrow(_INT, TArrow(_INT, _INT)),
    "not": TArrow(_INT, _INT),
    ":": TArrow(_a("a"), TArrow(_L(_a("a")), _L(_a("a")))),
    "++": TArrow(_L(_a("a")), TArrow(_L(_a("a")), _L(_a("a")))),
    "foldLeft": TArrow(
        TArrow(t_pair(_a("b"), _a("a")), _a("b")), TArrow(_a("b"), TArrow(_L(_a("a")), _a("b")))
    ),
    "map": TArrow(TArrow(_a("a"), _a("b")), TArrow(_L(_a("a")), _L(_a("b")))),
    "filter": TArrow(TArrow(_a("a"), _INT), TArrow(_L(_a("a")), _L(_a("a")))),
    "zip": TArrow(_L(_a("a")), TArrow(_L(_a("b")), _L(t_pair(_a("a"), _a("b"))))),
    "length": TArrow(_L(_a("a")), _INT),
    "reverse": TArrow(_L(_a("a")), _L(_a("a"))),
    "sum": TArrow(_L(_INT), _INT),
    "sort": TArrow(_L(_INT), _L(_INT)),
    "head": TArrow(_L(_a("a")), _a("a")),
    "tail": TArrow(_L(_a("a")), _L(_a("a"))),
    "fst": TArrow(t_pair(_a("a"), _a("b")), _a("a")),
    "snd": TArrow(t_pair(_a("a"), _a("b")), _a("b")),
    "md5": TArrow(_STR, _INT),
    "sha3": TArrow(_STR, _INT),
    "show": TArrow(_INT, _STR),
    "getArg": TArrow(_INT, _STR),
    "getFiles": TArrow(_INT, _L(_STR)),
    "print": TArrow(_a("a"), _a("a")),
    "error": TArrow(_STR, _a("a")),
}


def is_builtin(name: str) -> bool:
    return name in SIGNATURES


def girard_type(a: Type, sigma: KindContext, rename: dict[str, TVar] | None = None) -> Type:
    """⟦A → B⟧ = □_r ⟦A⟧ → ⟦B⟧ with a fresh r per arrow; variables renamed apart."""
    rename = {} if rename is None else rename
    if isinstance(a, TInt):
        return a
    if isinstance(a, TVar):
        if a.name not in rename:
            rename[a.name] = sigma.fresh_type()
        return rename[a.name]
    if isinstance(a, TArrow):
        arg = girard_type(a.arg, sigma, rename)
        return TArrow(TBox(sigma.fresh_res(), arg), girard_type(a.res, sigma, rename))
    if isinstance(a, TCon):
        return TCon(a.name, tuple(girard_type(x, sigma, rename) for x in a.args))
    raise TypeError(f"unexpected type in signature: {a}")


def instantiate(name: str, sigma: KindContext) -> Type:
    return girard_type(SIGNATURES[name], sigma)


# -- runtime -----------------------------------------------------------------


@dataclass
class RuntimeEnv:
    """World state visible to ``getArg`` and ``getFiles``."""

    arg: str = "report.txt"
    files: tuple[str, ...] = ("notes.txt", "report.txt", "todo.txt")


def to_text(v) -> str:
    return "".join(chr(c) for c in v)


def from_text(s: str) -> list[int]:
    return [ord(c) for c in s]


def _digest(algo: str, v) -> int:
    h = hashlib.new(algo, to_text(v).encode("utf-8")).digest()
    return int.from_bytes(h[:6], "big")


def _bool(b: bool) -> int:
    return 1 if b else 0


class PairV(tuple):
    """Runtime pair; lists are plain tuples."""

    def __new__(cls, fst, snd):
        return super().__new__(cls, (fst, snd))

    def __repr__(self) -> str:
        return f"PairV({self[0]!r}, {self[1]!r})"


def make_primitives(env: RuntimeEnv, force: Callable, apply: Callable, wrap: Callable) -> dict[str, tuple[int, Callable]]:
    """name -> (arity, implementation taking argument thunks).

    ``force`` evaluates a thunk to a value, ``apply`` calls a function value
    on a thunk and returns a value, ``wrap`` turns a value into a thunk.
    """

    def strict(fn):
        @functools.wraps(fn)
        def go(*thunks):
            return fn(*(force(t) for t in thunks))

        return go

    def fold_left(f, z, xs):
        acc = z
        for x in force(xs):
            acc = apply(force(f), wrap(PairV(acc, x)))
        return acc

    def head(xs):
        if not xs:
            raise VLRuntimeError("head of empty list")
        return xs[0]

    def tail(xs):
        if not xs:
            raise VLRuntimeError("tail of empty list")
        return xs[1:]

    def div(a, b):
        if b == 0:
            raise VLRuntimeError("division by zero")
        return a // b

    def mod(a, b):
        if b == 0:
            raise VLRuntimeError("division by zero")
        return a % b

    def err(msg):
        raise VLRuntimeError(to_text(msg))

    prims = {
        "+": (2, strict(lambda a, b: a + b)),
        "-": (2, strict(lambda a, b: a - b)),
        "*": (2, strict(lambda a, b: a * b)),
        "div": (2, strict(div)),
        "mod": (2, strict(mod)),
        "negate": (1, strict(lambda a: -a)),
        "==": (2, strict(lambda a, b: _bool(a == b))),
        "/=": (2, strict(lambda a, b: _bool(a != b))),
        "<": (2, strict(lambda a, b: _bool(a < b))),
        "<=": (2, strict(lambda a, b: _bool(a <= b))),
        ">": (2, strict(lambda a, b: _bool(a > b))),
        ">=": (2, strict(lambda a, b: _bool(a >= b))),
        "||": (2, lambda a, b: 1 if force(a) else _bool(force(b))),
        "&&": (2, lambda a, b: _bool(force(b)) if force(a) else 0),
        "not": (1, strict(lambda a: _bool(not a))),
        ":": (2, strict(lambda x, xs: (x,) + tuple(xs))),
        "++": (2, strict(lambda xs, ys: tuple(xs) + tuple(ys))),
        "foldLeft": (3, lambda f, z, xs: fold_left(f, force(z), xs)),
        "map": (2, lambda f, xs: tuple(apply(force(f), wrap(x)) for x in force(xs))),
        "filter": (2, lambda f, xs: tuple(x for x in force(xs) if apply(force(f), wrap(x)))),
        "zip": (2, strict(lambda xs, ys: tuple(PairV(a, b) for a, b in zip(xs, ys)))),
        "length": (1, strict(len)),
        "reverse": (1, strict(lambda xs: tuple(reversed(xs)))),
        "sum": (1, strict(sum)),
        "sort": (1, strict(lambda xs: tuple(sorted(xs)))),
        "head": (1, strict(head)),
        "tail": (1, strict(tail)),
        "fst": (1, strict(lambda p: p[0])),
        "snd": (1, strict(lambda p: p[1])),
        "md5": (1, strict(lambda s: _digest("md5", s))),
        "sha3": (1, strict(lambda s: _digest("sha3_256", s))),
        "show": (1, strict(lambda n: tuple(from_text(str(n))))),
        "getArg": (1, lambda _: tuple(from_text(env.arg))),
        "getFiles": (1, lambda _: tuple(tuple(from_text(f)) for f in env.files)),
        "print": (1, strict(lambda v: v)),
        "error": (1, strict(err)),
    }
    return prims

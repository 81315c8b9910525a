"""Algorithmic type synthesis and constraint generation for VLMini."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import builtins
from .version_algebra import UNIT, Bottom, Labels, ModuleRegistry, RVar
from .vlmini import (
    EMPTY_ENV,
    EMPTY_SUBST,
    INT,
    TOP,
    Constraint,
    Graded,
    KindContext,
    LabelDep,
    Linear,
    MApp,
    MCase,
    MCon,
    MConst,
    MInt,
    MLam,
    MPromote,
    MUnversion,
    MVar,
    MVerOf,
    PatBox,
    PatCon,
    PatInt,
    PatVar,
    Substitution,
    TArrow,
    TBox,
    TypeEnv,
    VarDep,
    WILDCARD,
    apply_subst,
    conj,
    ctx_concat,
    ctx_scale,
    ctx_union,
    grade_context,
    subst_compose,
    solve_equations,
    t_list,
    t_pair,
    term_free_vars,
    unify_types,
)


class InferenceError(Exception):
    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


class UnboundVariable(InferenceError):
    pass


class NotAVersionedValue(InferenceError):
    pass


class UnknownLabel(InferenceError):
    pass


class NonVariableGrade(InferenceError):
    pass


class PatternError(InferenceError):
    pass


Equation = tuple  # (Type, Type)


@dataclass
class SynthResult:
    type: object
    sigma_out: KindContext
    usage: TypeEnv
    theta: tuple[Equation, ...]
    deps: Constraint


@dataclass
class PatternSynthResult:
    bindings: TypeEnv
    sigma_out: KindContext
    theta: tuple[Equation, ...]
    deps: Constraint


# -- context grading and constraint generation -------------------------------


def gen_var_deps(sigma: KindContext, alpha: RVar, gamma: TypeEnv) -> Constraint:
    """α ⊑_c [Γ]: one α ⪯ r per graded assumption.

    The unit grade ∅ (a linear assumption coerced by grading) imposes nothing.
    """
    out = []
    for e in gamma:
        if not isinstance(e, Graded):
            raise NonVariableGrade(f"{e.name} is not graded")
        if e.res == UNIT:
            continue
        if not isinstance(e.res, (RVar, Labels, Bottom)):
            raise NonVariableGrade(f"grade of {e.name} is a compound expression {e.res}")
        out.append(VarDep(alpha, e.res))
    return conj(*out)


def gen_label_deps(sigma: KindContext, gamma: TypeEnv, d: tuple[tuple[str, str], ...]) -> Constraint:
    """[Γ] ⊑_c D: one r ⪯ D per assumption; grades must be variables."""
    out = []
    for e in gamma:
        if not isinstance(e, Graded) or not isinstance(e.res, RVar):
            res = getattr(e, "res", None)
            raise NonVariableGrade(f"grade of {e.name} is {res}, expected a resource variable")
        out.append(LabelDep(e.res, d))
    return conj(*out)


# -- unification driver ------------------------------------------------------


def unify(sigma: KindContext, theta_set) -> Substitution:
    """Solve a conjunction of type equations."""
    return solve_equations(theta_set)


def unify_stepwise(sigma: KindContext, theta_set) -> Substitution:
    """The same unifier built one equation at a time with ⊎ (reference version)."""
    s = EMPTY_SUBST
    for a, b in theta_set:
        s = subst_compose(s, unify_types(apply_subst(s, a), apply_subst(s, b)))
    return s


# -- synthesis ---------------------------------------------------------------


@dataclass
class Inferencer:
    sigma: KindContext
    registry: ModuleRegistry | None = None
    trace: list[tuple[str, Constraint]] | None = None
    builtin_type: Callable = builtins.instantiate

    def _emit(self, rule: str, c: Constraint) -> None:
        if self.trace is not None and c != TOP:
            self.trace.append((rule, c))

    # patterns

    def pattern(self, res, p, a) -> PatternSynthResult:
        sigma = self.sigma
        if isinstance(p, PatVar):
            if p.name == WILDCARD:
                return PatternSynthResult(EMPTY_ENV, sigma, (), TOP)
            entry = Linear(p.name, a) if res is None else Graded(p.name, a, res)
            return PatternSynthResult(TypeEnv((entry,)), sigma, (), TOP)
        if isinstance(p, PatInt):
            return PatternSynthResult(EMPTY_ENV, sigma, ((a, INT),), TOP)
        if isinstance(p, PatBox):
            if res is not None:
                raise PatternError("nested promoted pattern")
            alpha = sigma.fresh_res()
            beta = sigma.fresh_type()
            inner = self.pattern(alpha, p.inner, beta)
            return PatternSynthResult(
                inner.bindings, sigma, inner.theta + ((a, TBox(alpha, beta)),), inner.deps
            )
        if isinstance(p, PatCon):
            if p.con == "pair":
                if len(p.args) != 2:
                    raise PatternError("pair pattern needs two components")
                vs = [sigma.fresh_type(), sigma.fresh_type()]
                shape, sub = t_pair(vs[0], vs[1]), list(zip(p.args, vs))
            elif p.con == "list":
                elem = sigma.fresh_type()
                shape, sub = t_list(elem), [(q, elem) for q in p.args]
            elif p.con == "cons":
                elem = sigma.fresh_type()
                shape, sub = t_list(elem), [(p.args[0], elem), (p.args[1], t_list(elem))]
            else:
                raise PatternError(f"unknown constructor {p.con}")
            bindings = EMPTY_ENV
            theta: tuple = ((shape, a),)
            deps = TOP
            for q, ty in sub:
                r = self.pattern(res, q, ty)
                clash = set(bindings.names()) & set(r.bindings.names())
                if clash:
                    raise PatternError(f"variable bound twice in pattern: {sorted(clash)}")
                bindings = TypeEnv(bindings.entries + r.bindings.entries)
                theta += r.theta
                deps = conj(deps, r.deps)
            return PatternSynthResult(bindings, sigma, theta, deps)
        raise PatternError(f"unknown pattern {p!r}")

    # terms

    def synth(self, gamma: TypeEnv, t) -> SynthResult:
        sigma = self.sigma
        if isinstance(t, MInt):
            return SynthResult(INT, sigma, EMPTY_ENV, (), TOP)
        if isinstance(t, MVar):
            e = gamma.lookup(t.name)
            if e is None:
                raise UnboundVariable(f"unbound variable {t.name}", t.span)
            if isinstance(e, Linear):
                return SynthResult(e.type, sigma, TypeEnv((e,)), (), TOP)
            return SynthResult(e.type, sigma, TypeEnv((Graded(e.name, e.type, UNIT),)), (), TOP)
        if isinstance(t, MConst):
            if not builtins.is_builtin(t.name):
                raise UnboundVariable(f"unknown primitive {t.name}", t.span)
            return SynthResult(self.builtin_type(t.name, sigma), sigma, EMPTY_ENV, (), TOP)
        if isinstance(t, MLam):
            alpha = sigma.fresh_type()
            pr = self.pattern(None, t.pattern, alpha)
            body = self.synth(gamma.extend(pr.bindings), t.body)
            usage = body.usage.remove(pr.bindings.names())
            return SynthResult(
                TArrow(alpha, body.type), sigma, usage, pr.theta + body.theta, conj(pr.deps, body.deps)
            )
        if isinstance(t, MApp):
            r1 = self.synth(gamma, t.fn)
            r2 = self.synth(gamma, t.arg)
            beta = sigma.fresh_type()
            return SynthResult(
                beta,
                sigma,
                ctx_concat(r1.usage, r2.usage),
                r1.theta + r2.theta + ((r1.type, TArrow(r2.type, beta)),),
                conj(r1.deps, r2.deps),
            )
        if isinstance(t, MPromote):
            graded = grade_context(gamma.restrict(term_free_vars(t.body)))
            inner = self.synth(graded, t.body)
            alpha = sigma.fresh_res()
            versioned = graded.restrict(term_free_vars(t.body, versioned_only=True))
            c2 = gen_var_deps(sigma, alpha, versioned)
            self._emit("pr", c2)
            return SynthResult(
                TBox(alpha, inner.type), sigma, ctx_scale(alpha, inner.usage), inner.theta, conj(inner.deps, c2)
            )
        if isinstance(t, MVerOf):
            self._check_label(t)
            graded = grade_context(gamma.restrict(term_free_vars(t.body)))
            versioned = graded.restrict(term_free_vars(t.body, versioned_only=True))
            c2 = gen_label_deps(sigma, versioned, t.label)
            self._emit("ver", c2)
            inner = self.synth(graded, t.body)
            return SynthResult(inner.type, sigma, inner.usage, inner.theta, conj(inner.deps, c2))
        if isinstance(t, MUnversion):
            inner = self.synth(gamma, t.body)
            a = inner.type
            if not isinstance(a, TBox):
                try:
                    a = apply_subst(unify(sigma, inner.theta), a)
                except Exception as exc:
                    raise NotAVersionedValue(f"operand of unversion is ill-typed: {exc}", t.span) from exc
            if not isinstance(a, TBox):
                raise NotAVersionedValue(f"operand of unversion has type {a}, not a versioned type", t.span)
            alpha = sigma.fresh_res()
            return SynthResult(TBox(alpha, a.body), sigma, inner.usage, inner.theta, inner.deps)
        if isinstance(t, MCon):
            results = [self.synth(gamma, a) for a in t.args]
            usage = EMPTY_ENV
            theta: tuple = ()
            deps = TOP
            for r in results:
                usage = ctx_concat(usage, r.usage)
                theta += r.theta
                deps = conj(deps, r.deps)
            if t.con == "pair":
                ty = t_pair(results[0].type, results[1].type)
            elif t.con == "list":
                elem = sigma.fresh_type()
                theta += tuple((r.type, elem) for r in results)
                ty = t_list(elem)
            elif t.con == "cons":
                ty = results[1].type
                theta += ((results[1].type, t_list(results[0].type)),)
            else:
                raise InferenceError(f"unknown constructor {t.con}")
            return SynthResult(ty, sigma, usage, theta, deps)
        if isinstance(t, MCase):
            scrut = self.synth(gamma, t.scrutinee)
            theta = scrut.theta
            deps = scrut.deps
            result = sigma.fresh_type()
            branch_usage = None
            for b in t.branches:
                pr = self.pattern(None, b.pattern, scrut.type)
                body = self.synth(gamma.extend(pr.bindings), b.body)
                theta += pr.theta + body.theta + ((body.type, result),)
                deps = conj(deps, pr.deps, body.deps)
                used = body.usage.remove(pr.bindings.names())
                branch_usage = used if branch_usage is None else ctx_union(branch_usage, used)
            usage = ctx_concat(scrut.usage, branch_usage or EMPTY_ENV)
            return SynthResult(result, sigma, usage, theta, deps)
        raise InferenceError(f"cannot synthesize a type for {t!r}")

    def _check_label(self, t: MVerOf) -> None:
        if self.registry is None:
            return
        for module, version in t.label:
            if module not in self.registry or version not in self.registry.versions(module):
                raise UnknownLabel(f"unknown version {module}={version} in ver", t.span)


def synth_type(sigma: KindContext, gamma: TypeEnv, t, *, registry=None, trace=None) -> SynthResult:
    return Inferencer(sigma, registry, trace).synth(gamma, t)


def synth_pattern(sigma: KindContext, res, p, scrutinee_type) -> PatternSynthResult:
    return Inferencer(sigma).pattern(res, p, scrutinee_type)

"""Checker for explicit sequent-calculus derivations.

A derivation is a `Node` tree (see syntax.SEQ_LAYOUT for the s-expression
grammar).  Checking walks the tree from the end-sequent upward: `apply_rule`
computes the premise sequents a rule instance demands, and `check_seq` is its
recursive closure.  All positional information (principal occurrences, splits
for the multiplicative rules, source/destination indices for the structural
rules) is explicit in the node, so checking is linear in the derivation size.

Position conventions (0-based):
  weak x POS        POS is the weakened hypothesis's index in the conclusion.
  mobL OCC DEST     the hypothesis at conclusion index OCC sits at premise
                    index DEST, with OCC <= DEST (it moved left, reading down).
  mobR OCC DEST     symmetric, DEST <= OCC.
  contrL P Q        P < Q are premise indices of the two merged occurrences;
                    the left one (P) is kept in the conclusion.
  contrR P Q        P < Q as above; the right one (Q) is kept.
  cut LO HI x {A}   the conclusion splits as ctx[:LO] ++ ctx[LO:HI] ++ ctx[HI:]
                    with ctx[LO:HI] proving the cut formula A.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    FreshnessViolation,
    PresuppositionViolation,
    RuleMismatch,
    SideConditionFailed,
    SplitOutOfRange,
)
from .modes import CL, CR, ML, MR, W, ModeTheory
from .syntax import (
    Atom,
    Down,
    Fuse,
    Hyp,
    LeftImp,
    Node,
    One,
    OrderedContext,
    Plus,
    Prop,
    RightImp,
    Up,
    With,
    check_prop,
    context_geq,
    ctx_consistent,
    ctx_vars,
    mode_of,
    print_context,
    print_prop,
)


@dataclass(frozen=True)
class Sequent:
    ctx: OrderedContext
    goal: Prop

    def __str__(self) -> str:
        return f"{print_context(self.ctx)} |- {print_prop(self.goal)}"


CUT_FREE_RULES = frozenset(
    r for r in (
        "id", "impRr", "impRl", "impLr", "impLl", "fuseR", "fuseL", "oneR",
        "oneL", "plusR1", "plusR2", "plusL", "withR", "withL1", "withL2",
        "upR", "upL", "downR", "downL", "weak", "mobL", "mobR", "contrL",
        "contrR",
    )
)

STRUCTURAL_RULES = frozenset(("weak", "mobL", "mobR", "contrL", "contrR"))


def is_cut_free(d: Node) -> bool:
    return d.rule != "cut" and all(is_cut_free(s) for s in d.subs)


def resolve_principal(ctx: OrderedContext, prin: tuple[str, int]) -> int:
    name, occ = prin
    positions = [i for i, h in enumerate(ctx) if h.var == name]
    if not positions:
        raise RuleMismatch(f"no hypothesis named {name} in {print_context(ctx)}")
    if occ >= len(positions):
        raise RuleMismatch(f"hypothesis {name} has no occurrence #{occ}")
    return positions[occ]


def occurrence_of(ctx: OrderedContext, pos: int) -> tuple[str, int]:
    """Inverse of resolve_principal: (name, occurrence index) for a position."""
    name = ctx[pos].var
    occ = sum(1 for h in ctx[:pos] if h.var == name)
    return (name, occ)


def _fresh(ctx: OrderedContext, *names: str):
    seen = set(ctx_vars(ctx))
    for name in names:
        if name in seen:
            raise FreshnessViolation(f"binder {name} already occurs in the sequent")
        seen.add(name)


def _move(ctx: OrderedContext, i: int, j: int) -> OrderedContext:
    hyps = list(ctx)
    h = hyps.pop(i)
    hyps.insert(j, h)
    return tuple(hyps)


def _insert(ctx: OrderedContext, i: int, h: Hyp) -> OrderedContext:
    return ctx[:i] + (h,) + ctx[i:]


def _remove(ctx: OrderedContext, i: int) -> OrderedContext:
    return ctx[:i] + ctx[i + 1:]


def _replace(ctx: OrderedContext, i: int, hyps: tuple[Hyp, ...]) -> OrderedContext:
    return ctx[:i] + hyps + ctx[i + 1:]


def apply_rule(
    theory: ModeTheory,
    seq: Sequent,
    rule: str,
    args: tuple,
    *,
    atomic_id: bool = False,
) -> list[Sequent]:
    """Premise sequents demanded by one rule instance at `seq`.

    Raises a CheckError subclass when the rule does not apply.  Every premise
    returned satisfies the independence presupposition whenever `seq` does.
    """
    ctx, goal = seq.ctx, seq.goal
    r = mode_of(goal)

    match rule:
        case "id":
            (x,) = args
            if len(ctx) != 1 or ctx[0].var != x:
                raise RuleMismatch("the identity rule needs exactly the named hypothesis")
            if ctx[0].prop != goal:
                raise RuleMismatch("identity hypothesis does not match the goal")
            if atomic_id and not isinstance(goal, Atom):
                raise RuleMismatch("identity is restricted to atomic propositions")
            return []

        case "impRr":
            (x,) = args
            if not isinstance(goal, RightImp):
                raise RuleMismatch("goal is not a right implication")
            _fresh(ctx, x)
            return [Sequent(ctx + (Hyp(x, goal.arg),), goal.result)]

        case "impRl":
            (x,) = args
            if not isinstance(goal, LeftImp):
                raise RuleMismatch("goal is not a left implication")
            _fresh(ctx, x)
            return [Sequent((Hyp(x, goal.arg),) + ctx, goal.result)]

        case "impLr" | "impLl":
            prin, asize, y = args
            p = resolve_principal(ctx, prin)
            want = RightImp if rule == "impLr" else LeftImp
            f = ctx[p].prop
            if not isinstance(f, want):
                raise RuleMismatch("principal hypothesis is not the expected implication")
            m = mode_of(f)
            if rule == "impLr":
                if p + 1 + asize > len(ctx):
                    raise SplitOutOfRange("argument segment extends past the context")
                omega_a = ctx[p + 1:p + 1 + asize]
                rest = ctx[:p] + (Hyp(y, f.result),) + ctx[p + 1 + asize:]
            else:
                if asize > p:
                    raise SplitOutOfRange("argument segment extends past the context")
                omega_a = ctx[p - asize:p]
                rest = ctx[:p - asize] + (Hyp(y, f.result),) + ctx[p + 1:]
            if not context_geq(theory, omega_a, m):
                raise SideConditionFailed("argument context does not dominate the implication mode")
            _fresh(ctx, y)
            return [Sequent(omega_a, f.arg), Sequent(rest, goal)]

        case "fuseR":
            (n,) = args
            if not isinstance(goal, Fuse):
                raise RuleMismatch("goal is not an ordered pair")
            if not 0 <= n <= len(ctx):
                raise SplitOutOfRange("pair split index out of range")
            return [Sequent(ctx[:n], goal.left), Sequent(ctx[n:], goal.right)]

        case "fuseL":
            prin, x1, x2 = args
            p = resolve_principal(ctx, prin)
            f = ctx[p].prop
            if not isinstance(f, Fuse):
                raise RuleMismatch("principal hypothesis is not an ordered pair")
            if x1 == x2:
                raise FreshnessViolation("pair binders must be distinct")
            _fresh(ctx, x1, x2)
            return [Sequent(_replace(ctx, p, (Hyp(x1, f.left), Hyp(x2, f.right))), goal)]

        case "oneR":
            if not isinstance(goal, One):
                raise RuleMismatch("goal is not a unit")
            if ctx:
                raise RuleMismatch("the unit right rule needs an empty context")
            return []

        case "oneL":
            (prin,) = args
            p = resolve_principal(ctx, prin)
            if not isinstance(ctx[p].prop, One):
                raise RuleMismatch("principal hypothesis is not a unit")
            return [Sequent(_remove(ctx, p), goal)]

        case "plusR1" | "plusR2":
            if not isinstance(goal, Plus):
                raise RuleMismatch("goal is not a disjunction")
            side = goal.left if rule == "plusR1" else goal.right
            return [Sequent(ctx, side)]

        case "plusL":
            prin, y = args
            p = resolve_principal(ctx, prin)
            f = ctx[p].prop
            if not isinstance(f, Plus):
                raise RuleMismatch("principal hypothesis is not a disjunction")
            _fresh(ctx, y)
            return [
                Sequent(_replace(ctx, p, (Hyp(y, f.left),)), goal),
                Sequent(_replace(ctx, p, (Hyp(y, f.right),)), goal),
            ]

        case "withR":
            if not isinstance(goal, With):
                raise RuleMismatch("goal is not an alternative conjunction")
            return [Sequent(ctx, goal.left), Sequent(ctx, goal.right)]

        case "withL1" | "withL2":
            prin, y = args
            p = resolve_principal(ctx, prin)
            f = ctx[p].prop
            if not isinstance(f, With):
                raise RuleMismatch("principal hypothesis is not an alternative conjunction")
            side = f.left if rule == "withL1" else f.right
            _fresh(ctx, y)
            return [Sequent(_replace(ctx, p, (Hyp(y, side),)), goal)]

        case "upR":
            if not isinstance(goal, Up):
                raise RuleMismatch("goal is not an up-shift")
            return [Sequent(ctx, goal.body)]

        case "upL":
            prin, y = args
            p = resolve_principal(ctx, prin)
            f = ctx[p].prop
            if not isinstance(f, Up):
                raise RuleMismatch("principal hypothesis is not an up-shift")
            l = mode_of(f.body)
            if not theory.leq(l, r):
                raise SideConditionFailed("up-shift body mode does not dominate the goal mode")
            _fresh(ctx, y)
            return [Sequent(_replace(ctx, p, (Hyp(y, f.body),)), goal)]

        case "downR":
            if not isinstance(goal, Down):
                raise RuleMismatch("goal is not a down-shift")
            k = mode_of(goal.body)
            if not context_geq(theory, ctx, k):
                raise SideConditionFailed("context does not dominate the down-shift source mode")
            return [Sequent(ctx, goal.body)]

        case "downL":
            prin, y = args
            p = resolve_principal(ctx, prin)
            f = ctx[p].prop
            if not isinstance(f, Down):
                raise RuleMismatch("principal hypothesis is not a down-shift")
            _fresh(ctx, y)
            return [Sequent(_replace(ctx, p, (Hyp(y, f.body),)), goal)]

        case "cut":
            lo, hi, x, a = args
            if not 0 <= lo <= hi <= len(ctx):
                raise SplitOutOfRange("cut split out of range")
            check_prop(theory, a)
            m = mode_of(a)
            omega_a = ctx[lo:hi]
            if not context_geq(theory, omega_a, m):
                raise SideConditionFailed("cut context does not dominate the cut formula mode")
            if not theory.leq(m, r):
                raise SideConditionFailed("cut formula mode does not dominate the goal mode")
            _fresh(ctx, x)
            return [
                Sequent(omega_a, a),
                Sequent(ctx[:lo] + (Hyp(x, a),) + ctx[hi:], goal),
            ]

        case "weak":
            x, pos = args
            if not 0 <= pos < len(ctx):
                raise SplitOutOfRange("weakening position out of range")
            h = ctx[pos]
            if h.var != x:
                raise RuleMismatch(f"hypothesis at position {pos} is {h.var}, not {x}")
            if not theory.allows(mode_of(h.prop), W):
                raise SideConditionFailed(f"mode {mode_of(h.prop)} does not admit weakening")
            return [Sequent(_remove(ctx, pos), goal)]

        case "mobL" | "mobR":
            occ, dest = args
            if not (0 <= occ < len(ctx) and 0 <= dest < len(ctx)):
                raise SplitOutOfRange("mobility index out of range")
            if rule == "mobL":
                if dest < occ:
                    raise RuleMismatch("left mobility must not move the hypothesis left, reading up")
                need = ML
            else:
                if dest > occ:
                    raise RuleMismatch("right mobility must not move the hypothesis right, reading up")
                need = MR
            h = ctx[occ]
            if not theory.allows(mode_of(h.prop), need):
                raise SideConditionFailed(f"mode {mode_of(h.prop)} does not admit {need.value}")
            return [Sequent(_move(ctx, occ, dest), goal)]

        case "contrL" | "contrR":
            p, q = args
            if rule == "contrL":
                if not (0 <= p < q <= len(ctx)):
                    raise SplitOutOfRange("contraction indices out of range")
                kept = ctx[p]
                need = CL
            else:
                if not (0 <= p < q <= len(ctx)):
                    raise SplitOutOfRange("contraction indices out of range")
                kept = ctx[q - 1]
                need = CR
            if not theory.allows(mode_of(kept.prop), need):
                raise SideConditionFailed(f"mode {mode_of(kept.prop)} does not admit {need.value}")
            premise = _insert(ctx, q, kept) if rule == "contrL" else _insert(ctx, p, kept)
            if not ctx_consistent(premise):
                raise RuleMismatch("contraction produced an inconsistent context")
            return [Sequent(premise, goal)]

    raise RuleMismatch(f"unknown sequent rule {rule!r}")


def check_seq(theory: ModeTheory, d: Node, seq: Sequent, *, atomic_id: bool = False) -> None:
    """Check that d derives seq; raises a CheckError (with node path) if not."""
    if not ctx_consistent(seq.ctx):
        raise PresuppositionViolation("a variable labels two different propositions")
    if not context_geq(theory, seq.ctx, mode_of(seq.goal)):
        raise PresuppositionViolation(
            f"context does not dominate the goal mode in {seq}")
    _check(theory, d, seq, atomic_id, ())


def _check(theory: ModeTheory, d: Node, seq: Sequent, atomic_id: bool, path: tuple[int, ...]) -> None:
    try:
        premises = apply_rule(theory, seq, d.rule, d.args, atomic_id=atomic_id)
    except Exception as e:
        if hasattr(e, "at"):
            raise e.at(path)
        raise
    if len(premises) != len(d.subs):
        raise RuleMismatch(
            f"rule {d.rule} needs {len(premises)} subderivations, found {len(d.subs)}").at(path)
    for i, (sub, prem) in enumerate(zip(d.subs, premises)):
        _check(theory, sub, prem, atomic_id, path + (i,))


def premises_of(theory: ModeTheory, seq: Sequent, d: Node) -> list[Sequent]:
    """Premise sequents of the root rule of a derivation known to check."""
    return apply_rule(theory, seq, d.rule, d.args)

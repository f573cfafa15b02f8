"""Context reduction with restricted weakening, and normal-form sets.

A reduction state is an ordered context Ω together with the ambient
hypothesis set Γ and goal mode r (which restrict weakening).  A single step
either inserts a hypothesis from Γ that is not yet present (weakening), merges
two occurrences of a variable toward one side (contraction), or moves a
hypothesis (mobility).  `normal_forms` collects every reachable context with
no repeated variable; the restriction on weakening keeps the reachable set
finite, so the computation terminates.

Exploration is breadth-first over contexts interned as integer tuples (one id
per Γ variable), with a visited set so each context is expanded once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import PresuppositionViolation
from .modes import CL, CR, ML, MR, W, ModeTheory
from .syntax import (
    Hyp,
    OrderedContext,
    UnorderedContext,
    ctx_vars,
    mode_of,
    print_prop,
)


def is_normal(ctx: OrderedContext) -> bool:
    names = ctx_vars(ctx)
    return len(names) == len(set(names))


def _ctx_key(ctx: OrderedContext):
    return (len(ctx), tuple(h.var for h in ctx), tuple(print_prop(h.prop) for h in ctx))


@dataclass(frozen=True)
class ContextSet:
    """A canonically ordered, duplicate-free set of ordered contexts."""

    members: tuple[OrderedContext, ...]

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, ctx: OrderedContext) -> bool:
        return ctx in self.members

    def __bool__(self) -> bool:
        return bool(self.members)

    def union(self, other: "ContextSet") -> "ContextSet":
        return context_set(self.members + other.members)

    def intersect(self, other: "ContextSet") -> "ContextSet":
        mine = set(self.members)
        return context_set(m for m in other.members if m in mine)


def context_set(members: Iterable[OrderedContext]) -> ContextSet:
    return ContextSet(tuple(sorted(set(members), key=_ctx_key)))


EMPTY_SET = ContextSet(())

Step = tuple  # ("W", var, pos) | ("CL"|"CR"|"ML"|"MR", i, j)


class SearchSpaceExceeded(Exception):
    """Raised when an exploration passes its max_states budget."""


class _World:
    """Interned view of one reduction problem: one integer id per Γ variable."""

    def __init__(self, theory: ModeTheory, gamma: UnorderedContext, r: str,
                 omega: OrderedContext):
        for h in omega:
            if h.var not in gamma or gamma[h.var] != h.prop:
                raise PresuppositionViolation(
                    f"hypothesis {h.var} is not in the ambient context")
            if not theory.leq(mode_of(h.prop), r):
                raise PresuppositionViolation(
                    f"hypothesis {h.var} mode does not dominate {r}")
        self.names = sorted(gamma)
        self.ids = {v: i for i, v in enumerate(self.names)}
        self.hyps = [Hyp(v, gamma[v]) for v in self.names]
        self.w_ok: list[bool] = []
        self.cl_ok: list[bool] = []
        self.cr_ok: list[bool] = []
        self.ml_ok: list[bool] = []
        self.mr_ok: list[bool] = []
        for v in self.names:
            props = theory.props(mode_of(gamma[v]))
            dominates = theory.leq(mode_of(gamma[v]), r)
            self.w_ok.append(W in props and dominates)
            self.cl_ok.append(CL in props)
            self.cr_ok.append(CR in props)
            self.ml_ok.append(ML in props)
            self.mr_ok.append(MR in props)
        self.insertable = [i for i in range(len(self.names)) if self.w_ok[i]]
        self.start = tuple(self.ids[h.var] for h in omega)

    def extern(self, ctx: tuple[int, ...]) -> OrderedContext:
        return tuple(self.hyps[i] for i in ctx)

    def successors(self, ctx: tuple[int, ...], restricted: bool) -> Iterator[tuple[Step, tuple[int, ...]]]:
        present = set(ctx)
        n = len(ctx)
        for vid in self.insertable:
            if restricted and vid in present:
                continue
            name = self.names[vid]
            for pos in range(n + 1):
                yield ("W", name, pos), ctx[:pos] + (vid,) + ctx[pos:]
        if len(present) != n:  # duplicates exist
            positions: dict[int, list[int]] = {}
            for i, vid in enumerate(ctx):
                positions.setdefault(vid, []).append(i)
            for vid, pos in positions.items():
                if len(pos) < 2:
                    continue
                cl, cr = self.cl_ok[vid], self.cr_ok[vid]
                if not (cl or cr):
                    continue
                for a in range(len(pos)):
                    for b in range(a + 1, len(pos)):
                        i, j = pos[a], pos[b]
                        if cl:
                            yield ("CL", i, j), ctx[:j] + ctx[j + 1:]
                        if cr:
                            yield ("CR", i, j), ctx[:i] + ctx[i + 1:]
        for i, vid in enumerate(ctx):
            if self.ml_ok[vid] and i > 0:
                rest = ctx[:i] + ctx[i + 1:]
                for j in range(i):
                    yield ("ML", i, j), rest[:j] + (vid,) + rest[j:]
            if self.mr_ok[vid] and i < n - 1:
                rest = ctx[:i] + ctx[i + 1:]
                for j in range(i + 1, n):
                    yield ("MR", i, j), rest[:j] + (vid,) + rest[j:]

    def is_normal(self, ctx: tuple[int, ...]) -> bool:
        return len(set(ctx)) == len(ctx)


def reduce_steps_desc(
    theory: ModeTheory,
    gamma: UnorderedContext,
    r: str,
    ctx: OrderedContext,
    *,
    restricted: bool = True,
) -> list[tuple[Step, OrderedContext]]:
    """Every single reduction step from ctx, with a description of each.

    With `restricted` weakening only inserts variables absent from ctx; the
    unrestricted variant (used as a test oracle) may insert duplicates.
    """
    w = _World(theory, gamma, r, ctx)
    return [(step, w.extern(nxt)) for step, nxt in w.successors(w.start, restricted)]


def reduce_steps(theory: ModeTheory, gamma: UnorderedContext, r: str,
                 ctx: OrderedContext) -> ContextSet:
    """The set of single-step successors of ctx."""
    return context_set(c for _, c in reduce_steps_desc(theory, gamma, r, ctx))


def normal_forms(theory: ModeTheory, gamma: UnorderedContext, r: str,
                 omega: OrderedContext, *, max_states: int | None = None) -> ContextSet:
    """All normal contexts reachable from omega by the reduction relation.

    `max_states` aborts oversized explorations with SearchSpaceExceeded;
    callers that sample random states use it to skip pathological draws
    deterministically.
    """
    w = _World(theory, gamma, r, omega)
    seen = {w.start}
    frontier = [w.start]
    normals = []
    while frontier:
        ctx = frontier.pop()
        if w.is_normal(ctx):
            normals.append(ctx)
        for _, nxt in w.successors(ctx, True):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
        if max_states is not None and len(seen) > max_states:
            raise SearchSpaceExceeded(f"more than {max_states} contexts reached")
    return context_set(w.extern(c) for c in normals)


def find_reduction_path(
    theory: ModeTheory,
    gamma: UnorderedContext,
    r: str,
    omega: OrderedContext,
    target: OrderedContext,
) -> list[Step] | None:
    """A shortest step sequence reducing omega to target, or None.

    Breadth-first with deterministic tie-breaking, so replays are stable.
    """
    w = _World(theory, gamma, r, omega)
    goal = tuple(w.ids[h.var] for h in target if h.var in w.ids)
    if len(goal) != len(target):
        return None
    if w.start == goal:
        return []
    parents: dict[tuple[int, ...], tuple[tuple[int, ...], Step]] = {}
    seen = {w.start}
    frontier = [w.start]
    while frontier:
        nxt_frontier = []
        for ctx in frontier:
            for step, nxt in w.successors(ctx, True):
                if nxt in seen:
                    continue
                seen.add(nxt)
                parents[nxt] = (ctx, step)
                if nxt == goal:
                    path = [step]
                    cur = ctx
                    while cur != w.start:
                        cur, st = parents[cur]
                        path.append(st)
                    path.reverse()
                    return path
                nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return None


def apply_reduction_step(gamma: UnorderedContext, ctx: OrderedContext, step: Step) -> OrderedContext:
    """Apply one recorded reduction step to an ordered context."""
    match step:
        case ("W", var, pos):
            return ctx[:pos] + (Hyp(var, gamma[var]),) + ctx[pos:]
        case ("CL", _i, j):
            return ctx[:j] + ctx[j + 1:]
        case ("CR", i, _j):
            return ctx[:i] + ctx[i + 1:]
        case ("ML", i, j) | ("MR", i, j):
            hyps = list(ctx)
            h = hyps.pop(i)
            hyps.insert(j, h)
            return tuple(hyps)
    raise ValueError(f"bad step {step!r}")


def normal_forms_unrestricted(
    theory: ModeTheory,
    gamma: UnorderedContext,
    r: str,
    omega: OrderedContext,
    bound: int,
    *,
    mult_cap: int | None = None,
    dup_cap: int | None = None,
    max_states: int | None = None,
) -> ContextSet:
    """Normal forms under unrestricted weakening, capped at `bound` insertions.

    Test oracle for the completeness of restricted weakening.  A state with a
    duplicated variable that admits no contraction can never normalize
    (nothing else removes occurrences), so such states are pruned; otherwise
    states are revisited only when they reappear with a larger remaining
    insertion budget.

    `mult_cap` and `dup_cap` truncate the exploration further: per-variable
    occurrence count, and total duplicate occurrences beyond the input's own.
    Neither cap ever cuts below the input context's multiplicities, so every
    restricted-weakening path stays inside the truncated space.
    """
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    w = _World(theory, gamma, r, omega)
    counts0: dict[int, int] = {}
    for vid in w.start:
        counts0[vid] = counts0.get(vid, 0) + 1
    caps: list[int] | None = None
    if mult_cap is not None:
        caps = [max(mult_cap, counts0.get(i, 0)) for i in range(len(w.names))]
    dup_limit: int | None = None
    if dup_cap is not None:
        dup_limit = sum(c - 1 for c in counts0.values() if c > 1) + dup_cap

    def dead(ctx: tuple[int, ...]) -> bool:
        if len(set(ctx)) == len(ctx):
            return False
        counts: dict[int, int] = {}
        for vid in ctx:
            counts[vid] = counts.get(vid, 0) + 1
        if caps is not None and any(c > caps[vid] for vid, c in counts.items()):
            return True
        if dup_limit is not None:
            if sum(c - 1 for c in counts.values() if c > 1) > dup_limit:
                return True
        return any(
            c > 1 and not (w.cl_ok[vid] or w.cr_ok[vid])
            for vid, c in counts.items()
        )

    if dead(w.start):
        return EMPTY_SET
    # process remaining-budget levels from high to low so every context is
    # expanded exactly once, at its maximal surviving budget
    best: dict[tuple[int, ...], int] = {w.start: bound}
    buckets: list[list[tuple[int, ...]]] = [[] for _ in range(bound + 1)]
    buckets[bound].append(w.start)
    normals = set()
    for level in range(bound, -1, -1):
        frontier = buckets[level]
        while frontier:
            ctx = frontier.pop()
            if best[ctx] != level:
                continue
            if w.is_normal(ctx):
                normals.add(ctx)
            for step, nxt in w.successors(ctx, False):
                nb = level - 1 if step[0] == "W" else level
                if nb < 0 or dead(nxt):
                    continue
                if best.get(nxt, -1) >= nb:
                    continue
                best[nxt] = nb
                buckets[nb].append(nxt)
            if max_states is not None and len(best) > max_states:
                raise SearchSpaceExceeded(f"more than {max_states} states reached")
    return context_set(w.extern(c) for c in normals)


def nf_lift(theory: ModeTheory, gamma: UnorderedContext, r: str, xi: ContextSet) -> ContextSet:
    """Pointwise normal forms of a whole context set, unioned."""
    out: list[OrderedContext] = []
    for omega in xi:
        out.extend(normal_forms(theory, gamma, r, omega))
    return context_set(out)

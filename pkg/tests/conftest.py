"""Shared fixtures and random generators for the test suite.

The generators build *checked* derivations by applying rules in the forward
direction (from leaves toward the root), so every generated tree is valid by
construction; the tests still re-validate everything through the checkers.
"""

from __future__ import annotations

import random

import pytest

from ordal.modes import ALL_PROPERTIES, CL, CR, ML, MR, W, ModeTheory, validate
from ordal.seq_kernel import Sequent, check_seq
from ordal.syntax import (
    Atom,
    Down,
    Fuse,
    Hyp,
    LeftImp,
    NameGen,
    Node,
    One,
    Plus,
    Prop,
    RightImp,
    Up,
    With,
    context_geq,
    mode_of,
    node_names,
)


def lnl_theory() -> ModeTheory:
    return validate(
        [("U", [W, CL, CR, ML, MR]), ("L", [])],
        [("U", "L")],
    )


@pytest.fixture
def lnl() -> ModeTheory:
    return lnl_theory()


LNL_ATOMS = {"P": "L", "Q": "U", "R": "L"}


def bang(p: Prop) -> Prop:
    """The unrestricted modality encoded as a shift round trip."""
    return Down("L", Up("U", p))


# ---------------------------------------------------------------------------
# random mode theories and propositions
# ---------------------------------------------------------------------------

def gen_theory(rng: random.Random, n_modes: int | None = None) -> ModeTheory:
    """A random valid theory with 2-3 modes and mixed structural properties."""
    n = n_modes or rng.choice([2, 3])
    names = [f"m{i}" for i in range(n)]
    order = []
    for i in range(n):
        for j in range(n):
            if i < j and rng.random() < 0.6:
                order.append((names[i], names[j]))
    sigma: dict[str, set] = {}
    for name in names:
        sigma[name] = {p for p in ALL_PROPERTIES if rng.random() < 0.35}
    # close upward along the declared order so monotonicity holds
    changed = True
    while changed:
        changed = False
        for a, b in order:
            if not sigma[a] >= sigma[b]:
                sigma[a] |= sigma[b]
                changed = True
    # add the mobility each (weakening, contraction-direction) pair implies
    for name in names:
        props = sigma[name]
        if W in props and CL in props:
            props.add(ML)
        if W in props and CR in props:
            props.add(MR)
    return validate([(nm, sigma[nm]) for nm in names], order)


def gen_prop(rng: random.Random, theory: ModeTheory, mode: str, depth: int) -> Prop:
    """A random well-formed proposition at the given mode."""
    if depth <= 0:
        return rng.choice([Atom(f"a_{mode}", mode), One(mode)])
    options = ["atom", "one", "imp_r", "imp_l", "with", "plus", "fuse"]
    ups = [l for l in theory.modes if theory.leq(mode, l) and l != mode]
    downs = [k for k in theory.modes if theory.leq(k, mode) and k != mode]
    if ups:
        options.append("up")
    if downs:
        options.append("down")
    pick = rng.choice(options)
    if pick == "atom":
        return Atom(f"a_{mode}", mode)
    if pick == "one":
        return One(mode)
    if pick == "up":
        return Up(mode, gen_prop(rng, theory, rng.choice(ups), depth - 1))
    if pick == "down":
        return Down(mode, gen_prop(rng, theory, rng.choice(downs), depth - 1))
    ctor = {"imp_r": RightImp, "imp_l": LeftImp, "with": With, "plus": Plus, "fuse": Fuse}[pick]
    return ctor(gen_prop(rng, theory, mode, depth - 1), gen_prop(rng, theory, mode, depth - 1))


# ---------------------------------------------------------------------------
# random checked sequent derivations, built from the leaves down
# ---------------------------------------------------------------------------

def _mv(ctx, i, j):
    hyps = list(ctx)
    h = hyps.pop(i)
    hyps.insert(j, h)
    return tuple(hyps)


def _rm(ctx, i):
    return ctx[:i] + ctx[i + 1:]


def _count(ctx, var):
    return sum(1 for h in ctx if h.var == var)


class DerivBuilder:
    """Grows a checked derivation downward from an identity or unit leaf."""

    def __init__(self, rng: random.Random, theory: ModeTheory, gen: NameGen):
        self.rng = rng
        self.theory = theory
        self.gen = gen

    def leaf(self, max_prop_depth: int = 1) -> tuple[Node, Sequent]:
        rng = self.rng
        mode = rng.choice(sorted(self.theory.modes))
        if rng.random() < 0.2:
            return Node("oneR"), Sequent((), One(mode))
        p = gen_prop(rng, self.theory, mode, rng.randint(0, max_prop_depth))
        x = self.gen.fresh("v")
        return Node("id", (x,)), Sequent((Hyp(x, p),), p)

    def moves(self, d: Node, seq: Sequent, other=None):
        """All downward rule applications considered by the generator."""
        rng, th = self.rng, self.theory
        ctx, goal = seq.ctx, seq.goal
        r = mode_of(goal)
        out: list[tuple[Node, Sequent]] = []

        def emit(rule, args, subs, new_seq):
            out.append((Node(rule, args, subs), new_seq))

        # discharge an end hypothesis into an implication
        if ctx and mode_of(ctx[-1].prop) == r and _count(ctx, ctx[-1].var) == 1:
            h = ctx[-1]
            emit("impRr", (h.var,), (d,), Sequent(ctx[:-1], RightImp(h.prop, goal)))
        if ctx and mode_of(ctx[0].prop) == r and _count(ctx, ctx[0].var) == 1:
            h = ctx[0]
            emit("impRl", (h.var,), (d,), Sequent(ctx[1:], LeftImp(h.prop, goal)))

        # one-premise right rules
        emit("plusR1", (), (d,), Sequent(ctx, Plus(goal, gen_prop(rng, th, r, 1))))
        emit("plusR2", (), (d,), Sequent(ctx, Plus(gen_prop(rng, th, r, 1), goal)))
        for m in sorted(th.modes):
            if th.leq(m, r) and m != r and context_geq(th, ctx, m):
                emit("upR", (), (d,), Sequent(ctx, Up(m, goal)))
        for m in sorted(th.modes):
            if th.leq(r, m):
                emit("downR", (), (d,), Sequent(ctx, Down(m, goal)))

        # duplicate-branch rules
        emit("withR", (), (d, d), Sequent(ctx, With(goal, goal)))
        for i, h in enumerate(ctx):
            if _count(ctx, h.var) == 1:
                v = self.gen.fresh("v")
                folded = ctx[:i] + (Hyp(v, Plus(h.prop, h.prop)),) + ctx[i + 1:]
                emit("plusL", ((v, 0), h.var), (d, d), Sequent(folded, goal))

        # two-premise rules joining an independent derivation
        if other is not None:
            od, oseq = other
            disjoint = not ({h.var for h in oseq.ctx} | node_names(od)) & (
                {h.var for h in ctx} | node_names(d))
            if disjoint and mode_of(oseq.goal) == r:
                emit("fuseR", (len(ctx),), (d, od),
                     Sequent(ctx + oseq.ctx, Fuse(goal, oseq.goal)))
            if disjoint and mode_of(oseq.goal) == r:
                # fold a hypothesis into an implication applied to `other`
                for i, h in enumerate(ctx):
                    if mode_of(h.prop) != r or _count(ctx, h.var) != 1:
                        continue
                    f = self.gen.fresh("f")
                    imp = RightImp(oseq.goal, h.prop)
                    folded = (ctx[:i] + (Hyp(f, imp),) + oseq.ctx + ctx[i + 1:])
                    emit("impLr", ((f, 0), len(oseq.ctx), h.var), (od, d),
                         Sequent(folded, goal))
                    imp = LeftImp(oseq.goal, h.prop)
                    folded = (ctx[:i] + oseq.ctx + (Hyp(f, imp),) + ctx[i + 1:])
                    emit("impLl", ((f, 0), len(oseq.ctx), h.var), (od, d),
                         Sequent(folded, goal))
                    break

        # left-rule folds on single-occurrence hypotheses
        for i, h in enumerate(ctx):
            if _count(ctx, h.var) != 1:
                continue
            m = mode_of(h.prop)
            v = self.gen.fresh("v")
            partner = gen_prop(rng, th, m, 1)
            emit("withL1", ((v, 0), h.var), (d,),
                 Sequent(ctx[:i] + (Hyp(v, With(h.prop, partner)),) + ctx[i + 1:], goal))
            emit("withL2", ((v, 0), h.var), (d,),
                 Sequent(ctx[:i] + (Hyp(v, With(partner, h.prop)),) + ctx[i + 1:], goal))
            if i + 1 < len(ctx) and mode_of(ctx[i + 1].prop) == m \
                    and ctx[i + 1].var != h.var and _count(ctx, ctx[i + 1].var) == 1:
                fused = Hyp(v, Fuse(h.prop, ctx[i + 1].prop))
                emit("fuseL", ((v, 0), h.var, ctx[i + 1].var), (d,),
                     Sequent(ctx[:i] + (fused,) + ctx[i + 2:], goal))
            for mm in sorted(th.modes):
                if th.leq(mm, m) and th.leq(m, r):
                    emit("upL", ((v, 0), h.var), (d,),
                         Sequent(ctx[:i] + (Hyp(v, Up(mm, h.prop)),) + ctx[i + 1:], goal))
                    break
            for mm in sorted(th.modes):
                if th.leq(m, mm) and th.leq(mm, r):
                    emit("downL", ((v, 0), h.var), (d,),
                         Sequent(ctx[:i] + (Hyp(v, Down(mm, h.prop)),) + ctx[i + 1:], goal))
                    break

        # insert a unit hypothesis anywhere
        for mode in sorted(th.modes):
            if th.leq(mode, r):
                i = rng.randint(0, len(ctx))
                v = self.gen.fresh("v")
                emit("oneL", ((v, 0),), (d,),
                     Sequent(ctx[:i] + (Hyp(v, One(mode)),) + ctx[i:], goal))

        # structural rules
        for i, h in enumerate(ctx):
            m = mode_of(h.prop)
            if th.allows(m, ML) and i > 0:
                j = rng.randint(0, i - 1)
                emit("mobL", (j, i), (d,), Sequent(_mv(ctx, i, j), goal))
            if th.allows(m, MR) and i < len(ctx) - 1:
                j = rng.randint(i + 1, len(ctx) - 1)
                emit("mobR", (j, i), (d,), Sequent(_mv(ctx, i, j), goal))
        for mode in sorted(th.modes):
            if th.allows(mode, W) and th.leq(mode, r):
                i = rng.randint(0, len(ctx))
                dups = [h for h in ctx if mode_of(h.prop) == mode]
                if dups and rng.random() < 0.5:
                    h = rng.choice(dups)
                else:
                    h = Hyp(self.gen.fresh("v"), gen_prop(rng, th, mode, 1))
                emit("weak", (h.var, i), (d,), Sequent(ctx[:i] + (h,) + ctx[i:], goal))
        positions: dict[str, list[int]] = {}
        for i, h in enumerate(ctx):
            positions.setdefault(h.var, []).append(i)
        for var, pos in positions.items():
            if len(pos) >= 2:
                p, q = pos[0], pos[1]
                m = mode_of(ctx[p].prop)
                if th.allows(m, CL):
                    emit("contrL", (p, q), (d,), Sequent(_rm(ctx, q), goal))
                if th.allows(m, CR):
                    emit("contrR", (p, q), (d,), Sequent(_rm(ctx, p), goal))
        return out

    def grow(self, d: Node, seq: Sequent, other=None):
        out = self.moves(d, seq, other)
        if not out:
            return None
        return self.rng.choice(out)


def gen_seq_derivation(
    rng: random.Random,
    theory: ModeTheory,
    target_size: int,
    gen: NameGen | None = None,
) -> tuple[Node, Sequent]:
    """A random checked cut-free derivation of roughly the target size."""
    gen = gen or NameGen()
    b = DerivBuilder(rng, theory, gen)
    d, seq = b.leaf()
    guard = 0
    while d.size() < target_size and guard < 8 * target_size:
        guard += 1
        other = b.leaf() if rng.random() < 0.35 else None
        step = b.grow(d, seq, other)
        if step is None:
            break
        d, seq = step
    check_seq(theory, d, seq)
    return d, seq


def gen_cut_derivation(
    rng: random.Random,
    theory: ModeTheory,
    target_size: int,
    n_cuts: int = 1,
) -> tuple[Node, Sequent]:
    """A random checked derivation containing up to n_cuts cut nodes."""
    gen = NameGen()
    d, seq = gen_seq_derivation(rng, theory, max(2, target_size // (n_cuts + 1)), gen)
    for _ in range(n_cuts):
        step = _cut_once(rng, theory, d, seq, gen)
        if step is None:
            continue
        nd, nseq = step
        try:
            check_seq(theory, nd, nseq)
        except Exception:
            continue
        d, seq = nd, nseq
    check_seq(theory, d, seq)
    return d, seq


def _cut_once(rng, theory, e, eseq, gen):
    """Wrap e under a cut: replace one hypothesis by a derivation of it."""
    r = mode_of(eseq.goal)
    binders = node_names(e)
    candidates = [
        i for i, h in enumerate(eseq.ctx)
        if theory.leq(mode_of(h.prop), r) and _count(eseq.ctx, h.var) == 1
    ]
    if not candidates:
        return None
    i = rng.choice(candidates)
    h = eseq.ctx[i]
    b = DerivBuilder(rng, theory, gen)
    x = gen.fresh("c")
    d1, seq1 = Node("id", (x,)), Sequent((Hyp(x, h.prop),), h.prop)
    for _ in range(rng.randint(0, 5)):
        step = b.grow(d1, seq1)
        if step is None:
            break
        nd, ns = step
        if ns.goal != h.prop:
            break
        d1, seq1 = nd, ns
    new_vars = {v.var for v in seq1.ctx} | node_names(d1)
    if new_vars & ({v.var for v in eseq.ctx} | binders):
        d1, seq1 = Node("id", (x,)), Sequent((Hyp(x, h.prop),), h.prop)
    z = gen.fresh("z")
    e2 = _rename_free(e, h.var, z)
    node = Node("cut", (i, i + len(seq1.ctx), z, h.prop), (d1, e2))
    return node, Sequent(eseq.ctx[:i] + seq1.ctx + eseq.ctx[i + 1:], eseq.goal)


def _rename_free(d: Node, old: str, new: str) -> Node:
    def ren(a):
        if isinstance(a, str) and a == old:
            return new
        if isinstance(a, tuple) and len(a) == 2 and a[0] == old and isinstance(a[1], int):
            return (new, a[1])
        return a

    return Node(d.rule, tuple(ren(a) for a in d.args),
                tuple(_rename_free(s, old, new) for s in d.subs))

"""Mode theories: a preorder of modes, each with a set of structural properties.

Every proposition and hypothesis carries a mode.  The mode's properties decide
which structural rules (weakening, left/right contraction, left/right mobility)
apply to hypotheses of that mode, and the preorder constrains which modes may
appear together in a judgment (the independence condition).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import (
    ClosureViolation,
    DuplicateMode,
    MonotonicityViolation,
    UnknownMode,
    UnknownModeInOrder,
)


class StructuralProperty(Enum):
    W = "W"    # weakening
    CL = "CL"  # contraction toward the left occurrence
    CR = "CR"  # contraction toward the right occurrence
    ML = "ML"  # mobility to the left
    MR = "MR"  # mobility to the right


W = StructuralProperty.W
CL = StructuralProperty.CL
CR = StructuralProperty.CR
ML = StructuralProperty.ML
MR = StructuralProperty.MR

ALL_PROPERTIES = frozenset(StructuralProperty)


@dataclass(frozen=True)
class ModeTheory:
    """A validated mode theory.

    `geq` is the reflexive-transitive closure of the declared order, computed
    once at validation time so every later query is a set lookup.  Instances
    are immutable and safe to share.
    """

    modes: frozenset[str]
    declared_order: frozenset[tuple[str, str]]
    sigma: Mapping[str, frozenset[StructuralProperty]]
    geq: frozenset[tuple[str, str]]

    def leq(self, m: str, r: str) -> bool:
        """True iff m >= r in the closed preorder."""
        if m not in self.modes:
            raise UnknownMode(m)
        if r not in self.modes:
            raise UnknownMode(r)
        return (m, r) in self.geq

    def props(self, m: str) -> frozenset[StructuralProperty]:
        if m not in self.modes:
            raise UnknownMode(m)
        return self.sigma[m]

    def allows(self, m: str, prop: StructuralProperty) -> bool:
        return prop in self.props(m)


def _closure(modes: frozenset[str], declared: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    succ: dict[str, set[str]] = {m: {m} for m in modes}
    for a, b in declared:
        succ[a].add(b)
    # transitive closure by iterated expansion; mode sets stay small
    changed = True
    while changed:
        changed = False
        for a in modes:
            reach = set(succ[a])
            for b in list(reach):
                extra = succ[b] - reach
                if extra:
                    reach |= extra
                    changed = True
            succ[a] = reach
    return frozenset((a, b) for a in modes for b in succ[a])


def validate(
    mode_decls: Iterable[tuple[str, Iterable[StructuralProperty]]],
    order_decls: Iterable[tuple[str, str]],
    *,
    complete_sigma: bool = False,
) -> ModeTheory:
    """Validate raw declarations into a ModeTheory.

    Checks: unique mode names, order declarations over known modes,
    monotonicity of sigma along the preorder, and the two closure conditions
    (weakening plus a contraction direction implies the same-side mobility).
    With `complete_sigma` the implied mobilities are inserted instead of
    rejected.
    """
    sigma: dict[str, frozenset[StructuralProperty]] = {}
    names: list[str] = []
    for name, props in mode_decls:
        if name in sigma:
            raise DuplicateMode(name)
        sigma[name] = frozenset(props)
        names.append(name)
    modes = frozenset(names)
    declared = frozenset(order_decls)
    for a, b in declared:
        if a not in modes:
            raise UnknownModeInOrder(a)
        if b not in modes:
            raise UnknownModeInOrder(b)
    geq = _closure(modes, declared)

    def implied_mobility(props: frozenset[StructuralProperty]) -> frozenset[StructuralProperty]:
        missing = set()
        if W in props and CL in props and ML not in props:
            missing.add(ML)
        if W in props and CR in props and MR not in props:
            missing.add(MR)
        return frozenset(missing)

    if complete_sigma:
        sigma = {m: props | implied_mobility(props) for m, props in sigma.items()}
    else:
        for m in sorted(modes):
            missing = implied_mobility(sigma[m])
            if missing:
                raise ClosureViolation(m, missing)

    for k, m in sorted(geq):
        if k != m and not sigma[k] >= sigma[m]:
            raise MonotonicityViolation(k, m, sigma[m] - sigma[k])

    return ModeTheory(modes=modes, declared_order=declared, sigma=sigma, geq=geq)


def leq(theory: ModeTheory, m: str, r: str) -> bool:
    """True iff m >= r in the closed preorder."""
    return theory.leq(m, r)


def multiplicity_compatible(theory: ModeTheory, m: str, n: int) -> bool:
    """Whether n occurrences of a mode-m hypothesis may be cut at once.

    Zero occurrences need weakening, one is always fine, and more than one
    needs a contraction direction.
    """
    if n < 0:
        raise ValueError("occurrence count must be nonnegative")
    props = theory.props(m)
    if n == 1:
        return True
    if n == 0:
        return W in props
    return CL in props or CR in props

"""Exception types raised across the package."""

from __future__ import annotations


class OrdalError(Exception):
    """Base class for all errors raised by this package."""


# --- mode theory validation ---

class ModeTheoryError(OrdalError):
    pass


class DuplicateMode(ModeTheoryError):
    def __init__(self, name: str):
        super().__init__(f"duplicate mode declaration: {name}")
        self.name = name


class UnknownModeInOrder(ModeTheoryError):
    def __init__(self, name: str):
        super().__init__(f"order declaration mentions unknown mode: {name}")
        self.name = name


class UnknownMode(ModeTheoryError):
    def __init__(self, name: str):
        super().__init__(f"unknown mode: {name}")
        self.name = name


class MonotonicityViolation(ModeTheoryError):
    def __init__(self, upper: str, lower: str, missing):
        props = ", ".join(sorted(p.value for p in missing))
        super().__init__(
            f"sigma({upper}) must include sigma({lower}) since {upper} >= {lower}; "
            f"missing {{{props}}}")
        self.upper = upper
        self.lower = lower
        self.missing = frozenset(missing)


class ClosureViolation(ModeTheoryError):
    def __init__(self, mode: str, missing):
        props = ", ".join(sorted(p.value for p in missing))
        super().__init__(
            f"sigma({mode}) has weakening and contraction but lacks the implied "
            f"mobility {{{props}}} (use complete_sigma to add it automatically)")
        self.mode = mode
        self.missing = frozenset(missing)


# --- proposition well-formedness ---

class PropError(OrdalError):
    pass


class ModeMismatch(PropError):
    def __init__(self, subterm, expected: str, found: str):
        super().__init__(f"mode mismatch in {subterm!r}: expected {expected}, found {found}")
        self.subterm = subterm
        self.expected = expected
        self.found = found


class ShiftViolation(PropError):
    def __init__(self, subterm, upper: str, lower: str):
        super().__init__(
            f"shift {subterm!r} requires {upper} >= {lower} in the mode preorder")
        self.subterm = subterm
        self.upper = upper
        self.lower = lower


class UnknownAtom(PropError):
    def __init__(self, name: str):
        super().__init__(f"atom {name} is not declared in the signature")
        self.name = name


# --- surface syntax ---

class ParseError(OrdalError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


# --- derivation checking (sequent calculus, natural deduction, skeletons) ---

class CheckError(OrdalError):
    """Checking failure at a derivation node; `path` is the root-to-node index path."""

    def __init__(self, message: str):
        super().__init__(message)
        self.path: tuple[int, ...] = ()

    def at(self, path: tuple[int, ...]) -> "CheckError":
        self.path = path
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if self.path:
            return f"at node {'.'.join(map(str, self.path))}: {base}"
        return base


class RuleMismatch(CheckError):
    pass


class SideConditionFailed(CheckError):
    pass


class SplitOutOfRange(CheckError):
    pass


class FreshnessViolation(CheckError):
    pass


class PresuppositionViolation(CheckError):
    pass


class OutputMismatch(CheckError):
    pass


class ScopeViolation(CheckError):
    pass


class SpanMismatch(CheckError):
    pass


class IllFormedSkeleton(CheckError):
    pass


# --- metatheory operations ---

class PreconditionViolation(OrdalError):
    pass


class IllFormedProp(OrdalError):
    pass


class TargetNotInXi(OrdalError):
    pass

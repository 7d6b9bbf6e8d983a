"""Exception hierarchy shared by all regsim modules.

The split matters for the CLI exit-code contract: user-facing input problems
(bad parameters, mismatched domains, exhausted ladders, blown enumeration
caps) are recoverable configuration errors, while an InternalContractError
means a guarantee the library itself is supposed to maintain was observed to
fail and should be reported as a bug.
"""


class RegsimError(Exception):
    """Base class for all regsim errors."""


class ValidationError(RegsimError):
    """A precondition or configuration constraint was violated."""


class DomainMismatchError(ValidationError):
    """Two objects that must share a domain have different sizes."""

    def __init__(self, expected: int, got: int, what: str = "operand"):
        self.expected = expected
        self.got = got
        super().__init__(f"domain-size mismatch: {what} has size {got}, expected {expected}")


class EmptyFamilyError(ValidationError):
    """An operation that scans a distinguisher family received an empty one."""


class CapExceededError(ValidationError):
    """An exact enumeration would exceed the configured size cap."""

    def __init__(self, needed: int, cap: int, what: str):
        self.needed = needed
        self.cap = cap
        super().__init__(
            f"{what} would need {needed} entries, above the cap of {cap}; "
            "use a Monte Carlo estimate outside this library instead"
        )


class LadderExhaustedError(RegsimError):
    """A growth map stepped past the top of its ladder mid-run."""

    def __init__(self, name: str, level: int, depth: int, phi: float | None = None):
        self.name = name
        self.level = level
        self.depth = depth
        self.phi = phi
        msg = f"ladder '{name}' exhausted: growth from level {level} leaves [0, {depth})"
        if phi is not None:
            msg += f" (current potential {phi:.6g})"
        super().__init__(msg)


class InternalContractError(RegsimError):
    """A guarantee the library maintains was observed to fail (a bug)."""

"""Exception taxonomy shared across the package.

Validation problems (bad supports, broken invariants, infeasible inputs) are
ValueError subclasses; numerical and statistical failures are RuntimeError
subclasses carrying diagnostics. The command line interface maps the two
families to distinct exit codes.
"""

from __future__ import annotations


class ContractViolationError(ValueError):
    """An input breaks a documented precondition or type invariant."""


class SupportMismatchError(ContractViolationError):
    """Two objects that must share a support do not."""


class DegenerateLawError(ContractViolationError):
    """The operation is undefined for this degenerate law (e.g. only mass at 0)."""


class InfeasibleError(ContractViolationError):
    """The feasible set of an optimization or probe is empty."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its target accuracy.

    The optional ``diagnostics`` dict carries the best iterate, residuals and
    iteration counts for post-mortem inspection.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StatisticalFailureError(RuntimeError):
    """A Monte Carlo routine produced no usable samples (e.g. zero acceptances)."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

"""Exception hierarchy shared across the toolkit."""


class VeriscopeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(VeriscopeError):
    """Caller violated a precondition (bad arguments, mismatched dims, ...)."""


class ContractViolation(VeriscopeError):
    """A remote provider answered outside its wire contract."""


class ProviderUnavailable(VeriscopeError):
    """A remote provider could not be reached within the retry budget.

    Retryable from the caller's point of view: the request itself was fine.
    """


class VerificationImpossible(VeriscopeError):
    """The knowledge base holds no text-bearing evidence to ground claims on."""


class GenerationError(VeriscopeError):
    """The synthetic corpus forge could not produce a changed perturbation."""


class DatasetValidationError(VeriscopeError):
    """Strict-mode dataset loading found defective records."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__(f"{len(self.issues)} invalid record(s)")

"""Exception types shared across the package.

Each CLI-facing error carries the process exit code it maps to.
"""


class DHError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(DHError, ValueError):
    """Malformed input file or inconsistent input contents."""

    exit_code = 2


class CapExceededError(DHError):
    """A configured size cap (dense qubits, Pauli terms, ...) was exceeded."""

    exit_code = 3


class InequivalentError(DHError):
    """Two states are not gauge equivalent, so no witness exists."""

    exit_code = 4


class StabilizerViolationError(DHError, ValueError):
    """A would-be gauge transform does not fix the reference vector up to phase."""

    exit_code = 5


class WitnessError(DHError):
    """``recover_witness`` could not produce a witness.

    ``reason`` is ``"untracked"`` or ``"inequivalent"``.
    """

    def __init__(self, reason, message=None):
        self.reason = reason
        super().__init__(message or reason)

    @property
    def exit_code(self):
        return 4 if self.reason == "inequivalent" else 2


class GaugeFixError(DHError):
    """Region gauge fixing failed.

    ``reason`` is ``"flux-obstructed"`` or ``"not-simply-connected"``.
    """

    exit_code = 2

    def __init__(self, reason, message=None):
        self.reason = reason
        super().__init__(message or reason)

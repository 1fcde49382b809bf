"""Exception hierarchy shared by every dwarfbench module."""

from __future__ import annotations


class DwarfBenchError(Exception):
    """Base class for all errors raised by dwarfbench."""


class ConfigError(DwarfBenchError, ValueError):
    """Invalid user-supplied configuration (profiles, run configs, CLI flags)."""


# -- core model ---------------------------------------------------------------

class OrderingViolation(ConfigError):
    pass


class NonPositiveBudget(ConfigError):
    pass


class UnknownBenchmark(ConfigError, LookupError):
    pass


# -- timing / stats -------------------------------------------------------------

class InsufficientTrials(DwarfBenchError, ValueError):
    pass


class EmptyInput(DwarfBenchError, ValueError):
    pass


class TooFewSamples(DwarfBenchError, ValueError):
    pass


class PilotTooSmall(DwarfBenchError, ValueError):
    pass


# -- sizing ---------------------------------------------------------------------

class ParamOutOfBounds(DwarfBenchError, ValueError):
    pass


class BudgetTooSmall(DwarfBenchError, ValueError):
    pass


class InfeasibleClass(DwarfBenchError):
    """A size class collapses onto the next-smaller class for this device."""


# -- kernels --------------------------------------------------------------------

class KernelInputError(DwarfBenchError, ValueError):
    """Kernel precondition failed."""


class SingularPivot(DwarfBenchError, ArithmeticError):
    pass


class MalformedCSR(KernelInputError):
    pass


class NotPowerOfTwo(KernelInputError):
    pass


class EmptySequence(KernelInputError):
    pass


class KTooLarge(KernelInputError):
    pass


class SourceOutOfRange(KernelInputError):
    pass


class NonPositiveIntensity(KernelInputError):
    pass


class BadLambda(KernelInputError):
    pass


# -- energy ---------------------------------------------------------------------

class NotAvailable(DwarfBenchError):
    """The energy provider cannot produce a reading right now."""


class CounterWrap(DwarfBenchError):
    """A provider reported a cumulative counter that went backwards."""


class NegativePower(DwarfBenchError, ValueError):
    pass


# -- results store ----------------------------------------------------------------

class IoFailure(DwarfBenchError, OSError):
    pass


class LogFormatError(DwarfBenchError, ValueError):
    """Base for everything parse_log can raise."""


class MalformedHeader(LogFormatError):
    pass


class MalformedRecord(LogFormatError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class VersionMismatch(LogFormatError):
    pass


# -- reporting --------------------------------------------------------------------

class EmptyLogs(DwarfBenchError, ValueError):
    pass


class MixedFormatVersions(DwarfBenchError, ValueError):
    pass

"""Exception types shared across the package.

Every error carries a stable ``name`` so the command line can report it on
stderr.  ``InputError`` subclasses map to exit code 2, ``NumericError``
subclasses to exit code 1.
"""

from __future__ import annotations


class SimplexSearchError(Exception):
    exit_code = 1

    @property
    def name(self) -> str:
        return type(self).__name__


class InputError(SimplexSearchError, ValueError):
    exit_code = 2


class NumericError(SimplexSearchError, ArithmeticError):
    exit_code = 1


class InvalidSpec(InputError):
    pass


class UnknownVertex(InputError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return Exception.__str__(self)


class LevelOutOfRange(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidOracle(InputError):
    pass


class NonPositiveGamma(InputError):
    pass


class InvalidStage(InputError):
    pass


class UnknownScenario(InputError):
    pass


class UnknownTable(InputError):
    pass


class EmptyWindow(InputError):
    pass


class InvalidSchedule(InputError):
    pass


class NotEquitable(NumericError):
    pass


class ConvergenceFailure(NumericError):
    pass


class NoCrossing(NumericError):
    pass


class DegenerateBlockGround(NumericError):
    pass


class ThresholdNotMetAtCenter(NumericError):
    pass

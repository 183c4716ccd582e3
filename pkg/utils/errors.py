"""
Exception hierarchy shared by every entkit package.
"""


class EntkitError(Exception):
    """Base class for toolkit errors."""


class InputError(EntkitError, ValueError):
    """Malformed or unsupported input (unknown id, bad option, bad file)."""


class DimensionError(InputError):
    """Shape or subsystem-dimension mismatch."""


class ParameterRangeError(InputError):
    """Family parameter outside its documented range."""


class DomainError(EntkitError, ValueError):
    """Input is well formed but lies outside the mathematical domain of the operation."""


class NormalizationError(DomainError):
    """A constructed state failed density-matrix validation."""


class HermiticityError(DomainError):
    """Hermitian routine received a matrix that is not Hermitian within tolerance."""


class ConvergenceError(EntkitError, RuntimeError):
    """Numerical decomposition did not converge."""


class FixtureMismatchError(EntkitError):
    """A regenerated table drifted from its embedded fixture."""

    def __init__(self, table_id: str, mismatches: list):
        self.table_id = table_id
        self.mismatches = mismatches
        super().__init__(f"Table {table_id}: {len(mismatches)} value(s) differ from fixture")


# Exit codes used by the command line front end
EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_FIXTURE = 4


def exit_code_for(error: Exception) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, FixtureMismatchError):
        return EXIT_FIXTURE
    if isinstance(error, DomainError):
        return EXIT_DOMAIN
    if isinstance(error, (InputError, KeyError, ValueError, OSError)):
        return EXIT_INPUT
    return EXIT_DOMAIN

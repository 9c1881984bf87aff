"""Rule-defined homeomorphisms of path spaces and random walks on their orbits."""

from .errors import (
    CapExceeded,
    ConvergenceError,
    InadmissibleWord,
    NeedsMoreLetters,
    NonUniformMachine,
    NotEventuallyPeriodic,
    ParseError,
    SSLabError,
    ValidationError,
)
from .words import GroupWord, RaySpec

__version__ = "0.1.0"

from .document import parse_machine, serialize_machine
from .engine import (
    apply_prefix,
    apply_ray,
    apply_word,
    derive_inverse,
    equals_exact,
    is_clean,
    is_trivial,
    is_trivial_to_depth,
    residual,
    section_of,
    state_closure,
    validate,
)
from .machine import Alphabet, MachineDef, Rule, Subshift

__all__ = [
    "Alphabet",
    "MachineDef",
    "Rule",
    "Subshift",
    "apply_prefix",
    "apply_ray",
    "apply_word",
    "derive_inverse",
    "equals_exact",
    "is_clean",
    "is_trivial",
    "is_trivial_to_depth",
    "parse_machine",
    "residual",
    "section_of",
    "serialize_machine",
    "state_closure",
    "validate",
]

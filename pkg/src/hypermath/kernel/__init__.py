from .reduce import FuelExhausted, NormalForm, normalize, reduce_step, step
from .syntax import ParseError, parse, show, token_length
from .typing import (
    CheckResult, DuplicateName, Judgment, KernelError, OpenTerm, TypeMismatch,
    UnboundVariable, check_proof, convertible, define, infer, judge, mk_constructor,
)

__all__ = [
    "FuelExhausted", "NormalForm", "normalize", "reduce_step", "step",
    "ParseError", "parse", "show", "token_length",
    "CheckResult", "DuplicateName", "Judgment", "KernelError", "OpenTerm", "TypeMismatch",
    "UnboundVariable", "check_proof", "convertible", "define", "infer", "judge", "mk_constructor",
]

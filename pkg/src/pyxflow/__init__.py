"""Compile-time information-flow analysis for PyX with readers-writers labels."""

from .analyzer import Analyzer, analyze_program
from .interpreter import (
    DEFAULT_STEP_BUDGET, Machine, PyxRuntimeError, RuntimeFault, StepBudgetExhausted, Store,
    Terminated, eval_expr, run,
)
from .labels import Label, LabelError, Universe, bottom, join, label_from_json, leq, meet, top, with_owner
from .lexer import LexError, PyxSyntaxError, tokenize
from .oracle import (
    Counterexample, NoCounterexample, Observation, OracleError, check_ni, indistinguishable,
    low_equivalent, observe,
)
from .parser import ParseError, parse, parse_source
from .policy import (
    AnalysisEnv, FunctionPolicy, PolicyError, ProgramSpec, check_initial_environment, dump_policy,
    load_policy, loads_policy, policy_from_dict,
)
from .report import AnalysisInputError, AnalysisReport, Diagnostic, FixpointError, Misuse, Verdict
from .syntax import format_program
from .varsets import sources_of, targets_of, vars_of

__version__ = "0.1.0"

__all__ = [
    "Analyzer", "analyze_program",
    "DEFAULT_STEP_BUDGET", "Machine", "PyxRuntimeError", "RuntimeFault", "StepBudgetExhausted",
    "Store", "Terminated", "eval_expr", "run",
    "Label", "LabelError", "Universe", "bottom", "join", "label_from_json", "leq", "meet", "top",
    "with_owner",
    "LexError", "PyxSyntaxError", "tokenize",
    "Counterexample", "NoCounterexample", "Observation", "OracleError", "check_ni",
    "indistinguishable", "low_equivalent", "observe",
    "ParseError", "parse", "parse_source",
    "AnalysisEnv", "FunctionPolicy", "PolicyError", "ProgramSpec", "check_initial_environment",
    "dump_policy", "load_policy", "loads_policy", "policy_from_dict",
    "AnalysisInputError", "AnalysisReport", "Diagnostic", "FixpointError", "Misuse", "Verdict",
    "format_program", "sources_of", "targets_of", "vars_of",
]

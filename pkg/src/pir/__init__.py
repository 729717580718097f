"""The πR calculus: syntax, reduction semantics and a substructural typechecker."""

from pir.checker import (
    Inconclusive,
    NotTypable,
    ProbeReport,
    check_config,
    infer,
    subject_reduction_probe,
    verdict,
)
from pir.congruence import canonical_form, congruent
from pir.consistency import is_consistent, lemma1_check
from pir.derivation import Derivation, Judgment, deserialize, serialize, validate
from pir.parser import ParseError, SourceFile, parse, parse_process, parse_type, pretty
from pir.semantics import error_witnesses, explore, replay, run, successors
from pir.syntax import (
    Configuration,
    Name,
    ProcVar,
    State,
    Var,
    alpha_eq,
    subst_names,
    subst_procvar,
)
from pir.typesys import AFF, PROC, UNR, Chan, TypeEnv, Unique, ch, decrement, split, subtype

__all__ = [
    "AFF", "PROC", "UNR", "Chan", "Configuration", "Derivation", "Inconclusive", "Judgment",
    "Name", "NotTypable", "ParseError", "ProbeReport", "ProcVar", "SourceFile", "State",
    "TypeEnv", "Unique", "Var", "alpha_eq", "canonical_form", "ch", "check_config",
    "congruent", "decrement", "deserialize", "error_witnesses", "explore", "infer",
    "is_consistent", "lemma1_check", "parse", "parse_process", "parse_type", "pretty",
    "replay", "run", "serialize", "split", "subject_reduction_probe", "subst_names",
    "subst_procvar", "subtype", "successors", "validate", "verdict",
]

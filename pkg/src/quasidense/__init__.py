"""Decision procedure for the modal logics K + (◇^k p → ◇^l p), k < l,
via tableau saturation and path-based filtration."""

from .formula import (
    FALSE, TRUE, And, Atom, Bottom, Box, Diamond, Formula, Implies, Not, Or,
    ParseError, TargetFormula, parse,
)
from .kripke import (
    CertificateReport, Frame, KLSpec, Model, PointedModel,
    check_model, is_kl_frame, model_from_json, model_to_dot, model_to_json, satisfies,
)
from .tableau import Closed, Open, ResourceLimit, TableauConfig, saturate
from .filtration import FiltratedModel, build_filtrated, path_signature, restrict
from .solver import Sat, SolverConfig, Unknown, Unsat, decide, verify_certificate
from .oracle import Found, NoneUpTo, SearchBound, enumerate_models, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "FALSE", "TRUE", "And", "Atom", "Bottom", "Box", "Diamond", "Formula", "Implies",
    "Not", "Or", "ParseError", "TargetFormula", "parse",
    "CertificateReport", "Frame", "KLSpec", "Model", "PointedModel", "check_model",
    "is_kl_frame", "model_from_json", "model_to_dot", "model_to_json", "satisfies",
    "Closed", "Open", "ResourceLimit", "TableauConfig", "saturate",
    "FiltratedModel", "build_filtrated", "path_signature", "restrict",
    "Sat", "SolverConfig", "Unknown", "Unsat", "decide", "verify_certificate",
    "Found", "NoneUpTo", "SearchBound", "enumerate_models", "generate_corpus",
]

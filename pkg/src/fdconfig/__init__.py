"""fdconfig: interactive product configuration over extended feature
models, backed by a finite-domain constraint solver."""

from .domain import Domain
from .errors import (
    DecisionRejected,
    FdConfigError,
    InfeasibleModelError,
    ParseError,
    ResourceLimitError,
    TranslateError,
    UnknownDecisionError,
)
from .model import FeatureModel, parse_model, serialize_model, validate
from .solver import CancelToken, Solver, Status
from .translate import CompiledModel, compile_model, project
from .consequences import (
    Consequences,
    analyses,
    model_consequences,
    valid_domains_enumerate,
    valid_domains_probe,
)
from .session import Decision, Restriction, Session, SessionSnapshot, create_session

__version__ = "0.1.0"

__all__ = [
    "CancelToken",
    "CompiledModel",
    "Consequences",
    "Decision",
    "DecisionRejected",
    "Domain",
    "FdConfigError",
    "FeatureModel",
    "InfeasibleModelError",
    "ParseError",
    "ResourceLimitError",
    "Restriction",
    "Session",
    "SessionSnapshot",
    "Solver",
    "Status",
    "TranslateError",
    "UnknownDecisionError",
    "analyses",
    "compile_model",
    "create_session",
    "model_consequences",
    "parse_model",
    "project",
    "serialize_model",
    "valid_domains_enumerate",
    "valid_domains_probe",
    "validate",
]

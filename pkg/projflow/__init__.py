"""
projflow: exact construction, verification and classification of projective flows.

This package checks the projective translation equation, extracts and
conjugates vector fields, solves the fundamental ODE of a plane field for
radical solutions, builds flows from first integrals and classifies
solenoidal, symmetric and orbit-sharing flows.
"""

__version__ = "0.1.0"

from projflow.config import ProjflowConfig
from projflow.errors import (
    BranchError,
    CatalogError,
    DomainError,
    ExpressionSyntaxError,
    NotRationalError,
    ProjflowError,
    SingularityError,
    UnknownVariableError,
)
from projflow.flows import FlowMap, VectorField, catalog, catalog_list
from projflow.models import (
    ClassReport,
    Discrepancy,
    Verdict,
    VerdictResult,
    VerificationMode,
    VerificationReport,
)

__all__ = [
    # Version
    "__version__",
    # Models
    "ClassReport",
    "Discrepancy",
    "Verdict",
    "VerdictResult",
    "VerificationMode",
    "VerificationReport",
    # Core
    "FlowMap",
    "VectorField",
    "catalog",
    "catalog_list",
    "ProjflowConfig",
    # Errors
    "ProjflowError",
    "ExpressionSyntaxError",
    "UnknownVariableError",
    "DomainError",
    "NotRationalError",
    "BranchError",
    "SingularityError",
    "CatalogError",
]

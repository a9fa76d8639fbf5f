"""Jet-based differential geometry for contact metric structures and Ricci solitons."""

from .contact import ContactStructure, classify, d_homothetic_deform, identity_suite, verify_axioms
from .errors import (
    CapabilityError,
    DomainError,
    GeometryError,
    InvalidArgument,
    NumericError,
    PreconditionError,
    SingularValueError,
    TheoremViolation,
)
from .fields import Chart, ScalarField, TensorField, evaluate, sample_points
from .jets import Jet, JetSpec
from .models import build_heisenberg, resolve_model
from .report import Check, VerificationReport
from .riemann import MetricGeometry, universal_suite
from .soliton import (
    SolitonData,
    fit_lambda,
    integrability_check,
    lemma1_suite,
    soliton_report,
    soliton_residual,
    theorem1_suite,
    theorem2_suite,
)

__version__ = "0.1.0"

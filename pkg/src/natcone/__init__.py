"""natcone: conic interior-point solving over exotic cones.

The package splits into: ``model`` (conic standard form, residuals,
certificates), ``cones`` (the cone catalog with barrier oracles), ``solver``
(the homogeneous self-dual embedding method), ``bridges`` (rewrites onto
standard cones and solution map-back), ``interp`` (interpolation data for
weighted SOS cones) and ``bench`` (seeded benchmark generators and a CSV
harness).
"""

from .bridges import EFMapping, EFOptions, ef_cone_dims, extend, map_back
from .cones import make_cone
from .interp import build_interp, cheb_eval
from .model import (
    AmbiguousCertificateError,
    Certificate,
    CertificateKind,
    ConicProblem,
    PrimalDualPoint,
    ValidationError,
    classify_certificate,
    objective_rel_diff,
    problem_from_json,
    problem_to_json,
    residual_eps,
    sdim,
    smat,
    svec,
    validate,
)
from .solver import SolveOptions, SolveResult, SolveStatus, solve

__version__ = "0.1.0"

__all__ = [
    "AmbiguousCertificateError",
    "Certificate",
    "CertificateKind",
    "ConicProblem",
    "EFMapping",
    "EFOptions",
    "PrimalDualPoint",
    "SolveOptions",
    "SolveResult",
    "SolveStatus",
    "ValidationError",
    "build_interp",
    "cheb_eval",
    "classify_certificate",
    "ef_cone_dims",
    "extend",
    "make_cone",
    "map_back",
    "objective_rel_diff",
    "problem_from_json",
    "problem_to_json",
    "residual_eps",
    "sdim",
    "smat",
    "solve",
    "svec",
    "validate",
]

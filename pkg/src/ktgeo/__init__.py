"""Numerical curvature engine for Hermitian manifolds with skew torsion.

Computes the Levi-Civita, Bismut and Chern connections of chart-described
Hermitian manifolds, all derived curvature objects, and verifies the
pointwise identity web relating them; classifies KT-type structures and
evaluates the string background equations on a catalog of example geometries.
"""

__version__ = "0.1.0"

from .catalog import (
    HermitianManifold, catalog_names, conformal_rescale, get_manifold,
    register_manifold,
)
from .classify import StructureFlags, check_hkt, classify, vanishing_hypotheses
from .connections import (
    ConnectionField, bismut, chern, connection, covariant_derivative,
    lee_form, levi_civita, torsion_C, torsion_T,
)
from .curvature import CurvaturePack, curvature_pack, lambda_omega, riemann, weyl_selfdual
from .errors import (
    ChartDomainError, ContractViolationError, ConventionError, GeometryError,
    NumericError, PreconditionError, UnknownManifoldError,
)
from .identities import ResidualEntry, run_identity_suite, verify_conformal_trace, verify_dim4
from .string_eqs import StringReport, run_string_suite, string_residual, verify_th1
from .tensor_core import (
    Frame, PointTensor, TensorField, codifferential, exterior_derivative,
    hodge_star, j_trace, orthonormal_frame, tensor_norm_sq,
)

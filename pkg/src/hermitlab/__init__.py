"""Numerical curvature laboratory for almost Hermitian manifolds."""

from .algebra import (
    AntiholoTriple,
    ConstancyReport,
    CurvatureTensor,
    HermitianPoint,
    RicciForm,
    TangentPlane,
    eq2_residual,
    eq3_check,
    fit_rk_form,
    fit_space_form,
    j_adapted_eigenframe,
    kahler_angle,
    pi1,
    pi2,
    psi,
    ricci,
    rk_residual,
    sample_antiholomorphic_triple,
    sample_theta_plane,
    sectional_curvature,
    theta_constancy,
)
from .catalog import ModelSpec, build_model, catalog, model_spec
from .manifold import (
    ChartManifold,
    PointGeometry,
    PreconditionError,
    bianchi2_residual,
    christoffel,
    eq8_residual,
    nabla_j,
    nabla_r,
    nu_gradient,
    point_geometry,
    riemann,
)
from .schur import (
    Classification,
    GridSpec,
    TheoremVerdict,
    Tolerances,
    classify,
    scan,
    verify_theorem1,
    verify_theorem2,
)

__version__ = "0.1.0"

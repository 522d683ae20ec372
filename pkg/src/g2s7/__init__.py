"""Numerical tensor calculus for the round nearly-parallel structure on the
7-sphere and its minimal hypersurfaces."""

__version__ = "0.1.0"

from .octonion import Octonion, cross2, cross3, oct_mul
from .forms import (
    AltForm,
    MetricTensor,
    decompose_high,
    dump_form,
    hodge_star,
    inner,
    interior,
    load_form,
    metric_from_3form,
    phi0,
    project2,
    project3,
    psi0,
    sym2_to_3form,
    wedge,
)
from .sphere import (
    CROSS_SIGN,
    TAU0,
    SpherePoint,
    TangentVector,
    TorsionTensor,
    cross_s7,
    make_tangent_frame,
    nearly_curvature,
    phi_psi_at,
    sphere_nabla,
    tangent_project,
    torsion_at,
    torsion_forms,
)
from .hypersurface import (
    HypersurfaceChart,
    ShapeData,
    acs_derivative,
    acs_divergence,
    apply_acs,
    cross_defect,
    cross_product_derivative,
    gauss_residual,
    hyper_curvature,
    nearly_kahler_defect,
    shape_at,
    umbilic_defect,
)
from .surfaces import clifford_torus, geodesic_sphere, surface_by_name
from .eigencheck import (
    GridField,
    Report,
    conformal_on_sphere,
    convergence_study,
    divergence_residuals,
    eigenfunction_gradient,
    eigenfunction_value,
    eigenvalue_report,
    laplace_beltrami,
    restrict_field,
)

__all__ = [name for name in dir() if not name.startswith("_")]

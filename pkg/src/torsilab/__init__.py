"""Torsional rigidity of Riemannian domains under geometric flows.

Computes the mean-exit-time integral (torsional rigidity) of domains
carrying chart metrics, evolves the metrics along Ricci flow and inverse
mean curvature flow, and certifies the measured rigidity series against the
variational bound envelopes those flows admit.
"""

__version__ = "0.1.0"

from .bounds import (
    DivergenceField,
    check_divergence,
    field_upper_bound,
    gradient_field,
    polya_lower_bound,
    transported_lower_bound,
    transported_upper_bound,
)
from .certificates import (
    BoundEnvelope,
    FunctionalVerdict,
    RigiditySeries,
    compare_with_disk,
    disk_reference,
    envelope_contains,
    functional_checks,
    general_envelope,
    imcf_envelope,
    normalized_ricci_envelope,
    ricci_envelope,
    su2_delta_envelope,
)
from .fem import RigidityReport, assemble, kernel_backend, solve_exit_time
from .flows import (
    CurvatureBounds,
    FlowPath,
    IdentityResiduals,
    curvature_bounds,
    einstein_flow,
    einstein_path,
    flow_identity_residuals,
    imcf_sphere_flow,
    imcf_sphere_path,
    nil3_flow,
    nil3_path,
    su2_flow,
    su2_path,
)
from .meshing import SimplicialMesh, build_box_mesh, build_disk_mesh, load_mesh, save_mesh
from .metrics import (
    NIL3,
    SU2,
    HomogeneousParams3,
    MetricField,
    RadialWarp,
    ScalingParams,
    euclidean,
    flat_warp,
    metric_at,
    nil3_chart_metric,
    nil3_curvature_closed_form,
    radial_warp_metric,
    scale_warp,
    scaled_metric,
    scalar_curvature_numeric,
    sphere_warp,
    su2_ricci_eigenvalues,
    volume_density,
)
from .radial import RadialRigidity, radial_rigidity, unit_sphere_volume

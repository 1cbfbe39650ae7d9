"""Neumann-Poincaré spectra and transmission problems on planar curves."""
from .contrast import (
    Cone,
    ContrastError,
    ContrastVerdict,
    Polygon,
    SignDefinite,
    SmoothVMO,
    Verdict,
    a_bound,
    b_bound,
    critical_interval,
    lambda_to_mu,
    mu_to_lambda,
    polygon_intervals,
    verdict,
)
from .geometry import (
    CornerSpec,
    Curve,
    GeometryError,
    QuadratureMesh,
    build_mesh,
    curve_from_samples,
    geometry_from_dict,
    make_circle,
    make_ellipse,
    make_polygon,
    sharpest_corner,
)
from .npops import (
    BoundaryOperatorMatrix,
    OperatorKind,
    assemble_adj_double_layer,
    assemble_double_layer,
    assemble_single_layer,
    duality_defect,
    symmetrization_residual,
)
from .spectral import (
    Space,
    SpectrumError,
    SpectrumKind,
    SpectrumReport,
    ess_radius_polygon,
    np_spectrum,
    symmetrized_spectrum,
)
from .transmission import (
    LinearField,
    NearResonanceError,
    PointSourceField,
    TransmissionSolution,
    evaluate_field,
    flux_residual,
    solve_transmission,
)

__version__ = "0.1.0"

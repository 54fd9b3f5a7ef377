"""Geodesics, the Carnot-Caratheodory distance and the isoperimetric
inequality in the Heisenberg group H^n."""

from ._validation import DimensionMismatchError
from .core import (
    HeisPoint,
    HorizontalTangent,
    conjugate_flip,
    group_mul,
    inverse,
    left_translate,
    vertical_shift,
)
from .curves import (
    CurveNotClosedError,
    HorizontalCurve,
    PlanarCurve,
    ZeroLengthCurveError,
    horizontal_lift,
    length_cc_partition,
    length_E,
    length_H,
    reparametrize_constant_speed,
    signed_areas,
)
from .fourier import (
    EqualityCase,
    FourierSpectrum,
    IsoperimetricReport,
    analyze,
    circle_curve,
    isoperimetric_report,
    termwise_defect,
)
from .geodesic import (
    DegenerateGeodesicError,
    Geodesic,
    GeodesicParams,
    H_derivative,
    H_eval,
    H_inverse,
    align_geodesics,
    apply_unitary,
    distance,
    distance_from_origin,
    geodesic_to_axis,
    geodesic_to_point,
)
from .oracle import OracleResult, VariationalProblem, isoperimetric_search, minimize_length

__version__ = "0.1.0"

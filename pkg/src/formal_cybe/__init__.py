"""Exact, windowed computations with formal r-matrices over simple Lie algebras."""
from .errors import FormalCYBEError, MathematicalObstruction, Obstructed, UnsupportedMultiplicity
from .lie_core import LieAlgebra, casimir, drinfeld_jimbo, load_lie_algebra, sl
from .series import (
    ScalarSeries,
    StandardRMatrix,
    Tensor2Series,
    base_rmatrix,
    residual_report,
    skew_residual,
    standard_rmatrix_from_terms,
)
from .cybe import Cobracket, base_cobracket, cojacobi_residual, cocycle_residual, cyb_residual, twist_residual
from .doubles import DoubleElement, TraceExtension, manin_pair_report, normalize_trace_extension
from .lagrangian import WBasis, build_W, span_equal, standard_W, twist_to_T, T_to_twist
from .normalize import (
    CoordTransform,
    GaugeAuto,
    exp_ad,
    gauge_apply,
    multiplicity,
    residue_obstruction,
    solve_psi,
    substitute_coords,
)

__version__ = "0.1.0"

"""Weighted 1D total-variation denoising via generalized taut strings,
with dual certificates and boundedness diagnostics."""

from .certificates import CertificateReport, ResidualCheck
from .grids import Grid, SampledFunction, integrate, make_grid, weighted_lp_norm
from .weights import TransformMap, TubeProblem, WeightPair, antiderivative, build_transform, build_tube
from .taut_string import KktReport, TautString, derivative_signal, kkt_certificate, solve_tube
from .rof import (
    RofSolution,
    SwitchSegment,
    denoise,
    duality_gap,
    optimality_residuals,
    switching_decomposition,
)
from .radial import (
    BoundednessVerdict,
    ExplicitSolution,
    RadialProblem,
    classify_general,
    classify_power,
    dual_field_z,
    explicit_minimizer,
    solve_cubic_c,
    switching_inequality,
)
from .levelset import (
    IsoperimetricReport,
    RadialLevelSet,
    isoperimetric_report,
    level_set,
    markov_sup_bound,
    perimeter,
    perimeter_identity_residual,
)
from .ictv import (
    BoundednessRecord,
    IctvProblem,
    IctvSolution,
    boundedness_report,
    denoise_ictv,
    ictv_optimality,
)
from .counterexample import (
    DirectionStep,
    OscillatoryProfile,
    build_u,
    direction_step,
    dual_certificate_g,
)

__version__ = "0.1.0"

"""Overlap-based standardized effect sizes (GSSMD), classical assay
quality measures, risk-based thresholds, Monte Carlo studies and plate
hit selection."""

__version__ = "0.1.0"

from .core_stats import (
    Label,
    SampleSet,
    SummaryStats,
    robust_ssmd,
    robust_z_factor,
    ssmd,
    summarize,
    z_factor,
)
from .errors import (
    DegenerateVariance,
    DirectionUndefined,
    DivisionByZero,
    DuplicateWell,
    FitError,
    FormatError,
    InsufficientControls,
    InvalidInput,
    OvlstatError,
    ParseError,
)
from .overlap import (
    EmpiricalCDF,
    Histogram,
    OverlapEstimate,
    OverlapMethod,
    build_common_histograms,
    ecdf,
    gssmd,
    ovl_histogram,
    ovl_kde,
    ovl_parametric_normal,
    sturges_bins,
)
from .report import EffectSizeReport, effect_sizes
from .risk import (
    RiskProfile,
    ThresholdResult,
    gssmd_from_pmax,
    neyman_pearson_threshold,
    optimal_threshold,
    risk_at,
)

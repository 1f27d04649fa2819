"""Numerical thermodynamic formalism for quadratic polynomial skew
products: basic sets over the unit circle, Gibbs measures, pressure,
Lyapunov exponents, Bowen roots, and pointwise dimension of iterated
round balls."""

__version__ = "0.1.0"

from .basicset import BasicSetModel, SolenoidPoint, metric, shift_point
from .dimension import (DimensionReport, IteratedBall, ball_measure,
                        classify_degree2, dimension_formula,
                        empirical_dimension, formula_mc_grid,
                        jacobian_estimate, round_k)
from .errors import (AdmissibilityError, AmbiguousMembership, ConfigError,
                     GibbsDimError, InconsistentCount, NonConvergent,
                     NotOnBasicSet)
from .maps import MapFamily, apply, attracting_fixed_point, differential
from .symbolic import Itinerary, PeriodicEnsemble, periodic_points, \
    sample_prehistory
from .thermo import (AngleHarmonicPotential, BowenRoot, ConstantPotential,
                     GibbsModel, PressureEstimate, StableLogPotential,
                     SumPotential, UnstableLogPotential, ZeroPotential,
                     bowen_root, build_gibbs_model, entropy,
                     gibbs_expectation, lyapunov, normalize,
                     pressure_periodic, pressure_transfer)

__all__ = [
    "__version__",
    "BasicSetModel", "SolenoidPoint", "metric", "shift_point",
    "DimensionReport", "IteratedBall", "ball_measure",
    "classify_degree2", "dimension_formula", "empirical_dimension",
    "formula_mc_grid", "jacobian_estimate", "round_k",
    "AdmissibilityError", "AmbiguousMembership", "ConfigError",
    "GibbsDimError", "InconsistentCount", "NonConvergent",
    "NotOnBasicSet",
    "MapFamily", "apply", "attracting_fixed_point", "differential",
    "Itinerary", "PeriodicEnsemble", "periodic_points",
    "sample_prehistory",
    "AngleHarmonicPotential", "BowenRoot", "ConstantPotential",
    "GibbsModel", "PressureEstimate", "StableLogPotential",
    "SumPotential", "UnstableLogPotential", "ZeroPotential",
    "bowen_root", "build_gibbs_model", "entropy", "gibbs_expectation",
    "lyapunov", "normalize", "pressure_periodic", "pressure_transfer",
]

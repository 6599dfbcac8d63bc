"""Coverage of confidence intervals after a preliminary t test between two
nested linear regression models, split into the deficit from choosing the
wrong model and the deficit from re-using the data."""

from ._backend import NAME as BACKEND
from .coverage import (
    DeficitBreakdown,
    PsiArgs,
    Scenario,
    coverage,
    deficits,
    g1,
    g2,
    prob_accept,
    prob_I_and_accept,
    prob_J,
    prob_J_and_accept,
    psi,
)
from .minimizer import MinResult, MinSearchConfig, min_coverage, min_table, standard_grid
from .montecarlo import (
    MCEstimates,
    MonteCarloConfig,
    RegressionSpec,
    compare,
    regression_fixture,
    simulate_reduced,
    simulate_regression,
)
from .quadrature import QuadratureConfig, QuadratureError

__version__ = "0.1.0"

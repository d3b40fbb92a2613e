"""Self-normalized and bootstrap-assisted inference for cointegrating regressions."""

__version__ = "0.1.0"

from .asymptotics import (
    LocalPowerCurve,
    local_power,
    simulate_critical_values,
    simulate_limit_statistics,
)
from .battery import standard_battery, standard_statistics
from .bootstrap import (
    BootstrapConfig,
    VarSieveModel,
    bootstrap_statistic,
    bootstrap_test,
    generate_bootstrap_sample,
    select_order,
    yule_walker,
)
from .cli import AnalysisReport, ar1_persistence, ingest_csv, run_analysis
from .estimators import (
    DOlsFit,
    FmOlsFit,
    ImOlsFit,
    OlsFit,
    RestrictionSpec,
    d_ols,
    fm_ols,
    im_ols,
    levels_residuals,
    ols,
    restricted_im_ols,
    scaled_variance,
)
from .kernels import (
    BARTLETT,
    QUADRATIC_SPECTRAL,
    KernelSpec,
    LrvEstimate,
    andrews_bandwidth,
    conditional_lrv,
    estimate_lrv,
    kernel_weight,
    lrv_matrix,
    one_sided_lrv,
)
from .montecarlo import (
    DgpConfig,
    ExperimentResult,
    generate_dgp,
    simulate_garch_innovations,
    size_adjusted_power,
    size_experiment,
)
from .selfnorm import (
    TestOutcome,
    diff_residual_lrv,
    self_normalized_test,
    self_normalizer,
    traditional_wald,
    wald_statistic,
)
from .tables import CriticalValueTable, default_table, load_table, save_table
from .timeseries import (
    CointegrationSample,
    Deterministics,
    build_deterministics,
    first_difference,
    partial_sum,
)

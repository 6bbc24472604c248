"""BN-S stochastic volatility simulation and high-frequency jump prediction.

Subpackages and modules:

- subordinators: compound-Poisson Levy subordinators on time grids
- dynamics: generalized BN-S variance/price simulation and correlation
  functionals
- market_data: minute-bar ingestion, preprocessing, realized measures
- labeling: windowed features and threshold jump targets
- classifiers: from-scratch learners plus the precision/recall/F1 harness
- cli: end-to-end `bnsjump` command
"""

from .dynamics import (
    LogPricePath,
    ModelParams,
    NoiseSpec,
    VariancePath,
    apply_noise,
    correlation_classical,
    correlation_generalized,
    euler_variance_path,
    instantaneous_variance_rate,
    price_series,
    simulate_log_price,
    simulate_log_price_classical,
    simulate_variance_path,
    simulate_variance_path_classical,
)
from .labeling import (
    IndexedReturns,
    LabeledDataset,
    LabelingConfig,
    SplitSpec,
    build_dataset,
    index_series,
    mark_big_jumps,
    split,
)
from .market_data import (
    BarSeries,
    ReturnSeries,
    RVSeries,
    SessionCalendar,
    StatsReport,
    descriptive_stats,
    load_bars,
    pct_change,
    preprocess,
    realized_measures,
    resample,
)
from .subordinators import (
    JumpPath,
    SubordinatorSpec,
    TimeGrid,
    combine_paths,
    realized_jump_energy,
    sample_ensemble,
    sample_subordinator_path,
    subordinator_moments,
    terminal_samples,
)

__version__ = "0.1.0"

"""Two-sample testing of stochastic block models in the sparse regime."""
from .blocks import clamp_blocks, community_sizes, default_epsilon, estimate_block_matrix
from .community import (
    DetectConfig,
    Embedding,
    detect_communities,
    kmeans,
    pool_networks,
    slim_embed,
    spectral_embed,
)
from .data_io import MultiplexDataset, load_edge_list, load_multiplex, write_edge_list
from .deviation import (
    TestConfig,
    TestResult,
    entrywise_deviation,
    resample_gamma,
    statistic_T,
    statistic_T_plus,
    two_sample_test,
)
from .graph_core import (
    AssumptionReport,
    InputError,
    Membership,
    PreconditionError,
    check_assumptions,
    membership_equal_probability,
    sample_sbm,
    validate_pair,
)
from .gumbel import gumbel_cdf, gumbel_quantile
from .multiplex import PairwiseTable, pairwise_test_table
from .simulation import (
    ScenarioConfig,
    run_error_experiment,
    run_null_calibration,
    run_replication,
)

__version__ = "0.1.0"

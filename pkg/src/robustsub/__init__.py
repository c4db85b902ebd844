"""Deletion-robust monotone submodular maximization under a cardinality constraint."""

from .baselines import greedy, sg_distributed_baseline, sg_robust_baseline, stochastic_greedy
from .centralized import build_coreset_centralized, coreset_size_bound, extract_solution_centralized
from .core import (
    AlgoParams,
    BuildTrace,
    CoreSet,
    PoolPicker,
    SingletonReserve,
    Solution,
    ThresholdGrid,
    child_seed,
    pool_pick,
    top_singletons,
    window_thresholds,
)
from .deletions import (
    DeletionSpec,
    Predicate,
    delete_by_greedy,
    delete_by_predicate,
    delete_by_sg,
    delete_random_fraction,
)
from .distributed import (
    DistributedCoreSet,
    build_distributed,
    compact_coreset,
    extract_solution_distributed,
    partition_random,
)
from .errors import (
    CapacityError,
    FormatError,
    InputError,
    NumericIntegrityError,
    PreconditionError,
    RobustSubError,
    SchemaError,
)
from .objectives import (
    GroundSet,
    IdenticalItemsOracle,
    KernelMatrix,
    LabeledBinaryDataset,
    LogDetOracle,
    ModularOracle,
    MutualInfoOracle,
    SubmodularOracle,
    brute_force_opt,
    gaussian_kernel,
    linear_similarity_kernel,
    logdet_value,
    naive_bayes_mi,
)
from .streaming import (
    StreamState,
    build_coreset_streaming,
    extract_solution_streaming,
    finalize_stream,
    stream_insert,
)

__version__ = "0.1.0"

"""Binary hyperdimensional computing with random, level and circular basis sets."""

from .basis import (
    BasisKind,
    BasisSet,
    angular_distance,
    check_circular_closure,
    circular_transitions,
    generate_basis,
    generate_circular_set,
    generate_level_set,
    generate_level_set_interpolated,
    generate_random_set,
    similarity_matrix,
)
from .encode import (
    AngleQuantizer,
    LabelCodec,
    ScalarQuantizer,
    SymbolTable,
    encode_record,
    encode_sequence,
    encode_tuple,
)
from .hv import (
    BundleAccumulator,
    DimensionError,
    Hypervector,
    bind,
    bundle,
    hamming_distance,
    permute,
    random_hypervector,
    similarity,
)
from .kernels import BACKEND
from .learn import (
    ClassificationModel,
    RegressionModel,
    classify,
    predict,
    train_classifier,
    train_regressor,
)
from .markov import expected_flip_count, simulate_flip_counts

__version__ = "0.1.0"

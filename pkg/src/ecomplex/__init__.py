"""Economic complexity from country-product export networks."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CollinearityError,
    ComputationError,
    DegenerateDistributionError,
    InputError,
    InsufficientOverlapError,
    NoDataError,
    NothingToIterateError,
)
from .matrix import (  # noqa: E402
    BipartiteMatrix,
    ExportVolumeTable,
    RcaTable,
    build_matrix,
    compute_rca,
    diversification,
    threshold_to_binary,
    ubiquity,
)
from .reflections import (  # noqa: E402
    ReflectionTrajectory,
    correlate_external,
    normalize,
    random_walk_check,
    rank_shift,
    reflect,
)

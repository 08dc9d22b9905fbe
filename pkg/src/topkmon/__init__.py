"""Filter-based top-k position monitoring over distributed streams."""

from .core import (
    NEG_INF,
    POS_INF,
    FilterInterval,
    WindowExtremes,
    compute_top_k,
    extremes_update,
    midpoint,
    rank_compare,
    validate_filter_set,
)
from .harness import protocol_bench, simulate
from .oracle import competitive_envelope, compute_delta, opt_lower_bound
from .protocols import Mode, RandomSource, run_extremum, send_probability_bound
from .streams import Family, GeneratorSpec, Trace, generate, load_csv, save_csv
from .transport import Fabric, MessageKind, MessageTally

__version__ = "0.1.0"

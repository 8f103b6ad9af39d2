"""bfclab: construct and exactly verify Boolean-function-computation codes
over discrete memoryless channels, at sizes where every probability can be
enumerated."""

from ._kernels import active_backend, set_backend
from .bfc import (
    BfcCode,
    ErrorReport,
    IdCode,
    IdErrorReport,
    assemble_bfc,
    complement_code,
    eval_errors,
    eval_id_errors,
    proved_error_bounds,
    to_id_code,
)
from .boolfn import (
    BooleanFunction,
    FunctionClass,
    flip,
    in_class,
    make_and,
    make_bit,
    make_id,
    make_rank,
    make_threshold_atmost,
    make_threshold_exact,
)
from .channel import (
    CapacityConvergenceError,
    Channel,
    bec,
    bsc,
    capacity,
    identity_channel,
    load_channel,
    product_channel,
    sample_output,
    word_prob,
)
from .inner import (
    TransmissionCode,
    build_identity_code,
    build_random_code,
    eval_inner_error,
    ml_code_from_codewords,
)
from .logic import (
    compile_formula,
    dnf_weight_bound,
    evaluate,
    parse,
    tautologically_equivalent,
    unparse,
)
from .pipeline import run_pipeline
from .setfamily import (
    ConstantWeightFamily,
    SetFamily,
    build_family_greedy,
    gilbert_build,
    gilbert_lower_bound,
    family_size_guarantee,
    family_size_guarantee_log2,
    verify_family,
)

__version__ = "0.1.0"

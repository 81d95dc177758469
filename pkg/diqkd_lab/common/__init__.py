from .config import Config
from .errors import (
    DomainError,
    PreconditionError,
    EstimationError,
    InconsistentParametersError,
    NumericFailure,
)
from .formatting import (
    format_section_header,
    format_timestamp,
    now_local,
    format_bits,
    format_sig,
    format_key_value,
    write_csv,
)
from .rng import block_generator, block_sizes

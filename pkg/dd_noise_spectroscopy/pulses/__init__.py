from .filter_function import (
    FilterSample,
    filter_function,
    filter_samples,
    filter_transform,
    fourier_coefficients,
    jump_weights,
    switching_function,
)
from .sequences import (
    InvalidSequenceError,
    PulseSequence,
    SequenceFamily,
    SequenceKind,
    make_sequence,
    sequence_from_dict,
)

__all__ = [
    "FilterSample",
    "InvalidSequenceError",
    "PulseSequence",
    "SequenceFamily",
    "SequenceKind",
    "filter_function",
    "filter_samples",
    "filter_transform",
    "fourier_coefficients",
    "jump_weights",
    "make_sequence",
    "sequence_from_dict",
    "switching_function",
]

from ._core import (
    InputError,
    Relation,
    ResourceError,
    VerificationError,
    catalog,
    classify,
    close,
    count,
    evaluate,
    in2_witness,
    trichotomy,
)

__all__ = [
    "InputError",
    "Relation",
    "ResourceError",
    "VerificationError",
    "catalog",
    "classify",
    "close",
    "count",
    "evaluate",
    "in2_witness",
    "trichotomy",
]

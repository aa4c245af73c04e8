"""Three-stage gear reducer benchmark."""

from .config import R40_MODULES, ReducerConfig, load_config, preset, save_config
from .problem import (
    CONSTRAINT_INDEX,
    CONSTRAINT_NAMES,
    ReducerVariables,
    assemble,
    constraint_index_map,
    decode,
    domain_size,
    encode,
    evaluate,
    ratio_objective,
    volume_objective,
)

__all__ = [
    "CONSTRAINT_INDEX", "CONSTRAINT_NAMES", "R40_MODULES", "ReducerConfig", "ReducerVariables",
    "assemble", "constraint_index_map", "decode", "domain_size", "encode", "evaluate",
    "load_config", "preset", "ratio_objective", "save_config", "volume_objective",
]

"""Stacking-ensemble engine: L1PF prediction blocks, meta-learners and the voting harness."""

from ._core import (
    AssemblyError,
    ConfigError,
    Error,
    FactorizationError,
    FitError,
    FormatError,
    IoError,
    LabelRangeError,
    ProbabilityRowError,
    SelectionError,
    ShapeError,
    VoteError,
    closest_power_of_two,
    head_plan,
    majority_vote,
    read_block,
    read_labels,
    run_experiment,
    stack,
    synth,
    write_block,
    write_labels,
)

__all__ = [
    "AssemblyError",
    "ConfigError",
    "Error",
    "FactorizationError",
    "FitError",
    "FormatError",
    "IoError",
    "LabelRangeError",
    "ProbabilityRowError",
    "SelectionError",
    "ShapeError",
    "VoteError",
    "closest_power_of_two",
    "head_plan",
    "majority_vote",
    "read_block",
    "read_labels",
    "run_experiment",
    "stack",
    "synth",
    "write_block",
    "write_labels",
]

"""Topology-tracking training laboratory for permutation-equivariant particle systems."""

from ._core import (
    NeurotopoError,
    adaptive_scale,
    betti,
    check_run,
    embed,
    run_experiment,
    sample,
    sharpness,
    teacher_dataset,
    two_layer_gradient,
    __version__,
)

__all__ = [
    "NeurotopoError",
    "adaptive_scale",
    "betti",
    "check_run",
    "embed",
    "run_experiment",
    "sample",
    "sharpness",
    "teacher_dataset",
    "two_layer_gradient",
    "__version__",
]

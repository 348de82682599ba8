"""Normal forms and holomorphic motions for holomorphic map germs."""

from ._core import (
    MapSpec,
    __version__,
    beltrami,
    boettcher,
    classify,
    compose_dilatation,
    control_condition,
    derivative,
    dilatation_K,
    evaluate,
    holder_fit,
    iterate,
    koenigs,
    local_inverse,
    motion,
    omega,
    run,
    set_thread_count,
    thread_count,
    tilde_omega,
    verify_bundle,
)

__all__ = [
    "MapSpec",
    "__version__",
    "beltrami",
    "boettcher",
    "classify",
    "compose_dilatation",
    "control_condition",
    "derivative",
    "dilatation_K",
    "evaluate",
    "holder_fit",
    "iterate",
    "koenigs",
    "local_inverse",
    "motion",
    "omega",
    "run",
    "set_thread_count",
    "thread_count",
    "tilde_omega",
    "verify_bundle",
]

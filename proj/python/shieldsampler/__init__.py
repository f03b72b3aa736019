from ._core import (
    Schedule,
    canonicalize_config,
    default_config,
    epsilon_init,
    final_samples,
    grad_check,
    kl_check,
    qp_check,
    run,
    solve_min_norm,
)

__all__ = [
    "Schedule",
    "canonicalize_config",
    "default_config",
    "epsilon_init",
    "final_samples",
    "grad_check",
    "kl_check",
    "qp_check",
    "run",
    "solve_min_norm",
]

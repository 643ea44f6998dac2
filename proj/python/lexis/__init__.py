"""Age-structured birth-death simulation and nonparametric rate estimation.

The heavy lifting lives in the compiled extension ``lexis._core``; this
package re-exports its public names.
"""

from ._core import (
    Config,
    LimitSolution,
    ModelParams,
    Selection,
    Snapshot,
    Trajectory,
    __version__,
    config_hash,
    config_to_json,
    estimate_density,
    estimate_mu,
    gl_density,
    gl_pi,
    load_config,
    read_trajectory,
    run_diagnostics,
    run_experiment,
    section5_preset,
    simulate,
    solve_limit,
    theoretical_exponent,
    validate_config,
    write_trajectory,
)

__all__ = [
    "Config",
    "LimitSolution",
    "ModelParams",
    "Selection",
    "Snapshot",
    "Trajectory",
    "__version__",
    "config_hash",
    "config_to_json",
    "estimate_density",
    "estimate_mu",
    "gl_density",
    "gl_pi",
    "load_config",
    "read_trajectory",
    "run_diagnostics",
    "run_experiment",
    "section5_preset",
    "simulate",
    "solve_limit",
    "theoretical_exponent",
    "validate_config",
    "write_trajectory",
]

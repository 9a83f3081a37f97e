from ._ehtk import (
    NumericalError,
    SpinModel,
    ValidationError,
    fit,
    fitted_rho,
    ground_state,
    normalize_config,
    preset,
    preset_names,
    read_state,
    reduced_density_matrix,
    run_pipeline,
    run_stage,
    sample,
    uhlmann_fidelity,
    vn_entropy,
    write_state,
)

__all__ = [
    "NumericalError",
    "SpinModel",
    "ValidationError",
    "fit",
    "fitted_rho",
    "ground_state",
    "normalize_config",
    "preset",
    "preset_names",
    "read_state",
    "reduced_density_matrix",
    "run_pipeline",
    "run_stage",
    "sample",
    "uhlmann_fidelity",
    "vn_entropy",
    "write_state",
]

"""Kinetic Fokker-Planck solver and regularity-estimate verification.

Fields are NumPy arrays of shape (nt, nx, nv); initial data are (nx, nv) slices.
"""

from ._kinreg import (
    CoefficientField,
    CoefficientKind,
    ConfigError,
    Cylinder,
    CylinderKind,
    EstimateReport,
    GridSpec,
    HolderEstimate,
    MoserLevel,
    MoserTrace,
    Point,
    Transport,
    config_hash,
    estimate_holder,
    gaussian_density,
    kolmogorov_kernel,
    lp_norm,
    max_over,
    moser_a,
    moser_iterate,
    moser_radius,
    run_verify,
    solve,
    verify_energy,
    verify_sup_bound,
)

__all__ = [
    "CoefficientField",
    "CoefficientKind",
    "ConfigError",
    "Cylinder",
    "CylinderKind",
    "EstimateReport",
    "GridSpec",
    "HolderEstimate",
    "MoserLevel",
    "MoserTrace",
    "Point",
    "Transport",
    "config_hash",
    "estimate_holder",
    "gaussian_density",
    "kolmogorov_kernel",
    "lp_norm",
    "max_over",
    "moser_a",
    "moser_iterate",
    "moser_radius",
    "run_verify",
    "solve",
    "verify_energy",
    "verify_sup_bound",
]

"""Rotating Oseen kernel toolkit."""

from ._core import (
    AccuracyError,
    DataError,
    DivergentIntegralError,
    DomainError,
    Error,
    FlowParams,
    PreconditionError,
    SingularPointError,
    UnsupportedOrderError,
    __version__,
    convolve_numeric,
    damped_kummer,
    gamma_case,
    gamma_kernel,
    kummer_1,
    lambda_tensor,
    leading_term,
    majorant_time_integral,
    predict_exponents,
    run_cli,
    s_tau,
    synthetic_coefficients,
    z_derivative,
    z_difference,
    z_tensor,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

"""Error and fidelity metrics for process estimates.

The fidelity between two PSD matrices is normalized by both traces, so it is
scale invariant, symmetric, and equals one exactly for proportional
arguments.  ``error_scaling_functional`` evaluates the bracketed part of the
analytic error bound sqrt(d) Tr(F) sqrt(J tr_C) sqrt(M tr_V) / sqrt(N); it is
a relative scaling functional, with no attempt to estimate the hidden
constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import frob, psd_sqrt


@dataclass(frozen=True)
class ErrorReport:
    frob_error: float
    mse: float
    fidelity: float
    infidelity: float
    bound_functional: float | None = None


def frobenius_error(x_hat: np.ndarray, x_true: np.ndarray) -> float:
    return frob(np.asarray(x_hat) - np.asarray(x_true))


def squared_error(x_hat: np.ndarray, x_true: np.ndarray) -> float:
    return frobenius_error(x_hat, x_true) ** 2


def fidelity(x_hat: np.ndarray, x_true: np.ndarray) -> float:
    """[Tr sqrt(sqrt(A) B sqrt(A))]^2 / (Tr A Tr B) for PSD A, B.

    Evaluated as the squared nuclear norm of sqrt(A) sqrt(B), which is
    algebraically identical but avoids square roots of noise-level
    eigenvalues when an argument is rank deficient.
    """
    a = np.asarray(x_hat, dtype=complex)
    b = np.asarray(x_true, dtype=complex)
    ta, tb = np.trace(a).real, np.trace(b).real
    if ta <= 0 or tb <= 0:
        raise ValueError("fidelity requires positive-trace arguments")
    sv = np.linalg.svd(psd_sqrt(a) @ psd_sqrt(b), compute_uv=False)
    return float(np.sum(sv) ** 2 / (ta * tb))


def infidelity(x_hat: np.ndarray, x_true: np.ndarray) -> float:
    return 1.0 - fidelity(x_hat, x_true)


def error_scaling_functional(
    d: int,
    trace_f: float,
    num_sets: int,
    povm_cost: float,
    num_states: int,
    ensemble_cost: float,
    copies: float,
) -> float:
    """sqrt(d) * Tr(F) * sqrt(J * tr((C^dag C)^-1)) * sqrt(M * tr((V* V^T)^-1)) / sqrt(N).

    ``povm_cost`` and ``ensemble_cost`` are the bare inverse-Gram traces; the
    J and M factors are applied here.
    """
    if min(d, trace_f, num_sets, povm_cost, num_states, ensemble_cost, copies) <= 0:
        raise ValueError("all scaling-functional arguments must be positive")
    return float(
        np.sqrt(d)
        * trace_f
        * np.sqrt(num_sets * povm_cost)
        * np.sqrt(num_states * ensemble_cost)
        / np.sqrt(copies)
    )


def error_report(x_hat, x_true, bound_functional: float | None = None) -> ErrorReport:
    err = frobenius_error(x_hat, x_true)
    fid = fidelity(x_hat, x_true)
    return ErrorReport(
        frob_error=err,
        mse=err * err,
        fidelity=fid,
        infidelity=1.0 - fid,
        bound_functional=bound_functional,
    )


def loglog_slope(x, y) -> float:
    """Least-squares slope of log10(y) against log10(x)."""
    lx, ly = np.log10(np.asarray(x, dtype=float)), np.log10(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])

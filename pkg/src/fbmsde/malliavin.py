"""Computable derivative-of-the-solution objects and their finite-difference check.

For an additively-forced equation with nonincreasing-in-x drift, the
derivative of X_t with respect to a noise perturbation has the explicit
kernel exp(integral_s^t df/dx(r, X_r) dr) on [0, t], a number in (0, 1].
This module evaluates that kernel along a computed path, its squared norm
under the singular-kernel inner product (strictly positive: the computable
content of the absolute-continuity criterion), the analytic directional
derivative against step-function directions, and the finite-difference
counterpart obtained by re-solving perturbed equations and extrapolating the
difference quotients to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fbm import embed_direction, grid_inner_product, inner_product
from .paths import SamplePath, StepFunction
from .solver import DriftSpec, SolveConfig, solve_batch

__all__ = [
    "DerivativeReport",
    "ExtrapolationWarning",
    "malliavin_kernel",
    "kernel_profile",
    "derivative_norm_sq",
    "directional_derivative_analytic",
    "directional_derivative_fd",
    "derivative_report",
]


class ExtrapolationWarning(UserWarning):
    """Difference quotients did not look first-order; smallest step reported."""


@dataclass(frozen=True)
class DerivativeReport:
    """Analytic vs finite-difference directional derivative at one time."""

    t: float
    analytic_value: float
    fd_values: tuple[tuple[float, float], ...]
    extrapolated_fd: float
    norm_sq: float
    passed: bool


def _dfdx_cumulative(solution: SamplePath, drift: DriftSpec) -> np.ndarray:
    """Trapezoidal cumulative of df/dx(r, X_r) from 0, along the computed path."""
    times, vals = solution.times, solution.values
    try:
        dv = np.asarray(drift.dfdx(times, vals), dtype=np.float64)
        assert dv.shape == vals.shape
    except Exception:
        dv = np.array(
            [float(np.asarray(drift.dfdx(float(t), np.asarray(v)))) for t, v in zip(times, vals)]
        )
    if not np.isfinite(dv[0]):
        dv = dv.copy()
        dv[0] = dv[1]
    dt = solution.dt
    return np.concatenate([[0.0], np.cumsum(0.5 * (dv[1:] + dv[:-1]) * dt)])


def malliavin_kernel(solution: SamplePath, drift: DriftSpec, s: float, t: float) -> float:
    """exp(integral_s^t df/dx(r, X_r) dr); lies in (0, 1] since df/dx <= 0."""
    i, j = solution.index_of(s), solution.index_of(t)
    if i > j:
        raise ValueError("need s <= t")
    cum = _dfdx_cumulative(solution, drift)
    return float(np.exp(cum[j] - cum[i]))


def kernel_profile(solution: SamplePath, drift: DriftSpec, t: float) -> np.ndarray:
    """malliavin_kernel(solution, drift, s_i, t) for every grid point s_i <= t."""
    j = solution.index_of(t)
    cum = _dfdx_cumulative(solution, drift)
    return np.exp(cum[j] - cum[: j + 1])


def _kernel_levels(solution: SamplePath, drift: DriftSpec, t: float) -> np.ndarray:
    # cell averages of the kernel profile: a step function the rectangle
    # weights integrate exactly
    prof = kernel_profile(solution, drift, t)
    return 0.5 * (prof[1:] + prof[:-1])


def derivative_norm_sq(solution: SamplePath, drift: DriftSpec, t: float, hurst: float) -> float:
    """Squared norm of the derivative kernel on [0, t] under the singular inner product.

    Bounded above by t^{2H} (the kernel never exceeds 1) and strictly positive
    on every path.
    """
    levels = _kernel_levels(solution, drift, t)
    return grid_inner_product(levels, levels, solution.dt, hurst)


def directional_derivative_analytic(
    solution: SamplePath, drift: DriftSpec, t: float, phi: StepFunction, hurst: float
) -> float:
    """<phi, kernel(., t) restricted to [0, t]> under the singular inner product."""
    j = solution.index_of(t)
    levels = _kernel_levels(solution, drift, t)
    kernel_step = StepFunction(solution.times[: j + 1], levels)
    return inner_product(phi, kernel_step, hurst)


def directional_derivative_fd(
    x0: float,
    drift: DriftSpec,
    driver: SamplePath,
    t: float,
    phi: StepFunction,
    hurst: float,
    eps_list=(0.1, 0.05, 0.025),
    config: SolveConfig | None = None,
) -> tuple[tuple[tuple[float, float], ...], float]:
    """Difference quotients (X^eps_t - X_t)/eps and their limit at eps -> 0.

    Each perturbed equation adds eps times the embedded direction to the
    driver and is re-solved on the same grid.  Richardson extrapolation
    assumes a first-order expansion in eps; when the quotients do not shrink
    consistently with that, the smallest-eps quotient is returned with an
    ``ExtrapolationWarning``.
    """
    eps_arr = np.asarray(sorted(eps_list, reverse=True), dtype=np.float64)
    if eps_arr.size < 1 or np.any(eps_arr <= 0):
        raise ValueError("eps_list must contain positive values")
    h = embed_direction(phi, hurst, driver.times)
    j = driver.index_of(t)
    rows = np.vstack([driver.values] + [driver.values + e * h.values for e in eps_arr])
    sols = solve_batch(x0, drift, rows, driver.times, config)
    base = sols[0, j]
    quotients = (sols[1:, j] - base) / eps_arr
    fd_values = tuple((float(e), float(q)) for e, q in zip(eps_arr, quotients))
    if eps_arr.size == 1:
        return fd_values, float(quotients[0])
    diffs = np.diff(quotients)
    scale = max(1.0, float(np.max(np.abs(quotients))))
    if np.all(np.abs(diffs) <= 1e-12 * scale):
        # exactly linear response (zero-drift case): any quotient is the limit
        return fd_values, float(quotients[-1])
    if eps_arr.size >= 3:
        expected = (eps_arr[0] - eps_arr[1]) / (eps_arr[1] - eps_arr[2])
        observed = diffs[0] / diffs[1] if diffs[1] != 0 else np.inf
        if not 0.4 * expected <= observed <= 2.5 * expected:
            warnings.warn(
                f"difference quotients not first-order (ratio {observed:.3g}, "
                f"expected {expected:.3g}); reporting the smallest-step value",
                ExtrapolationWarning,
                stacklevel=2,
            )
            return fd_values, float(quotients[-1])
    e1, e2 = eps_arr[-2], eps_arr[-1]
    q1, q2 = quotients[-2], quotients[-1]
    extrapolated = q2 + e2 * (q2 - q1) / (e1 - e2)
    return fd_values, float(extrapolated)


def derivative_report(
    x0: float,
    drift: DriftSpec,
    driver: SamplePath,
    t: float,
    phi: StepFunction,
    hurst: float,
    eps_list=(0.1, 0.05, 0.025),
    tolerance: tuple[float, float] = (1e-3, 1e-2),
    config: SolveConfig | None = None,
) -> DerivativeReport:
    """Full check: analytic vs extrapolated finite difference, plus the norm.

    Passes when |analytic - extrapolated| <= max(abs_tol, rel_tol * |analytic|).
    """
    solution = SamplePath(
        driver.times,
        solve_batch(x0, drift, driver.values[None, :], driver.times, config)[0],
        holder_hint=driver.holder_hint,
    )
    analytic = directional_derivative_analytic(solution, drift, t, phi, hurst)
    fd_values, extrapolated = directional_derivative_fd(
        x0, drift, driver, t, phi, hurst, eps_list, config
    )
    norm_sq = derivative_norm_sq(solution, drift, t, hurst)
    abs_tol, rel_tol = tolerance
    passed = abs(analytic - extrapolated) <= max(abs_tol, rel_tol * abs(analytic))
    return DerivativeReport(t, analytic, fd_values, extrapolated, norm_sq, passed)

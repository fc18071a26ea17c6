"""Positivity-preserving pathwise integration of singularly-drifted equations.

Solves x_{n+1} = x_n + f(t_{n+1}, x_{n+1}) dt + (phi(t_{n+1}) - phi(t_n)) by
making the drift implicit: combined with a nonincreasing-in-x drift the step
equation is strictly monotone, has a unique positive root whenever the drift
blows up at 0, and the scheme inherits the repulsion that keeps the continuum
solution positive.  Drifts of the form c(t)/x get a closed-form quadratic
step; everything else goes through safeguarded Newton with bisection.

Also houses the drift assumption checker, the square-root-diffusion change of
variables, and an a-posteriori residual for the integral equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .paths import SamplePath

__all__ = [
    "DriftSpec",
    "SolveConfig",
    "CirDriftSpec",
    "AssumptionReport",
    "CirConditionReport",
    "SolverError",
    "PositivityError",
    "reciprocal_drift",
    "power_drift",
    "bessel_drift",
    "custom_drift",
    "zero_drift",
    "scaled_drift",
    "check_drift_assumptions",
    "check_cir_conditions",
    "solve_pathwise",
    "solve_batch",
    "drift_along_path",
    "residual_defect",
    "cir_transform",
    "cir_drift_transform",
    "solve_cir",
]


class SolverError(RuntimeError):
    pass


class PositivityError(SolverError):
    """A step left the positive half-line; only possible for non-repulsive drifts."""


@dataclass(frozen=True)
class DriftSpec:
    """A drift f(t, x) with its x-derivative and assumption envelopes.

    ``f`` and ``dfdx`` must accept a scalar time and a value array.  The
    envelopes witness the structural assumptions: ``lower_envelope`` g with
    f(t, x) >= g(t) x^{-singularity_exponent} near 0, ``upper_envelope`` h
    with f(t, x) <= h(t)(1 + 1/x).  ``inverse_coeff`` is set when
    f(t, x) = c(t)/x exactly, unlocking the closed-form implicit step.
    ``homogeneity`` = (p, q, n) encodes f(st, yx) = s^(p + q*H) y^n f(t, x).
    """

    family: str
    f: Callable
    dfdx: Callable
    singularity_exponent: float
    lower_envelope: Callable
    upper_envelope: Callable
    x1: float = 1.0
    params: dict = field(default_factory=dict)
    inverse_coeff: Callable | None = None
    homogeneity: tuple[float, float, float] | None = None
    positive_domain: bool = True


@dataclass(frozen=True)
class SolveConfig:
    scheme: str = "drift_implicit_euler"
    newton_tol: float = 1e-10
    max_newton_iters: int = 200

    def __post_init__(self) -> None:
        if self.scheme != "drift_implicit_euler":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")


_DEFAULT_CONFIG = SolveConfig()


def reciprocal_drift(k: float) -> DriftSpec:
    """f(t, x) = k / x with k > 0."""
    if k <= 0:
        raise ValueError("k must be positive")
    return DriftSpec(
        family="reciprocal",
        f=lambda t, x: k / x,
        dfdx=lambda t, x: -k / x**2,
        singularity_exponent=1.0,
        lower_envelope=lambda t: k,
        upper_envelope=lambda t: k,
        x1=np.inf,
        params={"k": k},
        inverse_coeff=lambda t: k,
        homogeneity=(0.0, 0.0, -1.0),
    )


def power_drift(k: float, time_exponent: float, singularity_exponent: float) -> DriftSpec:
    """f(t, x) = k t^p x^{-q}; satisfies the growth envelope only for q <= 1."""
    if k <= 0 or time_exponent < 0 or singularity_exponent <= 0:
        raise ValueError("need k > 0, time_exponent >= 0, singularity_exponent > 0")
    p, q = time_exponent, singularity_exponent
    return DriftSpec(
        family="power",
        f=lambda t, x: k * t**p * x**-q,
        dfdx=lambda t, x: -q * k * t**p * x ** (-q - 1.0),
        singularity_exponent=q,
        lower_envelope=lambda t: k * t**p,
        upper_envelope=lambda t: k * t**p,
        x1=1.0,
        params={"k": k, "time_exponent": p, "singularity_exponent": q},
        inverse_coeff=(lambda t: k * t**p) if q == 1.0 else None,
        homogeneity=(p, 0.0, -q),
    )


def bessel_drift(dimension: int, hurst: float) -> DriftSpec:
    """Radial repulsion H(d-1) t^{2H-1} / x of the d-dimensional fractional radius."""
    if dimension < 2:
        raise ValueError("dimension must be at least 2")
    if not 0.5 < hurst < 1.0:
        raise ValueError("hurst must lie in (1/2, 1)")
    c = hurst * (dimension - 1)
    e = 2.0 * hurst - 1.0
    return DriftSpec(
        family="bessel",
        f=lambda t, x: c * t**e / x,
        dfdx=lambda t, x: -c * t**e / x**2,
        singularity_exponent=1.0,
        lower_envelope=lambda t: c * t**e,
        upper_envelope=lambda t: c * t**e,
        x1=np.inf,
        params={"dimension": dimension, "hurst": hurst},
        inverse_coeff=lambda t: c * t**e,
        # time degree 2H-1 recorded as (p, q) = (-1, 2) so p + q H is exact
        homogeneity=(-1.0, 2.0, -1.0),
    )


def custom_drift(
    f: Callable,
    dfdx: Callable,
    *,
    singularity_exponent: float,
    lower_envelope: Callable,
    upper_envelope: Callable,
    x1: float = 1.0,
    family: str = "custom",
    inverse_coeff: Callable | None = None,
    homogeneity: tuple[float, float, float] | None = None,
    positive_domain: bool = True,
) -> DriftSpec:
    """Wrap user callables; ``dfdx`` must be the analytic derivative."""
    return DriftSpec(
        family=family,
        f=f,
        dfdx=dfdx,
        singularity_exponent=singularity_exponent,
        lower_envelope=lower_envelope,
        upper_envelope=upper_envelope,
        x1=x1,
        inverse_coeff=inverse_coeff,
        homogeneity=homogeneity,
        positive_domain=positive_domain,
    )


def zero_drift() -> DriftSpec:
    """f = 0: the pure-translation reference case (not repulsive, whole-line domain)."""
    zero = lambda t, x: np.zeros_like(np.asarray(x, dtype=np.float64))
    return DriftSpec(
        family="zero",
        f=zero,
        dfdx=zero,
        singularity_exponent=0.0,
        lower_envelope=lambda t: 0.0,
        upper_envelope=lambda t: 0.0,
        positive_domain=False,
    )


def scaled_drift(drift: DriftSpec, factor: float) -> DriftSpec:
    """The drift multiplied by a positive constant, envelopes included."""
    if factor <= 0:
        raise ValueError("factor must be positive")
    base_f, base_d = drift.f, drift.dfdx
    base_g, base_h = drift.lower_envelope, drift.upper_envelope
    base_c = drift.inverse_coeff
    return replace(
        drift,
        family=f"scaled({drift.family})",
        f=lambda t, x: factor * base_f(t, x),
        dfdx=lambda t, x: factor * base_d(t, x),
        lower_envelope=lambda t: factor * base_g(t),
        upper_envelope=lambda t: factor * base_h(t),
        params={**drift.params, "scale": factor},
        inverse_coeff=(lambda t: factor * base_c(t)) if base_c is not None else None,
    )


@dataclass(frozen=True)
class AssumptionReport:
    """Lattice audit of the three structural drift assumptions."""

    nonnegative_decreasing: bool  # f >= 0 and df/dx <= 0
    singular_repulsion: bool  # f >= g(t) x^{-alpha} near 0 and alpha large enough
    reciprocal_growth: bool  # f <= h(t)(1 + 1/x)
    details: tuple[str, ...] = ()

    @property
    def all_pass(self) -> bool:
        return self.nonnegative_decreasing and self.singular_repulsion and self.reciprocal_growth


def _default_lattice(horizon: float, x_max: float) -> tuple[np.ndarray, np.ndarray]:
    ts = np.linspace(horizon / 24, horizon, 24)
    xs = np.geomspace(1e-4, x_max, 48)
    return ts, xs


def check_drift_assumptions(
    drift: DriftSpec,
    hurst: float,
    *,
    beta: float | None = None,
    horizon: float = 1.0,
    x_max: float = 10.0,
    lattice: tuple[np.ndarray, np.ndarray] | None = None,
) -> AssumptionReport:
    """Evaluate the structural assumptions on a (t, x) lattice; reports, never raises.

    The repulsion check also requires singularity_exponent > 1/beta - 1 for the
    configured Hölder exponent beta < hurst (midpoint of (1/2, hurst) when
    omitted).
    """
    if beta is None:
        beta = 0.5 * (0.5 + hurst)
    ts, xs = lattice if lattice is not None else _default_lattice(horizon, x_max)
    details: list[str] = []
    tol = 1e-12

    ok_sign = True
    for t in ts:
        fv = np.asarray(drift.f(t, xs), dtype=np.float64)
        dv = np.asarray(drift.dfdx(t, xs), dtype=np.float64)
        if np.any(fv < -tol):
            ok_sign = False
            details.append(f"f(t, x) < 0 at t={t:.4g}")
            break
        if np.any(dv > tol):
            ok_sign = False
            details.append(f"df/dx > 0 at t={t:.4g}")
            break

    alpha = drift.singularity_exponent
    ok_rep = alpha > 1.0 / beta - 1.0
    if not ok_rep:
        details.append(
            f"singularity exponent {alpha} <= 1/beta - 1 = {1.0 / beta - 1.0:.4g} (beta={beta})"
        )
    else:
        xs_small = xs[xs < drift.x1]
        for t in ts:
            if drift.lower_envelope(t) <= 0:
                ok_rep = False
                details.append(f"lower envelope not positive at t={t:.4g}")
                break
            if xs_small.size:
                fv = np.asarray(drift.f(t, xs_small), dtype=np.float64)
                floor = drift.lower_envelope(t) * xs_small**-alpha
                if np.any(fv < floor * (1.0 - 1e-9) - tol):
                    ok_rep = False
                    details.append(f"f below g(t) x^-alpha at t={t:.4g}")
                    break

    ok_growth = True
    for t in ts:
        fv = np.asarray(drift.f(t, xs), dtype=np.float64)
        cap = drift.upper_envelope(t) * (1.0 + 1.0 / xs)
        if np.any(fv > cap * (1.0 + 1e-9) + tol):
            ok_growth = False
            details.append(f"f above h(t)(1 + 1/x) at t={t:.4g}")
            break

    return AssumptionReport(ok_sign, ok_rep, ok_growth, tuple(details))


def _implicit_step(
    drift: DriftSpec,
    t: float,
    b: np.ndarray,
    x_prev: np.ndarray,
    dt: float,
    config: SolveConfig,
) -> np.ndarray:
    """Solve x - dt f(t, x) = b elementwise; unique root by monotonicity."""
    if drift.inverse_coeff is not None:
        c = drift.inverse_coeff(t)
        if c < 0:
            raise SolverError(f"inverse coefficient negative at t={t}")
        return 0.5 * (b + np.sqrt(b * b + 4.0 * dt * c))

    tol, max_iter = config.newton_tol, config.max_newton_iters

    def residual(x):
        return x - dt * np.asarray(drift.f(t, x), dtype=np.float64) - b

    # bracket: F is increasing, F(+inf) > 0; for repulsive drifts F(0+) = -inf
    if drift.positive_domain:
        lo = np.minimum(np.where(b > 0, b, x_prev), x_prev) * 0.5
        lo = np.maximum(lo, 1e-300)
        for _ in range(2000):
            bad = residual(lo) >= 0
            if not np.any(bad):
                break
            lo = np.where(bad, lo * 0.5, lo)
        else:
            raise SolverError("could not bracket the implicit step from below")
        hi = np.maximum(b, x_prev)
        x0 = np.maximum(b, 0.5 * x_prev)
    else:
        lo = np.minimum(b, x_prev) - 1.0
        for _ in range(200):
            bad = residual(lo) >= 0
            if not np.any(bad):
                break
            lo = np.where(bad, lo - 2.0 * np.abs(lo) - 1.0, lo)
        else:
            raise SolverError("could not bracket the implicit step from below")
        hi = np.maximum(b, x_prev)
        x0 = b.copy()
    for _ in range(200):
        bad = residual(hi) <= 0
        if not np.any(bad):
            break
        hi = np.where(bad, 2.0 * hi + 1.0, hi)
    else:
        raise SolverError("could not bracket the implicit step from above")

    x = np.clip(x0, lo, hi)
    res = residual(x)
    done = np.abs(res) <= tol
    for _ in range(max_iter):
        if np.all(done):
            break
        lo = np.where(~done & (res < 0), x, lo)
        hi = np.where(~done & (res > 0), x, hi)
        deriv = 1.0 - dt * np.asarray(drift.dfdx(t, x), dtype=np.float64)
        step = np.where(done, 0.0, res / deriv)
        cand = x - step
        outside = (cand <= lo) | (cand >= hi)
        cand = np.where(outside & ~done, 0.5 * (lo + hi), cand)
        x = np.where(done, x, cand)
        res = np.where(done, res, residual(x))
        done = done | (np.abs(res) <= tol)
    if not np.all(done):
        raise SolverError(
            f"implicit step did not converge at t={t}; max residual {np.max(np.abs(res)):.3e}"
        )
    return x


def solve_batch(
    x0,
    drift: DriftSpec,
    driver_values: np.ndarray,
    times: np.ndarray,
    config: SolveConfig | None = None,
) -> np.ndarray:
    """Drift-implicit Euler for a batch of paths sharing one grid.

    ``driver_values`` is (n_paths, n_steps + 1); ``x0`` is a scalar or a
    per-path vector.  Per-path results are independent of the batch
    composition: each path's Newton iteration freezes at its own convergence.
    """
    config = config or _DEFAULT_CONFIG
    drivers = np.atleast_2d(np.asarray(driver_values, dtype=np.float64))
    times = np.asarray(times, dtype=np.float64)
    n_paths, n_pts = drivers.shape
    if n_pts != times.size:
        raise ValueError("driver and grid sizes differ")
    dt = float(times[1] - times[0])
    x0_vec = np.broadcast_to(np.asarray(x0, dtype=np.float64), (n_paths,)).copy()
    if drift.positive_domain and np.any(x0_vec <= 0):
        raise ValueError("initial values must be strictly positive")

    out = np.empty((n_paths, n_pts))
    out[:, 0] = x0_vec
    x = x0_vec
    for k in range(n_pts - 1):
        b = x + (drivers[:, k + 1] - drivers[:, k])
        x = _implicit_step(drift, float(times[k + 1]), b, x, dt, config)
        if drift.positive_domain and np.any(x <= 0):
            raise PositivityError(f"nonpositive value after step {k + 1}")
        out[:, k + 1] = x
    return out


def solve_pathwise(
    x0: float,
    drift: DriftSpec,
    driver: SamplePath,
    config: SolveConfig | None = None,
) -> SamplePath:
    """Solve one path of x' = f(t, x) + phi'; strictly positive for repulsive drifts."""
    values = solve_batch(x0, drift, driver.values[None, :], driver.times, config)[0]
    return SamplePath(driver.times, values, holder_hint=driver.holder_hint)


def drift_along_path(drift: DriftSpec, times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """f(t_i, x_i) along a path; a nonfinite value at t=0 is replaced by its neighbor."""
    try:
        fv = np.asarray(drift.f(times, values), dtype=np.float64)
        assert fv.shape == values.shape
    except Exception:
        fv = np.array(
            [float(np.asarray(drift.f(float(t), np.asarray(v)))) for t, v in zip(times, values)]
        )
    if not np.isfinite(fv[0]):
        fv = fv.copy()
        fv[0] = fv[1]
    return fv


def residual_defect(solution: SamplePath, drift: DriftSpec, driver: SamplePath) -> float:
    """Max over the grid of |x_t - x_0 - trapz(f(s, x_s)) - phi_t|.

    A-posteriori check that the computed path satisfies the integral equation
    up to quadrature error.
    """
    if not np.array_equal(solution.times, driver.times):
        raise ValueError("solution and driver must share one grid")
    times, vals = solution.times, solution.values
    fv = drift_along_path(drift, times, vals)
    dt = solution.dt
    drift_integral = np.concatenate([[0.0], np.cumsum(0.5 * (fv[1:] + fv[:-1]) * dt)])
    defect = vals - vals[0] - drift_integral - (driver.values - driver.values[0])
    return float(np.max(np.abs(defect)))


@dataclass(frozen=True)
class CirDriftSpec:
    """Drift of the square-root-diffusion equation, with condition envelopes.

    Conditions: (a) f(t, y) >= g(t) > 0 for small y, (b) f >= y df/dy,
    (c) f <= h(t)(y + 1), plus nonnegativity.
    """

    f: Callable
    dfdy: Callable
    lower_envelope: Callable
    upper_envelope: Callable
    x1: float = 1.0
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CirConditionReport:
    small_value_floor: bool  # (a)
    dominates_derivative: bool  # (b)
    affine_growth: bool  # (c)
    details: tuple[str, ...] = ()

    @property
    def all_pass(self) -> bool:
        return self.small_value_floor and self.dominates_derivative and self.affine_growth


def check_cir_conditions(
    cir: CirDriftSpec,
    *,
    horizon: float = 1.0,
    x_max: float = 10.0,
    lattice: tuple[np.ndarray, np.ndarray] | None = None,
) -> CirConditionReport:
    ts, xs = lattice if lattice is not None else _default_lattice(horizon, x_max)
    details: list[str] = []
    tol = 1e-12
    ok_a = True
    xs_small = xs[xs < cir.x1]
    for t in ts:
        g = cir.lower_envelope(t)
        if g <= 0:
            ok_a = False
            details.append(f"(a) lower envelope not positive at t={t:.4g}")
            break
        if xs_small.size:
            fv = np.asarray(cir.f(t, xs_small), dtype=np.float64)
            if np.any(fv < g * (1.0 - 1e-9) - tol):
                ok_a = False
                details.append(f"(a) f below its small-value floor at t={t:.4g}")
                break
    ok_b = True
    for t in ts:
        fv = np.asarray(cir.f(t, xs), dtype=np.float64)
        if np.any(fv < -tol):
            ok_b = False
            details.append(f"f(t, y) < 0 at t={t:.4g}")
            break
        dv = np.asarray(cir.dfdy(t, xs), dtype=np.float64)
        if np.any(fv < xs * dv - tol - 1e-9 * np.abs(fv)):
            ok_b = False
            details.append(f"(b) f < y df/dy at t={t:.4g}")
            break
    ok_c = True
    for t in ts:
        fv = np.asarray(cir.f(t, xs), dtype=np.float64)
        cap = cir.upper_envelope(t) * (xs + 1.0)
        if np.any(fv > cap * (1.0 + 1e-9) + tol):
            ok_c = False
            details.append(f"(c) f above h(t)(y + 1) at t={t:.4g}")
            break
    return CirConditionReport(ok_a, ok_b, ok_c, tuple(details))


def cir_transform(value: float, direction: str) -> float:
    """Square-root change of variables: forward y -> 2 sqrt(y), inverse x -> x^2/4."""
    if value < 0:
        raise ValueError("value must be nonnegative")
    if direction == "forward":
        return 2.0 * np.sqrt(value)
    if direction == "inverse":
        return value * value / 4.0
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


class CirConditionError(ValueError):
    def __init__(self, report: CirConditionReport):
        self.report = report
        failed = [
            name
            for name, ok in (
                ("(a)", report.small_value_floor),
                ("(b)", report.dominates_derivative),
                ("(c)", report.affine_growth),
            )
            if not ok
        ]
        super().__init__(
            f"square-root-diffusion drift violates condition(s) {', '.join(failed)}: "
            + "; ".join(report.details)
        )


def cir_drift_transform(cir: CirDriftSpec, *, horizon: float = 1.0, validate: bool = True) -> DriftSpec:
    """Drift of the transformed equation: f1(t, x) = 2 f(t, x) / x.

    Conditions (a)-(c) on f translate exactly into the three structural
    assumptions on f1 (with unit singularity exponent and doubled envelopes);
    they are validated on a lattice before the transform is built.
    """
    if validate:
        report = check_cir_conditions(cir, horizon=horizon)
        if not report.all_pass:
            raise CirConditionError(report)
    base_f, base_d = cir.f, cir.dfdy
    return DriftSpec(
        family="cir_transform",
        f=lambda t, x: 2.0 * base_f(t, x) / x,
        dfdx=lambda t, x: 2.0 * (x * base_d(t, x) - base_f(t, x)) / x**2,
        singularity_exponent=1.0,
        lower_envelope=lambda t: 2.0 * cir.lower_envelope(t),
        upper_envelope=lambda t: 2.0 * cir.upper_envelope(t),
        x1=cir.x1,
        params=dict(cir.params),
    )


def solve_cir(
    y0: float,
    cir: CirDriftSpec,
    driver: SamplePath,
    config: SolveConfig | None = None,
) -> SamplePath:
    """Solve the square-root-diffusion equation through the 2 sqrt(y) transform.

    Integrates the transformed equation from x0 = 2 sqrt(y0) and maps back;
    positivity of the transformed path makes the returned values strictly
    positive.  Condition checking is the caller's business (see
    ``check_cir_conditions``): a drift without the small-value floor may drive
    the transformed path to zero, which surfaces as a solver error.
    """
    if y0 <= 0:
        raise ValueError("y0 must be strictly positive")
    drift = cir_drift_transform(cir, horizon=driver.horizon, validate=False)
    x_path = solve_pathwise(cir_transform(y0, "forward"), drift, driver, config)
    return SamplePath(driver.times, x_path.values**2 / 4.0, holder_hint=driver.holder_hint)

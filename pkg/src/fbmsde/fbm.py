"""Exact sampling of fractional Brownian motion and its Gaussian geometry.

Covariance: R(s, t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2 with Hurst index
H > 1/2 (long memory).  Two exact samplers are provided: circulant embedding
of the stationary increment covariance (fast, O(n log n)) and a Cholesky
factorization of the full grid covariance (the slow reference).  The module
also evaluates the square-root (Volterra) kernel of the covariance, the
singular-kernel inner product of step functions, and the embedding of step
directions into Hölder path space.
"""

from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .paths import SamplePath, StepFunction

__all__ = [
    "FbmSpec",
    "FbmSamplingError",
    "hurst_covariance",
    "kernel_coeff",
    "volterra_kernel",
    "sample_fbm",
    "sample_fbm_batch",
    "inner_product",
    "grid_inner_product",
    "embed_direction",
]

# Eigenvalues of the circulant embedding this close to zero are roundoff and
# get clamped; anything more negative means the embedding genuinely failed.
_EIG_TOL = 1e-10


class FbmSamplingError(RuntimeError):
    """Raised when a sampling method cannot produce an exact path."""


@dataclass(frozen=True)
class FbmSpec:
    """Parameters of one fractional Brownian path on a uniform grid.

    ``hurst`` must lie in [1/2, 1): the open interval (1/2, 1) is the regime
    every experiment targets, H = 1/2 is admitted only as the Brownian sanity
    case.  ``n_steps`` counts increments, so paths carry n_steps + 1 points.
    """

    hurst: float
    horizon: float = 1.0
    n_steps: int = 256
    method: str = "circulant_embedding"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.5 <= self.hurst < 1.0:
            raise ValueError(f"hurst must lie in [1/2, 1), got {self.hurst}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.n_steps < 2:
            raise ValueError("n_steps must be at least 2")
        if self.method not in ("circulant_embedding", "cholesky"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


def hurst_covariance(s: float, t: float, hurst: float) -> float:
    """Covariance R(s, t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2."""
    if s < 0 or t < 0:
        raise ValueError("times must be nonnegative")
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    h2 = 2.0 * hurst
    return 0.5 * (t**h2 + s**h2 - abs(t - s) ** h2)


def kernel_coeff(hurst: float) -> float:
    """Coefficient H(2H-1) of the |r-u|^{2H-2} kernel in the covariance double integral."""
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    return hurst * (2.0 * hurst - 1.0)


def _sqrt_kernel_const(hurst: float) -> float:
    # c_H = sqrt(H(2H-1) / B(2-2H, H-1/2)); log-gamma form stays finite as H -> 1.
    log_beta = (
        gammaln(2.0 - 2.0 * hurst)
        + gammaln(hurst - 0.5)
        - gammaln(1.5 - hurst)
    )
    return float(np.sqrt(kernel_coeff(hurst) * np.exp(-log_beta)))


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(16)


def _gauss_panel(f, a: float, b: float) -> float:
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GAUSS_W, f(mid + half * _GAUSS_X)))


def _adaptive_gauss(f, a: float, b: float, rtol: float, scale: float, depth: int = 0) -> float:
    whole = _gauss_panel(f, a, b)
    mid = 0.5 * (a + b)
    split = _gauss_panel(f, a, mid) + _gauss_panel(f, mid, b)
    if abs(split - whole) <= rtol * max(abs(split), scale) or depth >= 40:
        return split
    return _adaptive_gauss(f, a, mid, rtol, scale, depth + 1) + _adaptive_gauss(
        f, mid, b, rtol, scale, depth + 1
    )


def volterra_kernel(t: float, s: float, hurst: float, rtol: float = 1e-8) -> float:
    """Square-root kernel K(t, s) of the covariance factorization.

    K(t, s) = c_H s^{1/2-H} * integral_s^t (u-s)^{H-3/2} u^{H-1/2} du for
    s < t, zero otherwise.  The substitution w = (u-s)^{H-1/2} removes the
    endpoint singularity completely, so an adaptive Gauss rule on the smooth
    integrand reaches the requested relative tolerance.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    if s >= t:
        return 0.0
    q = hurst - 0.5
    w_max = (t - s) ** q
    inv_q = 1.0 / q

    def integrand(w: np.ndarray) -> np.ndarray:
        return (s + w**inv_q) ** q

    val = _adaptive_gauss(integrand, 0.0, w_max, rtol, scale=w_max * s**q) * inv_q
    return _sqrt_kernel_const(hurst) * s ** (0.5 - hurst) * val


@functools.lru_cache(maxsize=64)
def _circulant_sqrt_eigs(hurst: float, n: int) -> np.ndarray:
    """sqrt(eig / (2m)) of the size-m = 2n circulant embedding of unit-step noise."""
    k = np.arange(n + 1, dtype=np.float64)
    h2 = 2.0 * hurst
    gamma = 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigs = np.fft.fft(row).real
    if eigs.min() < -_EIG_TOL:
        raise FbmSamplingError(
            f"circulant embedding produced eigenvalue {eigs.min():.3e} < -{_EIG_TOL}; "
            "fall back to method='cholesky'"
        )
    eigs = np.clip(eigs, 0.0, None)
    out = np.sqrt(eigs / (4.0 * n))
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=64)
def _cholesky_factor(hurst: float, n: int) -> np.ndarray:
    """Lower Cholesky factor of the unit-horizon grid covariance."""
    t = np.arange(1, n + 1, dtype=np.float64) / n
    h2 = 2.0 * hurst
    cov = 0.5 * (
        t[:, None] ** h2 + t[None, :] ** h2 - np.abs(t[:, None] - t[None, :]) ** h2
    )
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise FbmSamplingError(
            f"grid covariance numerically non-positive-definite for H={hurst}, n={n}"
        ) from exc
    factor.setflags(write=False)
    return factor


def _path_rng(seed: int, path_index: int) -> np.random.Generator:
    # Counter-based splitting: path i draws from Philox keyed by seed XOR i,
    # so batch results do not depend on scheduling or batch size.
    key = int(seed) ^ int(path_index)
    return np.random.Generator(np.random.Philox(key=key))


def _sample_values(spec: FbmSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.n_steps
    if spec.method == "circulant_embedding":
        coeff = _circulant_sqrt_eigs(spec.hurst, n)
        m = 2 * n
        w = np.zeros(m, dtype=np.complex128)
        w[0] = coeff[0] * np.sqrt(2.0) * rng.standard_normal()
        w[n] = coeff[n] * np.sqrt(2.0) * rng.standard_normal()
        ab = rng.standard_normal((n - 1, 2))
        w[1:n] = coeff[1:n] * (ab[:, 0] + 1j * ab[:, 1])
        w[n + 1 :] = np.conj(w[1:n][::-1])
        noise = np.fft.fft(w).real[:n]
        increments = (spec.horizon / n) ** spec.hurst * noise
        values = np.concatenate([[0.0], np.cumsum(increments)])
    else:
        factor = _cholesky_factor(spec.hurst, n)
        z = rng.standard_normal(n)
        values = np.concatenate([[0.0], spec.horizon**spec.hurst * (factor @ z)])
    return values


def sample_fbm(spec: FbmSpec) -> SamplePath:
    """Draw one fractional Brownian path with the exact grid law.

    Identical spec (including seed and method) yields a bit-identical path.
    """
    values = _sample_values(spec, _path_rng(spec.seed, 0))
    return SamplePath(spec.times, values, holder_hint=spec.hurst)


def sample_fbm_batch(spec: FbmSpec, n_paths: int, threads: int = 1) -> np.ndarray:
    """Draw ``n_paths`` independent paths; row i uses the per-path key seed XOR i.

    Returns an (n_paths, n_steps + 1) matrix.  Results are identical for any
    thread count because every path owns its counter-based stream.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    out = np.empty((n_paths, spec.n_steps + 1))

    def fill(i: int) -> None:
        out[i] = _sample_values(spec, _path_rng(spec.seed, i))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(n_paths)))
    else:
        for i in range(n_paths):
            fill(i)
    return out


def _rect_weight(a, b, c, d, h2: float):
    """alpha_H * integral over [a,b] x [c,d] of |r-u|^{2H-2}, in closed form."""
    return 0.5 * (
        np.abs(b - c) ** h2
        - np.abs(a - c) ** h2
        - np.abs(b - d) ** h2
        + np.abs(a - d) ** h2
    )


def inner_product(phi: StepFunction, psi: StepFunction, hurst: float) -> float:
    """Singular-kernel inner product of two step functions, exactly.

    The |r-u|^{2H-2} kernel integrates over every rectangle pair to explicit
    power functions, so the value is exact up to roundoff.  Requires H > 1/2;
    the kernel representation is not integrable otherwise.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    h2 = 2.0 * hurst
    a = phi.breakpoints[:-1][:, None]
    b = phi.breakpoints[1:][:, None]
    c = psi.breakpoints[:-1][None, :]
    d = psi.breakpoints[1:][None, :]
    weights = _rect_weight(a, b, c, d, h2)
    return float(phi.levels @ weights @ psi.levels)


def grid_inner_product(
    levels_u: np.ndarray, levels_v: np.ndarray, dt: float, hurst: float
) -> float:
    """Inner product of two step functions sharing the same uniform cells.

    On uniform cells the rectangle weights collapse to the stationary lag
    sequence, so the double sum reduces to one correlation pass.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    u = np.asarray(levels_u, dtype=np.float64)
    v = np.asarray(levels_v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("level arrays must be 1-d and equally long")
    m = u.size
    h2 = 2.0 * hurst
    k = np.arange(m, dtype=np.float64)
    gamma = 0.5 * ((k + 1.0) ** h2 - 2.0 * k**h2 + np.abs(k - 1.0) ** h2)
    # np.correlate(u, v, "full")[m-1+k] = sum_i u_{i+k} v_i
    cross = np.correlate(u, v, "full")
    total = gamma[0] * cross[m - 1]
    if m > 1:
        total += np.dot(gamma[1:], cross[m:] + cross[m - 2 :: -1])
    return float(dt**h2 * total)


def embed_direction(phi: StepFunction, hurst: float, times: np.ndarray) -> SamplePath:
    """Embed a step direction into path space: h(t) = <phi, 1_[0,t]>.

    The embedded path is Hölder continuous of order H and satisfies h(0) = 0.
    """
    if not 0.5 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (1/2, 1), got {hurst}")
    t = np.asarray(times, dtype=np.float64)[None, :]
    h2 = 2.0 * hurst
    a = phi.breakpoints[:-1][:, None]
    b = phi.breakpoints[1:][:, None]
    weights = _rect_weight(a, b, np.zeros_like(t), t, h2)
    values = phi.levels @ weights
    return SamplePath(np.asarray(times, dtype=np.float64), values, holder_hint=hurst)

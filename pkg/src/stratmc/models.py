"""Map standard-normal driver vectors to asset-price paths.

BS paths are sampled exactly at the monitoring dates through the Cholesky
factor of the Kronecker covariance Sigma_B (x) Sigma_A; CIR paths use the
Euler scheme with the square-root argument floored at zero.  Flattened BS
indices run asset-fastest: k = k2*M + k1 (0-based asset k1, date k2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFeller
from .linalg import bm_covariance, cholesky, kronecker

__all__ = [
    "BsParams",
    "CirParams",
    "PathMatrix",
    "asset_covariance",
    "path_covariance",
    "path_factor",
    "bs_drift",
    "bs_coefficients",
    "bs_basket_g",
    "bs_paths",
    "cir_euler_path",
    "cir_zero_noise_path",
]


@dataclass(frozen=True)
class BsParams:
    """Multi-asset Black-Scholes parameters on a monitoring grid.

    weights is the (M, N) averaging matrix w_ij used by the basket payoff
    and by the drift construction mu_k = ln(w S0) + (r - sigma^2/2) t.
    """

    s0: np.ndarray
    sigma: np.ndarray
    corr: np.ndarray
    rate: float
    grid: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s0 = np.atleast_1d(np.asarray(self.s0, dtype=float))
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        grid = np.atleast_1d(np.asarray(self.grid, dtype=float))
        corr = np.atleast_2d(np.asarray(self.corr, dtype=float))
        weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        m = s0.size
        if sigma.size != m or corr.shape != (m, m):
            raise ValueError("s0, sigma and corr sizes disagree")
        if np.any(s0 <= 0.0) or np.any(sigma <= 0.0):
            raise ValueError("s0 and sigma must be positive")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12) or \
                not np.allclose(corr, corr.T, atol=1e-12):
            raise ValueError("corr must be symmetric with unit diagonal")
        if grid[0] <= 0.0 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must satisfy 0 < t_1 < ... < t_N")
        if weights.shape != (m, grid.size):
            raise ValueError("weights must have shape (assets, dates)")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        for name, val in (("s0", s0), ("sigma", sigma), ("corr", corr),
                          ("grid", grid), ("weights", weights)):
            object.__setattr__(self, name, val)

    @property
    def n_assets(self) -> int:
        return self.s0.size

    @property
    def n_dates(self) -> int:
        return self.grid.size

    @property
    def dim(self) -> int:
        return self.n_assets * self.n_dates


@dataclass(frozen=True)
class CirParams:
    """CIR square-root diffusion dS = alpha (mu - S) dt + sigma sqrt(S) dW.

    enforce_feller=False relaxes the 2*alpha*mu > sigma^2 condition for
    degenerate test configurations (alpha = 0, sigma = 0).
    """

    s0: float
    alpha: float
    mu: float
    sigma: float
    rate: float
    n_steps: int
    maturity: float
    enforce_feller: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.s0 <= 0.0 or self.mu <= 0.0 or self.maturity <= 0.0:
            raise ValueError("s0, mu and maturity must be positive")
        if self.alpha < 0.0 or self.sigma < 0.0 or self.rate < 0.0:
            raise ValueError("alpha, sigma and rate must be nonnegative")
        if self.n_steps < 1:
            raise ValueError("need at least one step")
        if self.enforce_feller:
            self.check_feller()

    def check_feller(self):
        if not 2.0 * self.alpha * self.mu > self.sigma ** 2:
            raise InvalidFeller(
                f"2*alpha*mu = {2 * self.alpha * self.mu} must exceed "
                f"sigma^2 = {self.sigma ** 2}")

    @property
    def dt(self) -> float:
        return self.maturity / self.n_steps


@dataclass
class PathMatrix:
    """Asset-price values on the monitoring grid, shape (..., M, N).

    Leading dimensions hold a batch of paths.  floored records whether the
    CIR Euler recursion clipped a negative value under the square root.
    """

    values: np.ndarray
    floored: bool = False


# --- BS ----------------------------------------------------------------------


def asset_covariance(params: BsParams) -> np.ndarray:
    """Sigma_A with entries sigma_i rho_ik sigma_k."""
    return np.outer(params.sigma, params.sigma) * params.corr


def path_covariance(params: BsParams) -> np.ndarray:
    """Sigma_MN = Sigma_B (x) Sigma_A (dates-major, assets-minor)."""
    return kronecker(bm_covariance(params.grid), asset_covariance(params))


def path_factor(params: BsParams) -> np.ndarray:
    """Lower-triangular C with C C^T = Sigma_MN."""
    return cholesky(path_covariance(params))


def bs_drift(params: BsParams) -> np.ndarray:
    """Flattened drift exponents (r - sigma_{k1}^2 / 2) t_{k2}."""
    m, n = params.n_assets, params.n_dates
    k1 = np.arange(m * n) % m
    k2 = np.arange(m * n) // m
    return (params.rate - 0.5 * params.sigma[k1] ** 2) * params.grid[k2]


def bs_coefficients(params: BsParams) -> np.ndarray:
    """Flattened prefactors w_{k1 k2} * S0_{k1} (exp(mu_k) = coef * e^drift)."""
    m, n = params.n_assets, params.n_dates
    k1 = np.arange(m * n) % m
    k2 = np.arange(m * n) // m
    return params.weights[k1, k2] * params.s0[k1]


def bs_basket_g(eps: np.ndarray, params: BsParams,
                factor: np.ndarray | None = None) -> np.ndarray:
    """Weighted sum of lognormal grid values, g(eps) = sum_k exp(mu_k + (C eps)_k).

    eps has shape (..., M*N); pass the precomputed Cholesky factor when
    evaluating many batches.
    """
    c = path_factor(params) if factor is None else factor
    eps = np.asarray(eps, dtype=float)
    drift = bs_drift(params)
    coef = bs_coefficients(params)
    return np.exp(drift + eps @ c.T) @ coef


def bs_paths(eps: np.ndarray, params: BsParams,
             factor: np.ndarray | None = None) -> PathMatrix:
    """Exact lognormal grid values S_{k1}(t_{k2}), shape (..., M, N)."""
    c = path_factor(params) if factor is None else factor
    eps = np.asarray(eps, dtype=float)
    m, n = params.n_assets, params.n_dates
    k1 = np.arange(m * n) % m
    flat = params.s0[k1] * np.exp(bs_drift(params) + eps @ c.T)
    shaped = flat.reshape(eps.shape[:-1] + (n, m))
    return PathMatrix(values=np.swapaxes(shaped, -1, -2))


# --- CIR ---------------------------------------------------------------------


def cir_euler_path(z: np.ndarray, params: CirParams) -> PathMatrix:
    """Euler paths S_1..S_N driven by z, shape (..., 1, N).

    The square-root argument is floored at zero (full-truncation style);
    the floored flag records whether clipping ever occurred.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != params.n_steps:
        raise ValueError("driver length must equal n_steps")
    dt = params.dt
    s = np.broadcast_to(np.float64(params.s0), z.shape[:-1]).copy()
    out = np.empty(z.shape)
    floored = False
    for j in range(params.n_steps):
        base = np.maximum(s, 0.0)
        if not floored and np.any(base != s):
            floored = True
        s = s + params.alpha * (params.mu - s) * dt \
            + params.sigma * np.sqrt(base * dt) * z[..., j]
        out[..., j] = s
    return PathMatrix(values=out[..., None, :], floored=floored)


def cir_zero_noise_path(params: CirParams) -> np.ndarray:
    """Deterministic skeleton S_j = (1 - alpha dt)^j (S0 - mu) + mu, j = 0..N."""
    j = np.arange(params.n_steps + 1)
    return (1.0 - params.alpha * params.dt) ** j * (params.s0 - params.mu) + params.mu

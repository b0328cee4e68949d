"""Benchmark parameter sets shared by the demos, the self-test suite and
the bundled configuration files."""
from __future__ import annotations

import numpy as np

from .models import BsParams, CirParams
from .payoffs import PayoffSpec

__all__ = [
    "bs_asian_params",
    "bs_barrier_params",
    "basket_params",
    "cir_asian_params",
    "uniform_weights",
    "payoff_for",
]


def uniform_weights(m: int, n: int) -> np.ndarray:
    return np.full((m, n), 1.0 / (m * n))


def bs_asian_params() -> BsParams:
    """Single-asset Asian benchmark: S0=50, sigma=0.3, r=0.05, 64 dates."""
    n = 64
    return BsParams(
        s0=[50.0],
        sigma=[0.3],
        corr=[[1.0]],
        rate=0.05,
        grid=np.arange(1, n + 1) / n,
        weights=uniform_weights(1, n),
    )


def bs_barrier_params() -> BsParams:
    """Single-asset barrier benchmark: S0=50, sigma=0.1, r=0.05, 16 dates."""
    n = 16
    return BsParams(
        s0=[50.0],
        sigma=[0.1],
        corr=[[1.0]],
        rate=0.05,
        grid=np.arange(1, n + 1) / n,
        weights=uniform_weights(1, n),
    )


def basket_params() -> BsParams:
    """40-asset terminal basket: spots 20..60, vols 0.1..0.4, rho=0.5."""
    m = 40
    corr = np.full((m, m), 0.5)
    np.fill_diagonal(corr, 1.0)
    return BsParams(
        s0=np.linspace(20.0, 60.0, m),
        sigma=np.linspace(0.1, 0.4, m),
        corr=corr,
        rate=0.05,
        grid=[1.0],
        weights=uniform_weights(m, 1),
    )


def cir_asian_params() -> CirParams:
    """Mean-reverting square-root benchmark: S0=100, alpha=1.5, level 100,
    sigma=8, 64 steps over one year."""
    return CirParams(
        s0=100.0,
        alpha=1.5,
        mu=100.0,
        sigma=8.0,
        rate=0.05,
        n_steps=64,
        maturity=1.0,
    )


def payoff_for(params, strike: float, kind: str = "asian-basket",
               barrier: float | None = None) -> PayoffSpec:
    """PayoffSpec with the model's uniform averaging weights and discount."""
    if isinstance(params, CirParams):
        m, n = 1, params.n_steps
        maturity = params.maturity
    else:
        m, n = params.n_assets, params.n_dates
        maturity = float(params.grid[-1])
    return PayoffSpec(
        kind=kind,
        strike=strike,
        barrier=barrier,
        weights=uniform_weights(m, n),
        discount=float(np.exp(-params.rate * maturity)),
    )

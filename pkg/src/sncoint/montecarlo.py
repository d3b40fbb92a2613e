"""Monte Carlo generation and size / size-adjusted-power experiments.

The data-generating process has two integrated regressors whose
innovations carry an MA(1) component, regression errors with ARMA(1,1)
dynamics plus an endogeneity channel, and innovations built from three
correlated GARCH(1,1) processes:

    u_t    = rho1 u_{t-1} + e_t + phi e_{t-1} + rho2 (nu_{1t} + nu_{2t})
    v_{it} = nu_{it} + 0.5 nu_{i,t-1}
    [e, nu_1, nu_2]' = L [xi_1, xi_2, xi_3]',  L L' = P(rho3)

with each xi a unit-variance GARCH(1,1). The first ``burn_in`` periods
are discarded. Setting a1 = b1 = rho3 = 0 collapses the innovations to
i.i.d. standard normals, which is the same code path.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Mapping

import numpy as np
from scipy.signal import lfilter

from .estimators import RestrictionSpec
from .streams import replication_map, substream
from .timeseries import CointegrationSample, Deterministics

__all__ = [
    "DgpConfig",
    "ExperimentResult",
    "simulate_garch_innovations",
    "generate_dgp",
    "null_restriction",
    "size_experiment",
    "size_adjusted_power",
]

TestFn = Callable[[CointegrationSample, RestrictionSpec, int], bool]
StatisticFn = Callable[[CointegrationSample, RestrictionSpec], float]


@dataclass(frozen=True)
class DgpConfig:
    """Parameters of the two-regressor Monte Carlo design."""

    T: int
    rho1: float = 0.0
    rho2: float = 0.0
    rho3: float = 0.2
    phi: float = 0.0
    a1: float = 0.05
    b1: float = 0.94
    beta: tuple[float, float] = (1.0, 1.0)
    burn_in: int = 100

    def __post_init__(self) -> None:
        if self.T < 10:
            raise ValueError("sample size too small")
        if abs(self.rho1) >= 1.0:
            raise ValueError("|rho1| must be below one")
        if self.a1 < 0 or self.b1 < 0 or self.a1 + self.b1 >= 1.0:
            raise ValueError("need a1, b1 >= 0 and a1 + b1 < 1")
        if not -0.5 < self.rho3 < 1.0:
            raise ValueError("rho3 must lie in (-0.5, 1) for a positive definite mix")
        if self.burn_in < 1:
            raise ValueError("burn_in must be positive")

    def mixing_matrix(self) -> np.ndarray:
        """Cholesky factor of the equicorrelation matrix with off-diagonal rho3."""
        P = np.full((3, 3), self.rho3)
        np.fill_diagonal(P, 1.0)
        return np.linalg.cholesky(P)


def simulate_garch_innovations(config: DgpConfig, length: int, rng: np.random.Generator) -> np.ndarray:
    """Three correlated unit-variance GARCH(1,1) series, shape (length, 3).

    Each underlying series follows sigma2_t = a0 + a1 xi_{t-1}^2 +
    b1 sigma2_{t-1} with a0 = 1 - a1 - b1 and initial squared value and
    variance both one, so the unconditional variance is one. The three
    series are mixed by the Cholesky factor of the equicorrelation
    matrix at every date.
    """
    eps = rng.standard_normal((length, 3))
    if config.a1 == 0.0 and config.b1 == 0.0:
        xi = eps
    else:
        a0 = 1.0 - config.a1 - config.b1
        xi = np.empty((length, 3))
        sigma2 = np.ones(3)
        xi_prev_sq = np.ones(3)
        for t in range(length):
            sigma2 = a0 + config.a1 * xi_prev_sq + config.b1 * sigma2
            xi[t] = np.sqrt(sigma2) * eps[t]
            xi_prev_sq = xi[t] ** 2
    return xi @ config.mixing_matrix().T


def generate_dgp(config: DgpConfig, rng: np.random.Generator) -> CointegrationSample:
    """Draw one sample of length T from the Monte Carlo design.

    Pre-sample values of the error recursions are zero; the regressors
    restart from zero after the burn-in is dropped.
    """
    n = config.burn_in + config.T
    mixed = simulate_garch_innovations(config, n, rng)
    e = mixed[:, 0]
    nu = mixed[:, 1:]
    e_prev = np.concatenate([[0.0], e[:-1]])
    nu_prev = np.vstack([np.zeros((1, 2)), nu[:-1]])

    forcing = e + config.phi * e_prev + config.rho2 * nu.sum(axis=1)
    u = lfilter([1.0], [1.0, -config.rho1], forcing)
    v = nu + 0.5 * nu_prev

    u = u[config.burn_in :]
    x = np.cumsum(v[config.burn_in :], axis=0)
    y = x @ np.asarray(config.beta) + u
    return CointegrationSample(y=y, x=x, det=Deterministics.NONE)


def null_restriction(config: DgpConfig) -> RestrictionSpec:
    """The joint restriction pinning both long-run coefficients."""
    return RestrictionSpec(R=np.eye(2), value=np.asarray(config.beta))


@dataclass(frozen=True)
class ExperimentResult:
    """Rejection rates (size) or rate curves over a coefficient grid (power)."""

    kind: str
    rates: dict
    reps: int
    seed: int
    beta_grid: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, value in self.rates.items():
            arr = np.atleast_1d(np.asarray(value, dtype=float))
            if np.any((arr < 0) | (arr > 1)):
                raise ValueError(f"rates for {name!r} outside [0, 1]")


def _test_seed(seed: int, phase: int, rep: int, test_index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(phase, rep, test_index)).generate_state(1)[0])


def _size_rep(config: DgpConfig, tests: list, restriction: RestrictionSpec, seed: int, i: int):
    sample = generate_dgp(config, substream(seed, 0, i))
    return [bool(fn(sample, restriction, _test_seed(seed, 0, i, j))) for j, (_, fn) in enumerate(tests)]


def size_experiment(
    config: DgpConfig,
    tests: Mapping[str, TestFn],
    reps: int,
    seed: int = 0,
    workers: int = 1,
) -> ExperimentResult:
    """Null rejection frequency of each test over ``reps`` samples.

    Each test is a callable (sample, restriction, seed) -> reject. The
    restriction fixes the coefficients at their true values, so rates
    estimate empirical size.
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    restriction = null_restriction(config)
    items = list(tests.items())
    start = time.perf_counter()
    runner = partial(_size_rep, config, items, restriction, seed)
    outcomes = np.asarray(replication_map(runner, reps, workers), dtype=float)
    rates = {name: float(outcomes[:, j].mean()) for j, (name, _) in enumerate(items)}
    return ExperimentResult(
        kind="size",
        rates=rates,
        reps=reps,
        seed=seed,
        meta={"config": config, "runtime_s": time.perf_counter() - start, "workers": workers},
    )


def _statistic_rep(config: DgpConfig, stats: list, restriction: RestrictionSpec, phase: int, seed: int, i: int):
    sample = generate_dgp(config, substream(seed, phase, i))
    return [float(fn(sample, restriction)) for _, fn in stats]


def size_adjusted_power(
    config: DgpConfig,
    statistics: Mapping[str, StatisticFn],
    beta_grid,
    reps: int,
    seed: int = 0,
    alpha: float = 0.05,
    workers: int = 1,
) -> ExperimentResult:
    """Power at empirically calibrated critical values.

    Phase one simulates under the null (the coefficients in ``config``)
    and records each statistic's empirical 1 - alpha quantile; phase two
    evaluates rejection rates over ``beta_grid`` (both coefficients set
    to the grid value) against those adjusted critical values. Grid
    points share innovation draws, so curves are smooth in the
    coefficient.
    """
    beta_grid = np.asarray(beta_grid, dtype=float)
    restriction = null_restriction(config)
    items = list(statistics.items())
    start = time.perf_counter()

    runner = partial(_statistic_rep, config, items, restriction, 0, seed)
    null_draws = np.asarray(replication_map(runner, reps, workers))
    adjusted = {name: float(np.quantile(null_draws[:, j], 1.0 - alpha)) for j, (name, _) in enumerate(items)}

    curves = {name: np.zeros(beta_grid.shape[0]) for name, _ in items}
    for g, b in enumerate(beta_grid):
        grid_config = replace(config, beta=(float(b), float(b)))
        runner = partial(_statistic_rep, grid_config, items, restriction, 1, seed)
        draws = np.asarray(replication_map(runner, reps, workers))
        for j, (name, _) in enumerate(items):
            curves[name][g] = float(np.mean(draws[:, j] > adjusted[name]))

    return ExperimentResult(
        kind="power",
        rates=curves,
        reps=reps,
        seed=seed,
        beta_grid=beta_grid,
        meta={
            "config": config,
            "alpha": alpha,
            "adjusted_critical_values": adjusted,
            "runtime_s": time.perf_counter() - start,
            "workers": workers,
        },
    )

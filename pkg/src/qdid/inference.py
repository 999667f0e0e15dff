"""Exchangeable bootstrap, sup-norm test of zero effect, and uniform bands.

Resampling draws one nonnegative exchangeable weight vector per sample arm
(multinomial counts by default, i.e. the empirical bootstrap) and re-runs
the full estimator with those weights threaded through every ECDF. The
critical value for the sup test is the empirical (1-alpha) quantile of the
recentered bootstrap sup process; the same value gives a simultaneous
confidence band of constant half-width around the estimated process.

Every draw is generated from a substream keyed by (seed, cell index, draw
index), so results are reproducible and independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import (
    CqttProcess,
    PanelCell,
    RcsCell,
    counterfactual_cdf_panel,
    counterfactual_cdf_rcs,
    estimate_process,
    treated_shares,
    unconditional_qtt,
)

__all__ = [
    "BootstrapConfig",
    "KsTestResult",
    "InferenceReport",
    "substream",
    "draw_weight_vector",
    "draw_weights",
    "bootstrap_process",
    "ks_test",
    "uniform_band",
    "pointwise_se",
    "empirical_quantile",
    "analyze_cell",
    "analyze_unconditional",
]

SCHEMES = ("multinomial", "dirichlet")


@dataclass(frozen=True)
class BootstrapConfig:
    iterations: int = 1000
    alpha: float = 0.05
    seed: int = 0
    scheme: str = "multinomial"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) address; order-free reproducibility."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def draw_weight_vector(n: int, scheme: str, rng: np.random.Generator) -> np.ndarray:
    """One exchangeable nonnegative weight vector for an arm of size n.

    multinomial: resample counts (n draws over n equiprobable categories),
    summing to n exactly. dirichlet: flat Dirichlet scaled by n; strictly
    positive almost surely, mean weight 1.
    """
    if n < 1:
        raise ValueError("arm size must be >= 1")
    if scheme == "multinomial":
        return np.bincount(rng.integers(0, n, size=n), minlength=n).astype(float)
    if scheme == "dirichlet":
        return rng.dirichlet(np.ones(n)) * n
    raise ValueError(f"scheme must be one of {SCHEMES}")


def draw_weights(
    arm_sizes: dict[str, int], scheme: str, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Weight vectors for each arm, drawn independently in sorted-name order."""
    return {arm: draw_weight_vector(arm_sizes[arm], scheme, rng) for arm in sorted(arm_sizes)}


def bootstrap_process(
    cell: PanelCell | RcsCell,
    tau_grid,
    config: BootstrapConfig,
    estimator: str = "ddid",
    n_total: int | None = None,
    cell_index: int = 0,
    key_prefix: tuple[int, ...] = (),
) -> np.ndarray:
    """B bootstrap replicates of the effect process; shape (B, len(grid)).

    Draw b uses the substream keyed (*key_prefix, cell_index, b) under
    config.seed, so replicates are reproducible regardless of evaluation
    order and distinct cells never share draws.
    """
    taus = np.asarray(tau_grid, dtype=float)
    sizes = cell.arm_sizes()
    draws = np.empty((config.iterations, taus.size))
    for b in range(config.iterations):
        rng = substream(config.seed, *key_prefix, cell_index, b)
        weights = draw_weights(sizes, config.scheme, rng)
        draws[b] = estimate_process(cell, taus, estimator, weights, n_total).values
    return draws


def empirical_quantile(sample, q: float) -> float:
    """Generalized-inverse sample quantile inf{v : F_n(v) >= q}, q in (0, 1]."""
    sample = np.sort(np.asarray(sample, dtype=float))
    if not 0.0 < q <= 1.0:
        raise ValueError("quantile level must lie in (0, 1]")
    cum = np.arange(1, sample.size + 1) / sample.size
    return float(sample[np.searchsorted(cum, q, side="left")])


@dataclass(frozen=True)
class KsTestResult:
    statistic: float
    critical_value: float
    reject: bool
    band_half_width: float


def ks_test(
    values, draws: np.ndarray, n_total: int, alpha: float
) -> KsTestResult:
    """Sup-norm test of zero effect across the whole grid.

    statistic = sqrt(n) * max_tau |effect(tau)|; the critical value is the
    empirical (1-alpha) quantile of sqrt(n) * max_tau |draw - effect| over
    bootstrap draws. The reject decision is evaluated against the band
    half-width (critical value / sqrt(n)) so that rejecting is exactly
    equivalent to zero escaping the uniform band at some grid point.
    """
    values = np.asarray(values, dtype=float)
    root_n = math.sqrt(n_total)
    stat_raw = float(np.max(np.abs(values)))
    sups = np.max(np.abs(draws - values), axis=1)
    crit_raw = empirical_quantile(sups, 1.0 - alpha)
    critical_value = root_n * crit_raw
    half_width = critical_value / root_n
    return KsTestResult(
        statistic=root_n * stat_raw,
        critical_value=critical_value,
        reject=stat_raw > half_width,
        band_half_width=half_width,
    )


def uniform_band(values, critical_value: float, n_total: int):
    """Simultaneous band: constant half-width critical_value/sqrt(n) around the process."""
    if critical_value < 0:
        raise ValueError("critical value must be non-negative")
    values = np.asarray(values, dtype=float)
    half = critical_value / math.sqrt(n_total)
    return values - half, values + half


def pointwise_se(draws: np.ndarray) -> np.ndarray:
    """Bootstrap standard error at each grid point (sample sd over draws)."""
    draws = np.asarray(draws, dtype=float)
    if draws.shape[0] < 2:
        raise ValueError("need at least two bootstrap draws")
    return np.std(draws, axis=0, ddof=1)


@dataclass(frozen=True)
class InferenceReport:
    """Uniform inference for one effect process (one cell, one estimator)."""

    process: CqttProcess
    ks_statistic: float
    critical_value: float
    reject: bool
    lower: np.ndarray
    upper: np.ndarray
    pointwise_se: np.ndarray
    iterations: int
    alpha: float
    seed: int
    scheme: str


def _assemble_report(process, draws, config) -> InferenceReport:
    ks = ks_test(process.values, draws, process.n_total, config.alpha)
    return InferenceReport(
        process=process,
        ks_statistic=ks.statistic,
        critical_value=ks.critical_value,
        reject=ks.reject,
        lower=process.values - ks.band_half_width,
        upper=process.values + ks.band_half_width,
        pointwise_se=pointwise_se(draws),
        iterations=config.iterations,
        alpha=config.alpha,
        seed=config.seed,
        scheme=config.scheme,
    )


def analyze_cell(
    cell: PanelCell | RcsCell,
    tau_grid,
    config: BootstrapConfig,
    estimator: str = "ddid",
    n_total: int | None = None,
    cell_index: int = 0,
) -> InferenceReport:
    """Point process, bootstrap, sup test, band, and pointwise SEs for one cell."""
    process = estimate_process(cell, tau_grid, estimator, None, n_total)
    draws = bootstrap_process(
        cell, tau_grid, config, estimator, n_total, cell_index=cell_index
    )
    return _assemble_report(process, draws, config)


def analyze_unconditional(
    cells: list[tuple[int, PanelCell | RcsCell]],
    tau_grid,
    config: BootstrapConfig,
    n_total: int,
) -> InferenceReport:
    """Uniform inference for the treated-share mixture across cells.

    ``cells`` pairs each cell with its index in the full deterministic cell
    list; per-cell weight substreams reuse the same (seed, cell index, draw)
    keying as the per-cell analyses. Mixture shares are the treated counts,
    which multinomial resampling holds fixed.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if not cells:
        raise ValueError("need at least one viable cell")

    def counterfactuals(weights_by_cell):
        out = []
        for (_, cell), w in zip(cells, weights_by_cell):
            if isinstance(cell, PanelCell):
                out.append(counterfactual_cdf_panel(cell, w))
            else:
                out.append(counterfactual_cdf_rcs(cell, w))
        return out

    results = counterfactuals([None] * len(cells))
    shares = treated_shares(results)
    process = unconditional_qtt(results, shares, taus, n_total)

    draws = np.empty((config.iterations, taus.size))
    for b in range(config.iterations):
        weights_by_cell = []
        for cell_index, cell in cells:
            rng = substream(config.seed, cell_index, b)
            weights_by_cell.append(draw_weights(cell.arm_sizes(), config.scheme, rng))
        star = counterfactuals(weights_by_cell)
        draws[b] = unconditional_qtt(star, shares, taus, n_total).values
    return _assemble_report(process, draws, config)

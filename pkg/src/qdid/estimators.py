"""Counterfactual distribution construction and quantile treatment effects.

The treated group's counterfactual untreated-outcome distribution is built
from control observations: each control unit's outcome change is added to
the treated-group pre-period value at the same pre-period rank, and the
counterfactual CDF is the (weighted) ECDF of those transformed outcomes.
Panel data uses observed within-unit changes; repeated cross sections
recover the change by rank-matching the control group across periods.
Quantile effects are differences of generalized-inverse quantiles between
the observed treated CDF and the counterfactual CDF.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .data_model import CovariateCell, PanelData, RcsData
from .empirical import SortedSample, StepDistribution, rank_transform

__all__ = [
    "PanelCell",
    "RcsCell",
    "CounterfactualResult",
    "CqttProcess",
    "counterfactual_cdf_panel",
    "counterfactual_cdf_rcs",
    "cqtt",
    "unconditional_qtt",
    "cic_qtt",
    "estimate_process",
    "extract_cell",
    "treated_shares",
]


@dataclass(frozen=True)
class PanelCell:
    """Per-cell samples from panel data, with cached sort layouts for refits."""

    code: tuple[int, ...]
    control_y_pre: np.ndarray
    control_dy: np.ndarray
    treated_y_pre: np.ndarray
    treated_y_post: np.ndarray

    @classmethod
    def from_dataset(cls, data: PanelData, cell: CovariateCell) -> "PanelCell":
        c, t = cell.control_rows, cell.treated_rows
        return cls(
            code=cell.code,
            control_y_pre=data.y_pre[c],
            control_dy=data.y_post[c] - data.y_pre[c],
            treated_y_pre=data.y_pre[t],
            treated_y_post=data.y_post[t],
        )

    @property
    def n_control(self) -> int:
        return len(self.control_y_pre)

    @property
    def n_treated(self) -> int:
        return len(self.treated_y_pre)

    def arm_sizes(self) -> dict[str, int]:
        return {"control": self.n_control, "treated": self.n_treated}

    @cached_property
    def _control_pre(self) -> SortedSample:
        return SortedSample(self.control_y_pre)

    @cached_property
    def _control_post(self) -> SortedSample:
        return SortedSample(self.control_y_pre + self.control_dy)

    @cached_property
    def _treated_pre(self) -> SortedSample:
        return SortedSample(self.treated_y_pre)

    @cached_property
    def _treated_post(self) -> SortedSample:
        return SortedSample(self.treated_y_post)


@dataclass(frozen=True)
class RcsCell:
    """Per-cell samples from repeated cross sections (four unlinked samples)."""

    code: tuple[int, ...]
    control_pre: np.ndarray
    control_post: np.ndarray
    treated_pre: np.ndarray
    treated_post: np.ndarray

    @classmethod
    def from_dataset(cls, data: RcsData, cell: CovariateCell) -> "RcsCell":
        c, t = cell.control_rows, cell.treated_rows
        pre_c = c[data.period[c] == 0]
        post_c = c[data.period[c] == 1]
        pre_t = t[data.period[t] == 0]
        post_t = t[data.period[t] == 1]
        return cls(
            code=cell.code,
            control_pre=data.y[pre_c],
            control_post=data.y[post_c],
            treated_pre=data.y[pre_t],
            treated_post=data.y[post_t],
        )

    @property
    def n_control(self) -> int:
        return len(self.control_pre) + len(self.control_post)

    @property
    def n_treated(self) -> int:
        return len(self.treated_pre) + len(self.treated_post)

    def arm_sizes(self) -> dict[str, int]:
        return {
            "control_pre": len(self.control_pre),
            "control_post": len(self.control_post),
            "treated_pre": len(self.treated_pre),
            "treated_post": len(self.treated_post),
        }

    @cached_property
    def _control_pre(self) -> SortedSample:
        return SortedSample(self.control_pre)

    @cached_property
    def _control_post(self) -> SortedSample:
        return SortedSample(self.control_post)

    @cached_property
    def _treated_pre(self) -> SortedSample:
        return SortedSample(self.treated_pre)

    @cached_property
    def _treated_post(self) -> SortedSample:
        return SortedSample(self.treated_post)


def extract_cell(data: PanelData | RcsData, cell: CovariateCell) -> "PanelCell | RcsCell":
    if isinstance(data, PanelData):
        return PanelCell.from_dataset(data, cell)
    return RcsCell.from_dataset(data, cell)


@dataclass(frozen=True)
class CounterfactualResult:
    """Estimated CDF pair for one cell: observed treated vs counterfactual."""

    code: tuple[int, ...]
    treated: StepDistribution
    counterfactual: StepDistribution
    transformed_outcomes: np.ndarray
    n_control: int
    n_treated: int


@dataclass(frozen=True)
class CqttProcess:
    """Quantile treatment effect on the treated, evaluated on a tau grid."""

    taus: np.ndarray
    values: np.ndarray
    code: tuple[int, ...]
    n_control: int
    n_treated: int
    n_total: int

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if taus.ndim != 1 or taus.size == 0:
            raise ValueError("tau grid must be a nonempty 1-d array")
        if not np.all((taus > 0.0) & (taus < 1.0)):
            raise ValueError("tau grid must lie strictly inside (0, 1)")
        if taus.size > 1 and not np.all(np.diff(taus) > 0):
            raise ValueError("tau grid must be strictly increasing")
        if values.shape != taus.shape or not np.all(np.isfinite(values)):
            raise ValueError("values must be finite, one per grid point")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)


def _weights_for(weights, *names):
    if weights is None:
        return (None,) * len(names)
    return tuple(weights[name] for name in names)


def counterfactual_cdf_panel(
    cell: PanelCell,
    weights: Mapping[str, np.ndarray] | None = None,
) -> CounterfactualResult:
    """Counterfactual CDF for the treated from panel control units.

    Each control unit contributes its observed change plus the treated-group
    pre-period value at its control-group pre-period rank. When bootstrap
    weights are supplied (keys "control", "treated"), the same weight vector
    enters every ECDF on its arm, inner rank maps included.
    """
    if cell.n_control == 0 or cell.n_treated == 0:
        raise ValueError(f"cell {cell.code}: both arms must be nonempty")
    w0, w1 = _weights_for(weights, "control", "treated")
    pre_control = cell._control_pre.fit(w0)
    pre_treated = cell._treated_pre.fit(w1)
    transformed = cell.control_dy + rank_transform(
        pre_control, pre_treated, cell.control_y_pre
    )
    return CounterfactualResult(
        code=cell.code,
        treated=cell._treated_post.fit(w1),
        counterfactual=StepDistribution.fit(transformed, w0),
        transformed_outcomes=transformed,
        n_control=cell.n_control,
        n_treated=cell.n_treated,
    )


def counterfactual_cdf_rcs(
    cell: RcsCell,
    weights: Mapping[str, np.ndarray] | None = None,
) -> CounterfactualResult:
    """Counterfactual CDF from repeated cross sections under rank invariance.

    The unobserved control-group change is recovered by mapping each control
    pre-period outcome to the control post-period value at the same rank.
    Weight keys: "control_pre", "control_post", "treated_pre", "treated_post".
    """
    sizes = cell.arm_sizes()
    if min(sizes.values()) == 0:
        raise ValueError(f"cell {cell.code}: all four samples must be nonempty")
    w_cpre, w_cpost, w_tpre, w_tpost = _weights_for(
        weights, "control_pre", "control_post", "treated_pre", "treated_post"
    )
    pre_control = cell._control_pre.fit(w_cpre)
    post_control = cell._control_post.fit(w_cpost)
    pre_treated = cell._treated_pre.fit(w_tpre)
    dy = rank_transform(pre_control, post_control, cell.control_pre) - cell.control_pre
    transformed = dy + rank_transform(pre_control, pre_treated, cell.control_pre)
    return CounterfactualResult(
        code=cell.code,
        treated=cell._treated_post.fit(w_tpost),
        counterfactual=StepDistribution.fit(transformed, w_cpre),
        transformed_outcomes=transformed,
        n_control=cell.n_control,
        n_treated=cell.n_treated,
    )


def cqtt(
    result: CounterfactualResult,
    tau_grid,
    n_total: int | None = None,
) -> CqttProcess:
    """Quantile difference between the treated and counterfactual CDFs."""
    taus = np.asarray(tau_grid, dtype=float)
    values = np.asarray(result.treated.quantile(taus)) - np.asarray(
        result.counterfactual.quantile(taus)
    )
    return CqttProcess(
        taus=taus,
        values=values,
        code=result.code,
        n_control=result.n_control,
        n_treated=result.n_treated,
        n_total=result.n_control + result.n_treated if n_total is None else n_total,
    )


def treated_shares(results: Sequence[CounterfactualResult]) -> np.ndarray:
    counts = np.array([r.n_treated for r in results], dtype=float)
    return counts / counts.sum()


def unconditional_qtt(
    results: Sequence[CounterfactualResult],
    shares,
    tau_grid,
    n_total: int | None = None,
) -> CqttProcess:
    """QTT on the whole treated population: share-weighted mixture of the
    per-cell CDFs, inverted with the same generalized inverse."""
    results = list(results)
    if not results:
        raise ValueError("need at least one cell")
    shares = np.asarray(shares, dtype=float)
    taus = np.asarray(tau_grid, dtype=float)
    mix_treated = StepDistribution.mixture([r.treated for r in results], shares)
    mix_counterfactual = StepDistribution.mixture(
        [r.counterfactual for r in results], shares
    )
    values = np.asarray(mix_treated.quantile(taus)) - np.asarray(
        mix_counterfactual.quantile(taus)
    )
    n_control = sum(r.n_control for r in results)
    n_treated = sum(r.n_treated for r in results)
    return CqttProcess(
        taus=taus,
        values=values,
        code=(),
        n_control=n_control,
        n_treated=n_treated,
        n_total=n_control + n_treated if n_total is None else n_total,
    )


def cic_qtt(
    control_pre,
    control_post,
    treated_pre,
    treated_post,
    tau_grid,
    weights: tuple | None = None,
    code: tuple[int, ...] = (),
    n_total: int | None = None,
) -> CqttProcess:
    """Changes-in-changes benchmark.

    The counterfactual distribution of treated post-period outcomes absent
    treatment is the treated pre-period CDF pulled through the control
    group's period map: each control post-period point y is sent back to the
    control pre-period value at its rank, and the counterfactual CDF at y is
    the treated pre-period CDF there. The effect at tau is the treated
    post-period quantile minus the generalized inverse of that composed CDF;
    quantile levels beyond its reach (support imbalance between groups) clip
    to the extreme control post-period points.
    """
    w = weights if weights is not None else (None, None, None, None)
    dists = []
    for sample, wv in zip((control_pre, control_post, treated_pre, treated_post), w):
        if isinstance(sample, SortedSample):
            dists.append(sample.fit(wv))
        else:
            dists.append(StepDistribution.fit(sample, wv))
    pre_c, post_c, pre_t, post_t = dists
    taus = np.asarray(tau_grid, dtype=float)

    keep = post_c.masses > 0
    support = post_c.support[keep]
    back = pre_c.quantile(post_c.cum_probs[keep])
    composed = np.asarray(pre_t.cdf(back))
    idx = np.minimum(np.searchsorted(composed, taus, side="left"), support.size - 1)
    values = np.asarray(post_t.quantile(taus)) - support[idx]

    n_control = len(control_pre) + len(control_post)
    n_treated = len(treated_pre) + len(treated_post)
    return CqttProcess(
        taus=taus,
        values=np.atleast_1d(values),
        code=code,
        n_control=n_control,
        n_treated=n_treated,
        n_total=n_control + n_treated if n_total is None else n_total,
    )


def _cic_from_cell(cell, tau_grid, weights, n_total):
    if isinstance(cell, PanelCell):
        w = None
        if weights is not None:
            w = (weights["control"], weights["control"], weights["treated"], weights["treated"])
        return cic_qtt(
            cell._control_pre,
            cell._control_post,
            cell._treated_pre,
            cell._treated_post,
            tau_grid,
            weights=w,
            code=cell.code,
            n_total=cell.n_control + cell.n_treated if n_total is None else n_total,
        )
    w = None
    if weights is not None:
        w = (
            weights["control_pre"],
            weights["control_post"],
            weights["treated_pre"],
            weights["treated_post"],
        )
    return cic_qtt(
        cell._control_pre,
        cell._control_post,
        cell._treated_pre,
        cell._treated_post,
        tau_grid,
        weights=w,
        code=cell.code,
        n_total=cell.n_control + cell.n_treated if n_total is None else n_total,
    )


def estimate_process(
    cell: PanelCell | RcsCell,
    tau_grid,
    estimator: str = "ddid",
    weights: Mapping[str, np.ndarray] | None = None,
    n_total: int | None = None,
) -> CqttProcess:
    """Evaluate one estimator on one cell, optionally under bootstrap weights."""
    if estimator == "ddid":
        if isinstance(cell, PanelCell):
            result = counterfactual_cdf_panel(cell, weights)
        else:
            result = counterfactual_cdf_rcs(cell, weights)
        return cqtt(result, tau_grid, n_total)
    if estimator == "cic":
        return _cic_from_cell(cell, tau_grid, weights, n_total)
    raise ValueError(f"unknown estimator {estimator!r} (expected 'ddid' or 'cic')")

"""Weighted empirical distributions and generalized-inverse quantiles.

Everything downstream (counterfactual construction, bootstrap, bands) is
built from the two primitives in this module: a right-continuous step CDF
fitted to a weighted sample, and its left-continuous generalized inverse
``inf { y : F(y) >= tau }``. No interpolation or smoothing anywhere.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["StepDistribution", "SortedSample", "rank_transform"]


class StepDistribution:
    """Step CDF over a finite, strictly increasing support.

    ``masses`` are unnormalized point masses; individual masses may be zero
    (a bootstrap draw can assign weight zero to an observation), and all
    evaluation routines treat zero-mass points as carrying no probability.
    The total mass must be positive.
    """

    __slots__ = ("support", "masses", "total", "cum_probs")

    def __init__(self, support, masses):
        support = np.asarray(support, dtype=float)
        masses = np.asarray(masses, dtype=float)
        if support.ndim != 1 or support.size == 0:
            raise ValueError("support must be a nonempty 1-d array")
        if masses.shape != support.shape:
            raise ValueError("masses must have the same shape as support")
        if support.size > 1 and not np.all(np.diff(support) > 0):
            raise ValueError("support must be strictly increasing")
        if not np.all(np.isfinite(support)):
            raise ValueError("support must be finite")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise ValueError("masses must be finite and non-negative")
        cum = np.cumsum(masses)
        total = float(cum[-1])
        if not total > 0:
            raise ValueError("total mass must be positive")
        self.support = support
        self.masses = masses
        self.total = total
        # last entry is total/total == 1.0 exactly
        self.cum_probs = cum / total

    @classmethod
    def fit(cls, values, weights=None) -> "StepDistribution":
        """Weighted ECDF: F(y) = sum_i w_i 1{v_i <= y} / sum_i w_i.

        Ties are merged by summing weights; points whose merged weight is
        zero are dropped. With ``weights=None`` every value has weight 1.
        """
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("need at least one value")
        support, inverse = np.unique(values, return_inverse=True)
        if weights is None:
            masses = np.bincount(inverse, minlength=support.size).astype(float)
        else:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != values.shape:
                raise ValueError("weights must have the same shape as values")
            if np.any(weights < 0):
                raise ValueError("weights must be non-negative")
            masses = np.bincount(inverse, weights=weights, minlength=support.size)
            keep = masses > 0
            if not keep.any():
                raise ValueError("weights sum to zero")
            support, masses = support[keep], masses[keep]
        return cls(support, masses)

    @classmethod
    def mixture(cls, components, shares) -> "StepDistribution":
        """Share-weighted mixture of step CDFs on the merged support."""
        components = list(components)
        shares = np.asarray(shares, dtype=float)
        if not components:
            raise ValueError("mixture of zero components")
        if shares.shape != (len(components),) or np.any(shares < 0):
            raise ValueError("one non-negative share per component required")
        if not math.isclose(float(shares.sum()), 1.0, abs_tol=1e-8):
            raise ValueError("shares must sum to 1")
        if len(components) == 1:
            # exact: a one-component mixture is the component itself
            return components[0]
        points = np.concatenate([c.support for c in components])
        probs = np.concatenate(
            [s * (c.masses / c.total) for s, c in zip(shares, components)]
        )
        return cls.fit(points, probs)

    @property
    def n_points(self) -> int:
        return self.support.size

    def cdf(self, y):
        """Right-continuous evaluation; 0 below the support, 1 above."""
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.support, y, side="right")
        out = np.where(idx > 0, self.cum_probs[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, tau):
        """Generalized inverse inf { y : F(y) >= tau } for tau in (0, 1]."""
        tau = np.asarray(tau, dtype=float)
        if not np.all((tau > 0.0) & (tau <= 1.0)):
            raise ValueError("quantile level must lie in (0, 1]")
        idx = np.searchsorted(self.cum_probs, tau, side="left")
        out = self.support[idx]
        return float(out) if out.ndim == 0 else out

    def min_support(self) -> float:
        """Smallest support point carrying positive mass."""
        return float(self.support[np.searchsorted(self.cum_probs, 0.0, side="right")])

    def max_support(self) -> float:
        return float(self.support[-1])

    def __repr__(self) -> str:  # pragma: no cover
        return f"StepDistribution({self.n_points} points on [{self.support[0]}, {self.support[-1]}])"


class SortedSample:
    """Sort/tie layout of a sample, precomputed once and refit many times.

    Bootstrap draws reweight the same observations thousands of times; the
    support and tie structure never change, so ``fit`` here skips sorting.
    Zero-weight points are kept in the layout (harmless for evaluation).
    """

    __slots__ = ("values", "support", "inverse")

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("need at least one value")
        self.values = values
        self.support, self.inverse = np.unique(values, return_inverse=True)

    def __len__(self) -> int:
        return self.values.size

    def fit(self, weights=None) -> StepDistribution:
        if weights is None:
            masses = np.bincount(self.inverse, minlength=self.support.size).astype(float)
        else:
            weights = np.asarray(weights, dtype=float)
            masses = np.bincount(self.inverse, weights=weights, minlength=self.support.size)
        return StepDistribution(self.support, masses)


def rank_transform(source: StepDistribution, target: StepDistribution, y):
    """Map y to the target point at the same rank: quantile_target(cdf_source(y)).

    A value strictly below the source support has rank 0; it is clamped to
    the smallest positive-mass point of the target so the output stays on
    the target support (rank 0 only arises from sampling noise under a
    common-support design).
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    u = np.atleast_1d(np.asarray(source.cdf(y), dtype=float))
    out = np.empty(u.shape, dtype=float)
    pos = u > 0.0
    if pos.any():
        out[pos] = target.quantile(u[pos])
    if not pos.all():
        out[~pos] = target.min_support()
    return float(out[0]) if scalar else out

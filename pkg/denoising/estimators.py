"""TSVD, ReFACTor, ReFACTor+, ReFACTor*, JL and JL*.

All estimators start from the rank-``r`` truncated SVD of the data and
differ in how they score columns and what they return on the kept ones:

* ReFACTor / ReFACTor+ / JL mask the TSVD ``Xhat_r`` to the ``t`` best
  columns, scoring by ``<[Xhat_r]_j, [Y]_j>``, its correlation form, or
  ``||[Y]_j||^2``.
* ReFACTor* / JL* zero the other columns of ``Y`` itself and take the TSVD
  of that masked matrix.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matcore
from .exceptions import InvalidArgumentError
from .matcore import DenseMatrix, SVDFactors, Vector

logger = logging.getLogger(__name__)

# Below this a column norm is treated as zero when forming correlations.
ZERO_NORM = 1e-300


class Variant(str, enum.Enum):
    TSVD = "tsvd"
    REFACTOR = "refactor"
    REFACTOR_PLUS = "refactor_plus"
    REFACTOR_STAR = "refactor_star"
    JL = "jl"
    JL_STAR = "jl_star"

    @property
    def selects_columns(self):
        return self is not Variant.TSVD

    @property
    def is_star(self):
        return self in (Variant.REFACTOR_STAR, Variant.JL_STAR)

    @property
    def table_label(self):
        """Column stem used in plot tables (``<label>`` and ``<label>_std``)."""
        return TABLE_LABELS[self]


TABLE_LABELS = {
    Variant.TSVD: "tsvd_mse",
    Variant.REFACTOR: "refactor_mse",
    Variant.REFACTOR_PLUS: "refactor_mse_corr",
    Variant.REFACTOR_STAR: "refactor_mse_full",
    Variant.JL: "JL_mse",
    Variant.JL_STAR: "JL_mse_full",
}


class Statistic(str, enum.Enum):
    REFACTOR = "refactor"
    CORRELATION = "correlation"
    COLUMN_NORM = "column_norm"


@dataclass(frozen=True)
class EstimatorConfig:
    variant: Variant
    r: int
    t: int = 0
    # Statistic that drives ReFACTor* selection: c_j, or c+_j when CORRELATION.
    star_statistic: Statistic = Statistic.REFACTOR

    def validate(self, shape):
        m, n = shape
        if not 1 <= self.r <= min(m, n):
            raise InvalidArgumentError(f"r={self.r} must lie in [1, {min(m, n)}]")
        if self.variant.selects_columns and not 0 <= self.t <= n:
            raise InvalidArgumentError(f"t={self.t} must lie in [0, {n}]")
        if self.variant.is_star and self.t < 1:
            raise InvalidArgumentError(f"{self.variant.value} needs t >= 1")


@dataclass(frozen=True)
class SelectionResult:
    """Column scores, their ordering by decreasing magnitude and the kept prefix.

    Indices are 0-based.
    """

    statistic: Vector
    permutation: np.ndarray
    retained: np.ndarray

    @property
    def t(self):
        return int(self.retained.shape[0])

    def mask(self):
        keep = np.zeros(self.statistic.shape[0], dtype=bool)
        keep[self.retained] = True
        return keep


@dataclass(frozen=True)
class DenoiseResult:
    estimate: DenseMatrix
    factors_used: SVDFactors
    selection: Optional[SelectionResult] = field(default=None)


def refactor_statistics(Y, Xhat_r):
    """``c_j = <[Xhat_r]_j, [Y]_j>`` for every column."""
    return matcore.column_inners(Xhat_r, Y)


def refactor_plus_statistics(Y, Xhat_r):
    """Column correlations ``c+_j``; zero where either column vanishes."""
    Y = matcore.as_matrix(Y, "Y")
    Xhat_r = matcore.as_matrix(Xhat_r, "Xhat_r")
    if Xhat_r.shape != Y.shape:
        raise InvalidArgumentError(f"shape mismatch: {Xhat_r.shape} vs {Y.shape}")
    xhat_norms = matcore.column_norms(Xhat_r)
    y_norms = matcore.column_norms(Y)
    keep = (xhat_norms >= ZERO_NORM) & (y_norms >= ZERO_NORM)
    out = np.zeros(Y.shape[1], dtype=np.float64)
    # Normalise before multiplying; the product of two small norms underflows.
    out[keep] = np.einsum("ij,ij->j", Xhat_r[:, keep] / xhat_norms[keep], Y[:, keep] / y_norms[keep])
    return out


def jl_statistics(Y):
    """Johnstone–Lu column energies ``||[Y]_j||^2``."""
    Y = matcore.as_matrix(Y, "Y")
    return np.einsum("ij,ij->j", Y, Y)


def select_columns(statistics, t):
    """Keep the ``t`` columns with the largest ``|statistic|``.

    Ties go to the lower column index (stable sort), so the choice is
    deterministic even for repeated values.
    """
    statistics = np.asarray(statistics, dtype=np.float64)
    n = statistics.shape[0]
    if not 0 <= t <= n:
        raise InvalidArgumentError(f"t={t} must lie in [0, {n}]")
    permutation = np.argsort(-np.abs(statistics), kind="stable")
    return SelectionResult(
        statistic=statistics,
        permutation=permutation,
        retained=np.sort(permutation[:t]),
    )


def _mask_columns(A, selection):
    out = np.zeros_like(A)
    out[:, selection.retained] = A[:, selection.retained]
    return out


def _first_pass(Y, r, factors):
    if factors is None:
        factors = matcore.svd(Y)
    return factors, matcore.truncate(factors, r)


def estimate_tsvd(Y, r, factors=None):
    Y = matcore.as_matrix(Y, "Y")
    EstimatorConfig(Variant.TSVD, r).validate(Y.shape)
    factors, Xhat = _first_pass(Y, r, factors)
    return DenoiseResult(estimate=Xhat, factors_used=factors)


def estimate_refactor(Y, r, t, variant=Variant.REFACTOR, factors=None):
    """Mask the TSVD to the ``t`` columns ranked first by ``variant``'s statistic.

    ``Variant.JL`` is accepted too: it ranks by column energy of ``Y``.
    ``factors`` may carry a precomputed :func:`matcore.svd` of ``Y``.
    """
    Y = matcore.as_matrix(Y, "Y")
    variant = Variant(variant)
    if variant not in (Variant.REFACTOR, Variant.REFACTOR_PLUS, Variant.JL):
        raise InvalidArgumentError(f"estimate_refactor does not handle {variant.value}")
    EstimatorConfig(variant, r, t).validate(Y.shape)
    factors, Xhat = _first_pass(Y, r, factors)
    if variant is Variant.REFACTOR:
        statistic = refactor_statistics(Y, Xhat)
    elif variant is Variant.REFACTOR_PLUS:
        statistic = refactor_plus_statistics(Y, Xhat)
    else:
        statistic = jl_statistics(Y)
    selection = select_columns(statistic, t)
    return DenoiseResult(estimate=_mask_columns(Xhat, selection), factors_used=factors, selection=selection)


def estimate_star(Y, r, t, variant=Variant.REFACTOR_STAR, factors=None, star_statistic=Statistic.REFACTOR):
    """TSVD of ``Y`` with every column outside the selected ``t`` set to zero."""
    Y = matcore.as_matrix(Y, "Y")
    variant = Variant(variant)
    if not variant.is_star:
        raise InvalidArgumentError(f"estimate_star does not handle {variant.value}")
    EstimatorConfig(variant, r, t, Statistic(star_statistic)).validate(Y.shape)

    if variant is Variant.JL_STAR:
        statistic = jl_statistics(Y)
    else:
        factors, Xhat = _first_pass(Y, r, factors)
        if Statistic(star_statistic) is Statistic.CORRELATION:
            statistic = refactor_plus_statistics(Y, Xhat)
        else:
            statistic = refactor_statistics(Y, Xhat)
    selection = select_columns(statistic, t)

    masked = _mask_columns(Y, selection)
    masked_factors = matcore.svd(masked)
    logger.debug("%s kept %d of %d columns", variant.value, t, Y.shape[1])
    return DenoiseResult(
        estimate=matcore.truncate(masked_factors, r),
        factors_used=masked_factors,
        selection=selection,
    )


def denoise(Y, config, factors=None):
    """Run the estimator named by ``config`` on ``Y``."""
    variant = Variant(config.variant)
    if variant is Variant.TSVD:
        return estimate_tsvd(Y, config.r, factors=factors)
    if variant.is_star:
        return estimate_star(Y, config.r, config.t, variant, factors=factors, star_statistic=config.star_statistic)
    return estimate_refactor(Y, config.r, config.t, variant, factors=factors)

"""Confounder removal followed by per-column logistic association tests.

The confounder direction is the leading left singular vector of an
estimator's output. It is projected out of every column of the data, each
adjusted column is regressed against a binary phenotype, and the Wald
p-values are summarised as QQ data and an inflation factor.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats

from . import matcore, synth
from .estimators import EstimatorConfig, Variant, denoise
from .exceptions import (
    DegenerateDesignError,
    InvalidArgumentError,
    NumericalFailureError,
    SeparationError,
)
from .signals import association_completed
from .utils.seeding import BACKGROUND_STREAM, NOISE_STREAM, PHENOTYPE_STREAM, SIGNAL_STREAM, child_seed, make_rng

logger = logging.getLogger(__name__)

MAX_ITER = 50
TOLERANCE = 1e-10
# Divergence sentinel on the slope per standard deviation of the covariate.
SEPARATION_LIMIT = 20.0
CHUNK = 1024

MEDIAN_CHI2 = stats.chi2.ppf(0.5, df=1)


@dataclass(frozen=True)
class Phenotype:
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or not np.all((labels == 0) | (labels == 1)):
            raise InvalidArgumentError("phenotype labels must be a 1-D vector of 0/1 values")
        if labels.min() == labels.max():
            raise InvalidArgumentError("phenotype needs both classes present")
        object.__setattr__(self, "labels", labels.astype(np.float64))

    def __len__(self):
        return self.labels.shape[0]


@dataclass(frozen=True)
class WaldFit:
    coefficient: float
    std_error: float
    z: float
    p_value: float


@dataclass(frozen=True)
class AssociationResult:
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_scores: np.ndarray
    p_values: np.ndarray
    observed: np.ndarray
    expected: np.ndarray

    @property
    def inflation(self):
        return inflation_factor(self.p_values)


def deflate(Y, direction):
    """Remove from every column of ``Y`` its projection on ``direction``."""
    Y = matcore.as_matrix(Y, "Y")
    d = np.asarray(direction, dtype=np.float64)
    if d.shape != (Y.shape[0],):
        raise InvalidArgumentError(f"direction must have length {Y.shape[0]}, got shape {d.shape}")
    if abs(np.linalg.norm(d) - 1.0) > 1e-8:
        raise InvalidArgumentError(f"direction must have unit norm, got {np.linalg.norm(d):.3g}")
    return Y - np.outer(d, d @ Y)


def _log_likelihood(y, eta):
    return np.sum(y[:, None] * eta - np.logaddexp(0.0, eta), axis=0)


def _fit_block(columns, y, offset, max_iter, tol):
    """Newton–Raphson (IRLS) for intercept + slope on each column of ``columns``."""
    mean = columns.mean(axis=0)
    scale = columns.std(axis=0)
    degenerate = scale <= 1e-12 * np.maximum(1.0, np.abs(mean))
    if np.any(degenerate):
        j = int(np.flatnonzero(degenerate)[0]) + offset
        raise DegenerateDesignError(f"column {j} is constant; the slope is not identifiable")
    z = (columns - mean) / scale

    k = columns.shape[1]
    b0 = np.zeros(k)
    b1 = np.zeros(k)
    ll = _log_likelihood(y, np.zeros_like(z))
    active = np.ones(k, dtype=bool)

    for iteration in range(1, max_iter + 1):
        zi = z[:, active]
        eta = b0[active] + zi * b1[active]
        p = special.expit(eta)
        w = p * (1.0 - p)
        resid = y[:, None] - p
        g0 = resid.sum(axis=0)
        g1 = (zi * resid).sum(axis=0)
        h00 = w.sum(axis=0)
        h01 = (w * zi).sum(axis=0)
        h11 = (w * zi * zi).sum(axis=0)
        det = h00 * h11 - h01 * h01

        b0[active] += np.divide(h11 * g0 - h01 * g1, det, out=np.full_like(det, np.inf), where=det > 0)
        b1[active] += np.divide(h00 * g1 - h01 * g0, det, out=np.full_like(det, np.inf), where=det > 0)

        diverged = ~np.isfinite(b1) | (np.abs(b1) > SEPARATION_LIMIT)
        if np.any(diverged):
            j = int(np.flatnonzero(diverged)[0]) + offset
            raise SeparationError(f"column {j}: logistic slope diverges (complete separation)", column=j)

        ll_new = _log_likelihood(y, b0[active] + zi * b1[active])
        converged = np.abs(ll_new - ll[active]) <= tol * np.maximum(np.abs(ll_new), 1e-300)
        ll[active] = ll_new
        idx = np.flatnonzero(active)
        active[idx[converged]] = False
        if not np.any(active):
            logger.debug("IRLS converged for %d columns in %d iterations", k, iteration)
            break
    else:
        j = int(np.flatnonzero(active)[0]) + offset
        raise NumericalFailureError(f"column {j}: IRLS did not converge in {max_iter} iterations")

    eta = b0 + z * b1
    p = special.expit(eta)
    w = p * (1.0 - p)
    h00 = w.sum(axis=0)
    h01 = (w * z).sum(axis=0)
    h11 = (w * z * z).sum(axis=0)
    se_std = np.sqrt(h00 / (h00 * h11 - h01 * h01))

    z_scores = b1 / se_std
    p_values = np.clip(2.0 * stats.norm.sf(np.abs(z_scores)), np.finfo(np.float64).tiny, 1.0)
    return b1 / scale, se_std / scale, z_scores, p_values


def fit_columns(columns, phenotype, workers=1, max_iter=MAX_ITER, tol=TOLERANCE):
    """Wald tests of every column of ``columns`` against ``phenotype``.

    Columns are fitted in blocks; with ``workers > 1`` the blocks run on a
    thread pool and are reassembled in column order.
    Returns ``(coefficients, std_errors, z_scores, p_values)``.
    """
    columns = matcore.as_matrix(columns, "columns")
    if columns.shape[0] != len(phenotype):
        raise InvalidArgumentError(f"{columns.shape[0]} rows but {len(phenotype)} phenotype labels")
    y = phenotype.labels
    starts = range(0, columns.shape[1], CHUNK)

    def fit(start):
        return _fit_block(columns[:, start:start + CHUNK], y, start, max_iter, tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(fit, starts))
    else:
        blocks = [fit(start) for start in starts]
    return tuple(np.concatenate(parts) for parts in zip(*blocks))


def logistic_wald(column, phenotype):
    """Intercept + slope logistic regression of ``phenotype`` on ``column``."""
    column = np.asarray(column, dtype=np.float64).reshape(-1, 1)
    coefficient, std_error, z, p_value = fit_columns(column, phenotype)
    return WaldFit(float(coefficient[0]), float(std_error[0]), float(z[0]), float(p_value[0]))


def qq_quantiles(p_values):
    """Sorted observed and expected ``-log10 p``, both increasing.

    Expected values use the ``(i - 0.5) / n`` plotting positions.
    """
    p = np.asarray(p_values, dtype=np.float64)
    n = p.shape[0]
    observed = np.sort(-np.log10(p))
    expected = -np.log10((np.arange(n, 0, -1) - 0.5) / n)
    return observed, expected


def inflation_factor(p_values):
    """Median observed 1-df chi-square over its null median."""
    chi2 = stats.chi2.isf(np.asarray(p_values, dtype=np.float64), df=1)
    return float(np.median(chi2) / MEDIAN_CHI2)


def confounder_direction(Y, config):
    """Leading left singular vector of ``config``'s estimate of ``Y``."""
    if config.r != 1:
        raise InvalidArgumentError(f"the association pipeline assumes r = 1, got r={config.r}")
    result = denoise(Y, config)
    if Variant(config.variant) is Variant.TSVD or Variant(config.variant).is_star:
        # The estimate is the rank-one truncation of these factors.
        return result.factors_used.left_vectors[:, 0]
    return matcore.svd(result.estimate).left_vectors[:, 0]


def run_pipeline(Y, phenotype, estimator_config, workers=1):
    """Deflate ``Y`` by the estimated confounder and test every column.

    ``estimator_config=None`` skips the deflation (the unadjusted arm).
    """
    Y = matcore.as_matrix(Y, "Y")
    if estimator_config is not None:
        Y = deflate(Y, confounder_direction(Y, estimator_config))
    coefficients, std_errors, z_scores, p_values = fit_columns(Y, phenotype, workers=workers)
    observed, expected = qq_quantiles(p_values)
    result = AssociationResult(
        coefficients=coefficients,
        std_errors=std_errors,
        z_scores=z_scores,
        p_values=p_values,
        observed=observed,
        expected=expected,
    )
    method = Variant(estimator_config.variant).value if estimator_config is not None else "unadjusted"
    association_completed.send(sender=AssociationResult, method=method, result=result)
    return result


@dataclass(frozen=True)
class AssocScenario:
    """Synthetic stand-in for a methylation study.

    A sparse rank-one confounder (``x``, active on ``t`` of ``n`` sites) drives
    the phenotype through its left vector. An optional dense background
    component of strength ``background`` has a left vector whose cosine with
    the confounder's is ``overlap``.
    """

    m: int = 800
    n: int = 4000
    t: int = 200
    x: float = 6.0
    background: float = 6.0
    overlap: float = 0.5
    effect: float = 3.0
    sigma: float = 1.0
    null: bool = False

    def __post_init__(self):
        if not 1 <= self.t <= self.n or self.m < 2:
            raise InvalidArgumentError(f"need m >= 2 and 1 <= t <= n, got m={self.m} n={self.n} t={self.t}")
        if not 0.0 <= self.overlap <= 1.0:
            raise InvalidArgumentError(f"overlap must lie in [0, 1], got {self.overlap}")
        if self.x <= 0 or self.background < 0 or self.sigma < 0:
            raise InvalidArgumentError("x must be positive; background and sigma non-negative")

    @property
    def estimator_configs(self):
        return {
            "refactor": EstimatorConfig(Variant.REFACTOR_STAR, r=1, t=self.t),
            "tsvd": EstimatorConfig(Variant.TSVD, r=1),
            "jl": EstimatorConfig(Variant.JL_STAR, r=1, t=self.t),
        }


@dataclass(frozen=True)
class ScenarioData:
    Y: np.ndarray
    X: np.ndarray
    phenotype: Phenotype
    confounder: synth.SignalModel
    background_left: Optional[np.ndarray] = None


def _unit_orthogonal(rng, size, against):
    vec = rng.standard_normal(size)
    vec -= against * np.dot(against, vec)
    return vec / np.linalg.norm(vec)


def make_scenario(scenario, seed=0):
    """Draw data and phenotype for ``scenario``; a pure function of ``seed``."""
    confounder = synth.make_signal(
        scenario.m, scenario.n, 1, scenario.t, scenario.x, synth.SupportStyle.FLAT,
        seed=child_seed(seed, SIGNAL_STREAM),
    )
    X = confounder.signal_matrix()
    a1 = confounder.left_vectors[:, 0]

    background_left = None
    if scenario.background > 0:
        rng = make_rng(child_seed(seed, BACKGROUND_STREAM))
        a_perp = _unit_orthogonal(rng, scenario.m, a1)
        background_left = scenario.overlap * a1 + np.sqrt(1.0 - scenario.overlap ** 2) * a_perp
        b2 = _unit_orthogonal(rng, scenario.n, confounder.right_vectors[:, 0])
        X = X + scenario.background * np.outer(background_left, b2)

    noise = synth.make_noise(
        scenario.m, scenario.n, synth.NoiseSpec(sigma=scenario.sigma), seed=child_seed(seed, NOISE_STREAM),
    )
    rng = make_rng(child_seed(seed, PHENOTYPE_STREAM))
    if scenario.null:
        prob = np.full(scenario.m, 0.5)
    else:
        score = (a1 - a1.mean()) / a1.std()
        prob = special.expit(scenario.effect * score)
    labels = (rng.random(scenario.m) < prob).astype(np.int64)
    return ScenarioData(
        Y=X + noise,
        X=X,
        phenotype=Phenotype(labels),
        confounder=confounder,
        background_left=background_left,
    )


def compare_methods(data, scenario, workers=1):
    """Run the three deflation arms and the unadjusted arm on one dataset."""
    results = {
        name: run_pipeline(data.Y, data.phenotype, config, workers=workers)
        for name, config in scenario.estimator_configs.items()
    }
    results["unadjusted"] = run_pipeline(data.Y, data.phenotype, None, workers=workers)
    return results


def qq_rows(results, order=("refactor", "tsvd", "jl")):
    """Rows ``exp, <method>...`` for the QQ plot table."""
    expected = results[order[0]].expected
    columns = [expected] + [results[name].observed for name in order]
    return [list(values) for values in zip(*columns)]

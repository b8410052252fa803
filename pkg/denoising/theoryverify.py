"""Metrics and Monte Carlo checks of the rank-one guarantees.

The guarantees hold "with high probability", which is read here as an
empirical frequency over independent seeds. Each seed draws a fresh signal
and noise matrix, evaluates one inequality and records its margin.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import matcore, synth
from .estimators import Variant, estimate_refactor
from .exceptions import InvalidArgumentError, PreconditionError
from .signals import verification_completed

logger = logging.getLogger(__name__)

THEOREMS = ("T1", "T2", "T3", "L_inactive", "L_active", "L_cosine", "L_sinval")

# T2's bound is reported with its margin, never asserted.
NOT_ASSERTED = frozenset({"T2"})

# Conclusions that need x above the weak-signal threshold.
NEEDS_STRONG_SIGNAL = frozenset({"T1", "T2", "T3", "L_cosine"})


@dataclass(frozen=True)
class AlignmentStats:
    c: float
    s: float
    y_lead: float
    x_lead: float


@dataclass(frozen=True)
class SupportConfusion:
    true_pos: int
    false_neg: int
    false_pos: int
    true_neg: int

    @property
    def selected(self):
        return self.true_pos + self.false_pos

    @property
    def perfect(self):
        return self.false_pos == 0 and self.false_neg == 0


@dataclass(frozen=True)
class ThresholdReport:
    beta: float
    weak_signal_threshold: float
    bbp_threshold: float
    b_threshold: float
    sparsity_bound: float
    condition_met: dict = field(default_factory=dict)


def mse(estimate, truth):
    """Frobenius loss ``||estimate - truth||_F^2``."""
    estimate = matcore.as_matrix(estimate, "estimate")
    truth = matcore.as_matrix(truth, "truth")
    if estimate.shape != truth.shape:
        raise InvalidArgumentError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    diff = estimate - truth
    return float(np.sum(diff * diff))


def relative_improvement(mse_tsvd, mse_rf, signal_norm_sq):
    if not signal_norm_sq > 0:
        raise InvalidArgumentError("relative improvement needs a non-zero signal")
    return (mse_tsvd - mse_rf) / signal_norm_sq


def alignment(factors, model):
    """Cosine and sine between the leading data and signal right vectors.

    ``v`` is flipped when needed so that ``c >= 0``.
    """
    if model.r != 1:
        raise InvalidArgumentError(f"alignment is defined for rank-one signals, got r={model.r}")
    y, _, v = factors.leading()
    b = model.right_vectors[:, 0]
    c = float(np.dot(v, b))
    if c < 0:
        v, c = -v, -c
    s = float(np.linalg.norm(v - c * b))
    return AlignmentStats(c=c, s=s, y_lead=float(y), x_lead=float(model.singular_values[0]))


def confusion(selection, model):
    active = np.zeros(model.n, dtype=bool)
    active[model.active_set] = True
    chosen = selection.mask()
    return SupportConfusion(
        true_pos=int(np.sum(active & chosen)),
        false_neg=int(np.sum(active & ~chosen)),
        false_pos=int(np.sum(~active & chosen)),
        true_neg=int(np.sum(~active & ~chosen)),
    )


def mse_gain_by_set(rf_estimate, tsvd_estimate, truth, selection, model):
    """Column-wise MSE change of ReFACTor against TSVD over each confusion set.

    Negative values are improvements. Kept columns coincide with the TSVD, so
    the two "selected" sets always contribute exactly zero.
    """
    per_column = (
        np.sum((rf_estimate - truth) ** 2, axis=0)
        - np.sum((tsvd_estimate - truth) ** 2, axis=0)
    )
    active = np.zeros(model.n, dtype=bool)
    active[model.active_set] = True
    chosen = selection.mask()
    return {
        "true_pos": math.fsum(per_column[active & chosen]),
        "false_neg": math.fsum(per_column[active & ~chosen]),
        "false_pos": math.fsum(per_column[~active & chosen]),
        "true_neg": math.fsum(per_column[~active & ~chosen]),
    }


def thresholds(m, n, x, t, b_entries=None, C=64.0, C0=0.05):
    """Threshold values and precondition flags for an ``m x n`` rank-one problem.

    ``x`` is the signal singular value in units of the noise level. The
    ``b_entries`` condition is evaluated on the active entries only, and is
    ``None`` when no entries are given.
    """
    if m < 1 or n < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got m={m} n={n}")
    beta = m / n
    weak = math.sqrt(1.0 + 2.0 * math.sqrt(beta))
    log_n = math.log(n)
    b_threshold = C * log_n / n
    sparsity_bound = C0 * n / log_n if n > 1 else math.inf

    strong = x > weak
    if b_entries is None:
        b_ok = None
    else:
        b = np.asarray(b_entries, dtype=np.float64)
        b = b[b != 0]
        b_ok = bool(b.size > 0 and np.min(b ** 2) > b_threshold)
    sparse_ok = t <= sparsity_bound
    return ThresholdReport(
        beta=beta,
        weak_signal_threshold=weak,
        bbp_threshold=beta ** -0.25,
        b_threshold=b_threshold,
        sparsity_bound=sparsity_bound,
        condition_met={
            "T1": bool(strong and b_ok),
            "T2": bool(strong and b_ok),
            "T3": bool(strong and sparse_ok),
            "L_inactive": True,
            "L_active": bool(b_ok),
            "L_cosine": bool(strong),
            "L_sinval": True,
            "x_above_weak_signal": bool(strong),
            "b_entries_above_C_log_n_over_n": b_ok,
            "t_below_C0_n_over_log_n": bool(sparse_ok),
        },
    )


@dataclass(frozen=True)
class TheoremParams:
    m: int = 200
    n: int = 200
    x: float = 4.0
    t: int = 50
    noise: synth.NoiseSpec = synth.NoiseSpec()
    support_style: synth.SupportStyle = synth.SupportStyle.FLAT
    variant: Variant = Variant.REFACTOR
    C: float = 64.0
    C0: float = 0.05
    alpha: float = 4.0
    epsilon: float = 0.1

    @property
    def effective_x(self):
        """Signal strength in noise units; infinite for noiseless data."""
        return self.x / self.noise.sigma if self.noise.sigma > 0 else math.inf


# Sparsity used when a theorem is run without an explicit t.
DEFAULT_T = {
    "T1": 50,
    "T2": 50,
    "T3": 10,
    "L_inactive": 10,
    "L_active": 10,
    "L_cosine": 50,
    "L_sinval": 50,
}


def default_params(theorem_id, **overrides):
    overrides.setdefault("t", DEFAULT_T[theorem_id])
    return TheoremParams(**overrides)


@dataclass
class VerificationReport:
    theorem_id: str
    params: TheoremParams
    threshold_report: ThresholdReport
    rows: list
    min_frequency: float

    @property
    def asserted(self):
        return self.theorem_id not in NOT_ASSERTED

    @property
    def successes(self):
        return sum(1 for row in self.rows if row["passed"])

    @property
    def frequency(self):
        return self.successes / len(self.rows)

    @property
    def mean_margin(self):
        return math.fsum(row["margin"] for row in self.rows) / len(self.rows)

    @property
    def succeeded(self):
        return not self.asserted or self.frequency >= self.min_frequency

    @property
    def header(self):
        return list(self.rows[0].keys())


def _flat_b_entries(params):
    if params.support_style is synth.SupportStyle.FLAT:
        return np.full(params.t, 1.0 / math.sqrt(params.t))
    return None


def check_preconditions(theorem_id, params, strict=False):
    """Return the threshold report, raising when a precondition fails.

    ``x/sigma > sqrt(1 + 2 sqrt(beta))`` is always enforced where the
    conclusion needs it. The conditions involving the unspecified constants
    ``C`` and ``C0`` are enforced only when ``strict`` is set.
    """
    if theorem_id not in THEOREMS:
        raise InvalidArgumentError(f"unknown theorem {theorem_id!r}; expected one of {', '.join(THEOREMS)}")
    if not 1 <= params.t <= params.n:
        raise InvalidArgumentError(f"t={params.t} must lie in [1, {params.n}]")
    if params.variant not in (Variant.REFACTOR, Variant.REFACTOR_PLUS):
        raise InvalidArgumentError(f"theorems are checked for refactor or refactor_plus, not {params.variant.value}")

    report = thresholds(
        params.m, params.n, params.effective_x, params.t,
        b_entries=_flat_b_entries(params), C=params.C, C0=params.C0,
    )
    if theorem_id in NEEDS_STRONG_SIGNAL and not report.condition_met["x_above_weak_signal"]:
        raise PreconditionError(
            f"x/sigma > sqrt(1 + 2 sqrt(beta)) = {report.weak_signal_threshold:.4f}",
            f"precondition violated: x/sigma > sqrt(1 + 2 sqrt(beta)) = {report.weak_signal_threshold:.4f} "
            f"does not hold for x/sigma = {params.effective_x:.4g} (beta = {report.beta:.4g})",
        )
    if strict:
        if theorem_id in ("T1", "T2", "L_active") and not report.condition_met["b_entries_above_C_log_n_over_n"]:
            raise PreconditionError(f"b_j^2 > C log n / n = {report.b_threshold:.4g} on every active column")
        if theorem_id == "T3" and not report.condition_met["t_below_C0_n_over_log_n"]:
            raise PreconditionError(f"t <= C0 n / log n = {report.sparsity_bound:.4g}")
    return report


def _replicate(theorem_id, params, seed):
    model, Y, X = synth.draw_replicate(
        params.m, params.n, 1, params.t, params.x, params.noise, seed,
        support_style=params.support_style,
    )
    factors = matcore.svd(Y)
    row = {"seed": seed}

    if theorem_id in ("T1", "T2", "T3"):
        tsvd = matcore.truncate(factors, 1)
        rf = estimate_refactor(Y, 1, params.t, params.variant, factors=factors)
        mse_tsvd = mse(tsvd, X)
        mse_rf = mse(rf.estimate, X)
        counts = confusion(rf.selection, model)
        row.update(mse_tsvd=mse_tsvd, mse_rf=mse_rf, true_pos=counts.true_pos, false_pos=counts.false_pos)
        if theorem_id == "T2":
            improvement = relative_improvement(mse_tsvd, mse_rf, model.frobenius_sq)
            bound = 1.0 - (params.t + math.log(params.n)) / params.n * (1.0 + params.epsilon)
            row.update(improvement=improvement, bound=bound, margin=improvement - bound)
        else:
            gains = mse_gain_by_set(rf.estimate, tsvd, X, rf.selection, model)
            row.update(gain_false_neg=gains["false_neg"], gain_true_neg=gains["true_neg"], margin=mse_tsvd - mse_rf)
        row["passed"] = row["margin"] >= 0
        return row

    stats = alignment(factors, model)
    row.update(c2=stats.c ** 2, s2=stats.s ** 2)
    if theorem_id == "L_cosine":
        row["margin"] = stats.c ** 2 - 0.5
    elif theorem_id == "L_sinval":
        row.update(y=stats.y_lead, x=stats.x_lead, margin=stats.y_lead - stats.x_lead)
    else:
        log_n = math.log(params.n)
        level = stats.s ** 2 * params.alpha ** 2 * log_n / params.n
        v2 = factors.right_vectors[:, 0] ** 2
        inactive = model.inactive_set()
        max_inactive = float(np.max(v2[inactive])) if inactive.size else 0.0
        min_active = float(np.min(v2[model.active_set]))
        row.update(level=level, max_inactive=max_inactive, min_active=min_active)
        if theorem_id == "L_inactive":
            row["margin"] = level - max_inactive
        else:
            b2 = model.right_vectors[model.active_set, 0] ** 2
            needed = 4.0 * level / stats.c ** 2 if stats.c > 0 else math.inf
            row.update(precondition=bool(np.min(b2) >= needed), margin=min_active - level)
    row["passed"] = row["margin"] >= 0
    return row


def verify_theorem(theorem_id, params=None, n_seeds=100, master_seed=0, threads=1, min_frequency=0.95, strict=False):
    """Evaluate one guarantee on ``n_seeds`` independent replicates.

    Replicate ``i`` uses seed ``master_seed + i``; rows come back in seed
    order whatever the thread count.
    """
    if params is None:
        params = default_params(theorem_id) if theorem_id in DEFAULT_T else TheoremParams()
    if n_seeds < 1:
        raise InvalidArgumentError("n_seeds must be at least 1")
    report = check_preconditions(theorem_id, params, strict=strict)

    seeds = [master_seed + i for i in range(n_seeds)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda seed: _replicate(theorem_id, params, seed), seeds))
    else:
        rows = [_replicate(theorem_id, params, seed) for seed in seeds]

    result = VerificationReport(
        theorem_id=theorem_id,
        params=params,
        threshold_report=report,
        rows=rows,
        min_frequency=min_frequency,
    )
    logger.info(
        "%s: %d/%d replicates passed (frequency %.3f)",
        theorem_id, result.successes, n_seeds, result.frequency,
    )
    verification_completed.send(sender=VerificationReport, report=result)
    return result

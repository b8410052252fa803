"""Column-sparse low-rank signals and noisy observations.

The signal is ``X = sum_i x_i a_i b_i^T`` with every ``b_i`` supported on the
same ``t`` active columns, and the data is ``Y = X + (sigma / sqrt(n)) Z``.
"""
import enum
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .utils.seeding import NOISE_STREAM, SIGNAL_STREAM, child_seed, make_rng

logger = logging.getLogger(__name__)


class SupportStyle(str, enum.Enum):
    GAUSSIAN = "gaussian_orthonormalized"
    FLAT = "flat"


class NoiseDistribution(str, enum.Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class NoiseSpec:
    distribution: NoiseDistribution = NoiseDistribution.GAUSSIAN
    sigma: float = 1.0
    df: float = 6.0
    standardize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "distribution", NoiseDistribution(self.distribution))
        if self.sigma < 0 or not np.isfinite(self.sigma):
            raise InvalidArgumentError(f"sigma must be a finite non-negative number, got {self.sigma}")
        if self.distribution is NoiseDistribution.STUDENT_T:
            if self.df <= 0:
                raise InvalidArgumentError(f"degrees of freedom must be positive, got {self.df}")
            if self.standardize and self.df <= 2:
                raise InvalidArgumentError("standardized Student-t noise needs df > 2 (finite variance)")

    @property
    def label(self):
        """Short name used in table file names, e.g. ``student-t6``."""
        if self.distribution is NoiseDistribution.STUDENT_T:
            return f"student-t{self.df:g}"
        return self.distribution.value


@dataclass(frozen=True)
class SignalModel:
    m: int
    n: int
    r: int
    t: int
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    active_set: np.ndarray
    support_style: SupportStyle = SupportStyle.GAUSSIAN

    def signal_matrix(self):
        return np.ascontiguousarray((self.left_vectors * self.singular_values) @ self.right_vectors.T)

    def inactive_set(self):
        return np.setdiff1d(np.arange(self.n), self.active_set)

    @property
    def frobenius_sq(self):
        return float(np.sum(self.singular_values ** 2))


def _orthonormal_columns(rng, rows, cols):
    Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    # Fix QR's sign freedom so the draw is a function of the seed alone.
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def _flat_support(rng, t, r):
    flat = np.full((t, 1), 1.0 / np.sqrt(t))
    if r == 1:
        return flat
    basis = np.hstack([flat, rng.standard_normal((t, r - 1))])
    Q, R = np.linalg.qr(basis)
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    Q[:, 0] = flat[:, 0]
    return Q


def make_signal(m, n, r, t, singular_values, support_style=SupportStyle.GAUSSIAN, seed=0, random_support=False):
    """Draw a rank-``r`` signal whose right vectors share a ``t``-column support.

    ``singular_values`` is either a scalar (repeated ``r`` times) or ``r``
    non-increasing positive values. The active set is the first ``t``
    columns unless ``random_support`` asks for a random ``t``-subset.
    """
    support_style = SupportStyle(support_style)
    if not (m >= 1 and n >= 1 and 1 <= r <= min(m, t) and t <= n):
        raise InvalidArgumentError(f"need 1 <= r <= min(m, t) and t <= n, got m={m} n={n} r={r} t={t}")
    values = np.broadcast_to(np.asarray(singular_values, dtype=np.float64), (r,)).copy()
    if np.any(values <= 0) or np.any(np.diff(values) > 0) or not np.all(np.isfinite(values)):
        raise InvalidArgumentError(f"singular values must be positive and non-increasing, got {values}")

    rng = make_rng(seed)
    left = _orthonormal_columns(rng, m, r)
    if support_style is SupportStyle.FLAT:
        support_block = _flat_support(rng, t, r)
    else:
        support_block = _orthonormal_columns(rng, t, r)
    if random_support:
        active = np.sort(rng.choice(n, size=t, replace=False))
    else:
        active = np.arange(t)
    right = np.zeros((n, r))
    right[active] = support_block

    logger.debug("signal m=%d n=%d r=%d t=%d style=%s", m, n, r, t, support_style.value)
    return SignalModel(
        m=m, n=n, r=r, t=t,
        singular_values=values,
        left_vectors=left,
        right_vectors=right,
        active_set=active,
        support_style=support_style,
    )


def make_noise(m, n, spec, seed=0):
    """``(sigma / sqrt(n)) Z`` with i.i.d. entries drawn per ``spec``."""
    if spec.sigma == 0:
        return np.zeros((m, n))
    rng = make_rng(seed)
    if spec.distribution is NoiseDistribution.GAUSSIAN:
        Z = rng.standard_normal((m, n))
    elif spec.distribution is NoiseDistribution.STUDENT_T:
        Z = rng.standard_t(spec.df, size=(m, n))
        if spec.standardize:
            Z *= np.sqrt((spec.df - 2.0) / spec.df)
    else:
        if spec.standardize:
            Z = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=(m, n))
        else:
            Z = rng.uniform(-1.0, 1.0, size=(m, n))
    return (spec.sigma / np.sqrt(n)) * Z


def observe(model, spec, seed=0):
    """Return ``(Y, X)`` for one noisy observation of ``model``."""
    X = model.signal_matrix()
    Y = X + make_noise(model.m, model.n, spec, seed)
    return Y, X


def draw_replicate(m, n, r, t, singular_values, spec, seed, support_style=SupportStyle.GAUSSIAN, random_support=False):
    """One ``(model, Y, X)`` draw with the signal and noise on separate child streams."""
    model = make_signal(
        m, n, r, t, singular_values, support_style,
        seed=child_seed(seed, SIGNAL_STREAM), random_support=random_support,
    )
    Y, X = observe(model, spec, seed=child_seed(seed, NOISE_STREAM))
    return model, Y, X

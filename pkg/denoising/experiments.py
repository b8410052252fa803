"""Monte Carlo scans comparing the estimators' MSE.

A scan varies one of ``t``, ``x`` or ``n`` over a grid while the other
parameters stay fixed. Every grid cell runs ``replicates`` independent
draws; replicate ``k`` of scan point ``i`` is seeded from
``child_seed(master_seed, i, k)`` so a cell reproduces on its own,
whatever the thread count or completion order.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import matcore, synth
from .estimators import EstimatorConfig, Variant, denoise
from .exceptions import InvalidArgumentError
from .signals import cell_completed
from .theoryverify import mse
from .utils.seeding import child_seed

logger = logging.getLogger(__name__)

SCAN_VARIABLES = ("t", "x", "n")

DEFAULT_ESTIMATORS = (Variant.REFACTOR, Variant.TSVD, Variant.JL)


@dataclass(frozen=True)
class ExperimentSpec:
    scan_variable: str
    scan_values: tuple
    m: int = 200
    n: int = 200
    r: int = 5
    t: int = 100
    x: float = 4.0
    noise: synth.NoiseSpec = synth.NoiseSpec()
    support_style: synth.SupportStyle = synth.SupportStyle.GAUSSIAN
    random_support: bool = False
    replicates: int = 50
    estimators: tuple = DEFAULT_ESTIMATORS
    master_seed: int = 0
    label: str = "gaussian"

    def __post_init__(self):
        if self.scan_variable not in SCAN_VARIABLES:
            raise InvalidArgumentError(f"scan variable must be one of {', '.join(SCAN_VARIABLES)}")
        values = tuple(self.scan_values)
        if not values:
            raise InvalidArgumentError("scan_values must not be empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidArgumentError("scan_values must be strictly increasing")
        if self.scan_variable in ("t", "n"):
            values = tuple(int(v) for v in values)
        object.__setattr__(self, "scan_values", values)
        if self.replicates < 1:
            raise InvalidArgumentError("replicates must be at least 1")
        estimators = tuple(Variant(v) for v in self.estimators)
        if not estimators or len(set(estimators)) != len(estimators):
            raise InvalidArgumentError("estimators must be a non-empty list without repeats")
        object.__setattr__(self, "estimators", estimators)
        object.__setattr__(self, "support_style", synth.SupportStyle(self.support_style))
        for value in values:
            self.cell(value)

    def cell(self, value):
        """``(m, n, t, x)`` at one scan point, validated."""
        params = {"m": self.m, "n": self.n, "t": self.t, "x": float(self.x)}
        params[self.scan_variable] = value
        m, n, t, x = params["m"], params["n"], params["t"], params["x"]
        if not 1 <= t <= n:
            raise InvalidArgumentError(f"t={t} must lie in [1, n={n}]")
        if not 1 <= self.r <= min(m, t):
            raise InvalidArgumentError(f"r={self.r} must lie in [1, min(m, t)={min(m, t)}]")
        if x <= 0:
            raise InvalidArgumentError(f"x must be positive, got {x}")
        return m, n, t, x


@dataclass(frozen=True)
class CellSummary:
    scan_value: float
    mean: dict
    std_error: dict


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    cells: list = field(default_factory=list)

    @property
    def header(self):
        columns = [self.spec.scan_variable]
        for variant in self.spec.estimators:
            columns += [variant.table_label, f"{variant.table_label}_std"]
        return columns

    def table_rows(self):
        rows = []
        for cell in self.cells:
            row = [cell.scan_value]
            for variant in self.spec.estimators:
                row += [cell.mean[variant], cell.std_error[variant]]
            rows.append(row)
        return rows


def _replicate(spec, scan_index, replicate_index):
    m, n, t, x = spec.cell(spec.scan_values[scan_index])
    _, Y, X = synth.draw_replicate(
        m, n, spec.r, t, x, spec.noise,
        child_seed(spec.master_seed, scan_index, replicate_index),
        support_style=spec.support_style,
        random_support=spec.random_support,
    )
    factors = matcore.svd(Y)
    return {
        variant: mse(denoise(Y, EstimatorConfig(variant, spec.r, t), factors=factors).estimate, X)
        for variant in spec.estimators
    }


def summarize(values):
    """Mean and standard error of the mean (``0`` for a single value)."""
    count = len(values)
    mean = math.fsum(values) / count
    if count == 1:
        return mean, 0.0
    variance = math.fsum((v - mean) ** 2 for v in values) / (count - 1)
    return mean, math.sqrt(variance / count)


def run_experiment(spec, threads=1):
    tasks = [(i, k) for i in range(len(spec.scan_values)) for k in range(spec.replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda task: _replicate(spec, *task), tasks))
    else:
        outcomes = [_replicate(spec, *task) for task in tasks]
    by_task = dict(zip(tasks, outcomes))

    result = ExperimentResult(spec=spec)
    for i, value in enumerate(spec.scan_values):
        means, errors = {}, {}
        for variant in spec.estimators:
            samples = [by_task[(i, k)][variant] for k in range(spec.replicates)]
            means[variant], errors[variant] = summarize(samples)
        cell = CellSummary(scan_value=value, mean=means, std_error=errors)
        result.cells.append(cell)
        cell_completed.send(sender=ExperimentSpec, spec=spec, cell=cell)
    return result


def _number_tag(value):
    return f"{value:.2f}".replace(".", "_")


def default_table_name(spec):
    """File name in the ``gaussian_m=200_r=5_sigma=1_00_x=4_00_n=200_noise=gaussian.dat`` style."""
    parts = [spec.label, f"m={spec.m}", f"r={spec.r}", f"sigma={_number_tag(spec.noise.sigma)}"]
    if spec.scan_variable != "x":
        parts.append(f"x={_number_tag(spec.x)}")
    if spec.scan_variable != "t":
        parts.append(f"t={spec.t}")
    if spec.scan_variable != "n":
        parts.append(f"n={spec.n}")
    parts.append(f"noise={spec.noise.label}")
    return "_".join(parts) + ".dat"


PRESETS = {
    "fig1": ExperimentSpec(
        scan_variable="t",
        scan_values=tuple(range(20, 201, 20)),
        r=5,
        x=4.0,
        label="gaussian",
    ),
    "fig2": ExperimentSpec(
        scan_variable="x",
        scan_values=(0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0),
        r=5,
        t=100,
        noise=synth.NoiseSpec(synth.NoiseDistribution.STUDENT_T, df=6.0),
        label="student-t6",
    ),
    "fig3": ExperimentSpec(
        scan_variable="t",
        scan_values=tuple(range(20, 201, 20)),
        r=1,
        x=4.0,
        estimators=tuple(Variant),
        label="low-r",
    ),
}


def preset(name, **overrides):
    try:
        base = PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None
    return replace(base, **overrides)

"""Matrix-valued process samples built from one random walk per link class.

Entries that share a link value are the same random variable, so a sample
stores only the class values and materialises the dense matrix on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .clocks import FppPath, sample_fpp
from .errors import CapacityError, ValidationError
from .patterns import LinkKind, LinkTable, link_table
from .specfn import check_alpha
from .walks import (ROLE_CLOCK, ROLE_STEPS, StepLaw, TimeGrid, random_stream, step_floor,
                    walk_increments)

MAX_ORDER = 4096
# class values held at once across all grid points (doubles)
DEFAULT_BUDGET = 1 << 27

CLOCKS = ("deterministic", "fpp_shared", "fpp_per_entry")
SCALINGS = ("ctrw", "stopped")


@dataclass(frozen=True)
class ProcessConfig:
    """Recipe for a matrix-valued process sample.

    ``scaling="ctrw"`` divides raw walk sums by ``n``; ``"stopped"`` divides by
    ``n^((1 + alpha)/2)``.  ``fpp_per_entry`` gives every link class its own
    clock and is meant for exploration only.
    """

    kind: LinkKind
    n: int
    grid: TimeGrid = field(default_factory=lambda: TimeGrid([1.0]))
    step_law: StepLaw = StepLaw.STANDARD_GAUSSIAN
    alpha: float = 1.0
    rho: float | None = None
    clock: str = "deterministic"
    scaling: str | None = None
    trials: int = 1
    seed: int = 0
    lam: float = 1.0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "kind", LinkKind.parse(self.kind))
        object.__setattr__(self, "step_law", StepLaw.parse(self.step_law))
        if not isinstance(self.grid, TimeGrid):
            object.__setattr__(self, "grid", TimeGrid(self.grid))
        if self.scaling is None:
            object.__setattr__(self, "scaling",
                               "ctrw" if self.clock == "deterministic" else "stopped")
        self.validate()

    def validate(self) -> "ProcessConfig":
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n}", field="n")
        if self.n > MAX_ORDER:
            raise CapacityError(f"matrix order {self.n} exceeds the supported cap {MAX_ORDER}")
        check_alpha(self.alpha)
        if self.clock not in CLOCKS:
            raise ValidationError(f"clock must be one of {CLOCKS}, got {self.clock!r}", field="clock")
        if self.scaling not in SCALINGS:
            raise ValidationError(f"scaling must be one of {SCALINGS}, got {self.scaling!r}",
                                  field="scaling")
        if self.clock != "deterministic" and self.scaling != "stopped":
            raise ValidationError("an fpp clock requires scaling='stopped'", field="scaling")
        if self.clock == "deterministic" and self.alpha < 1.0:
            raise ValidationError("alpha < 1 requires an fpp clock", field="alpha")
        if self.kind is LinkKind.ELLIPTIC_IID:
            rho = 0.0 if self.rho is None else self.rho
            if not (-1.0 <= rho <= 1.0):
                raise ValidationError(f"rho must lie in [-1, 1], got {rho}", field="rho")
        elif self.rho is not None:
            raise ValidationError("rho is only used with kind EllipticIID", field="rho")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials}",
                                  field="trials")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer, got {self.seed}",
                                  field="seed")
        if self.lam <= 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}", field="lam")
        return self

    @property
    def scale(self) -> float:
        if self.scaling == "ctrw":
            return 1.0 / self.n
        return self.n ** (-(1.0 + self.alpha) / 2.0)

    def with_(self, **changes) -> "ProcessConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class MatrixSnapshot:
    """One scaled matrix ``A(t)``.

    Built either from per-class values plus a link table, or from a dense
    array (``kind=None``).  ``entries`` is materialised lazily.
    """

    time: float
    n: int
    kind: LinkKind | None = None
    values: np.ndarray | None = None
    dense: np.ndarray | None = None

    @classmethod
    def from_dense(cls, entries, time: float = 0.0) -> "MatrixSnapshot":
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("snapshot entries must be a square matrix", field="entries")
        a.setflags(write=False)
        return cls(time, a.shape[0], None, None, a)

    @property
    def table(self) -> LinkTable | None:
        return None if self.kind is None else link_table(self.kind, self.n)

    @cached_property
    def entries(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        out = self.values[self.table.index]
        out.setflags(write=False)
        return out

    @property
    def symmetric(self) -> bool:
        if self.kind is not None:
            return self.kind.symmetric
        return bool(np.array_equal(self.dense, self.dense.T))

    def first_row(self) -> np.ndarray:
        if self.kind is not None:
            return self.values[self.table.first_row()]
        return self.dense[0]


@dataclass(frozen=True, eq=False)
class ProcessSample:
    config: ProcessConfig
    snapshots: tuple
    clock: FppPath | None = None

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, k) -> MatrixSnapshot:
        return self.snapshots[k]

    def at(self, t: float) -> MatrixSnapshot:
        for s in self.snapshots:
            if math.isclose(s.time, t, rel_tol=0, abs_tol=1e-12):
                return s
        raise ValidationError(f"time {t} is not on the sample grid", field="t")


def _check_capacity(config: ProcessConfig, num_classes: int):
    need = num_classes * len(config.grid)
    if need > config.budget:
        raise CapacityError(
            f"{config.kind.value} at n={config.n} needs {num_classes} walks x "
            f"{len(config.grid)} times = {need} values, over the budget of {config.budget}")


def _deterministic_counts(config: ProcessConfig) -> np.ndarray:
    floors = [step_floor(config.n, t) for t in config.grid]
    return np.diff(np.asarray([0] + floors, dtype=np.int64))


def _streams(config, rng, trial):
    if rng is not None:
        return rng, rng
    return (random_stream(config.seed, trial, ROLE_STEPS),
            random_stream(config.seed, trial, ROLE_CLOCK))


def _snapshots(config: ProcessConfig, walks: np.ndarray) -> tuple:
    """``walks`` has shape ``(num_classes, len(grid))`` of raw sums."""
    scaled = walks * config.scale
    out = []
    for k, t in enumerate(config.grid):
        v = np.ascontiguousarray(scaled[:, k])
        v.setflags(write=False)
        out.append(MatrixSnapshot(t, config.n, config.kind, v))
    return tuple(out)


def build_ctrw_process(config: ProcessConfig, rng=None, trial: int = 0) -> ProcessSample:
    """Walk matrices with a deterministic clock: entry ``(i, j)`` holds ``S_{L(i,j)}([n t])``."""
    if config.clock != "deterministic":
        raise ValidationError("build_ctrw_process needs clock='deterministic'", field="clock")
    table = link_table(config.kind, config.n)
    _check_capacity(config, table.num_classes)
    steps, _ = _streams(config, rng, trial)
    counts = _deterministic_counts(config)
    if config.kind is LinkKind.ELLIPTIC_IID:
        inc = _elliptic_increments(config, table, counts, steps)
    else:
        inc = walk_increments(config.step_law, counts, steps, size=(table.num_classes,))
    return ProcessSample(config, _snapshots(config, np.cumsum(inc, axis=1)))


def build_stopped_process(config: ProcessConfig, rng=None, trial: int = 0) -> ProcessSample:
    """Walks stopped at a fractional Poisson count ``N(n t)`` shared by all entries."""
    if config.clock == "deterministic":
        raise ValidationError("build_stopped_process needs an fpp clock", field="clock")
    table = link_table(config.kind, config.n)
    _check_capacity(config, table.num_classes)
    steps, clock_rng = _streams(config, rng, trial)
    times = config.grid.scaled(config.n)
    if config.clock == "fpp_shared":
        clock = sample_fpp(config.alpha, config.lam, times, clock_rng)
        counts = np.diff(clock.counts, prepend=0)
    else:
        clock = sample_fpp(config.alpha, config.lam, times, clock_rng, size=table.num_classes)
        counts = np.diff(clock.counts, axis=1, prepend=0)
    if config.kind is LinkKind.ELLIPTIC_IID:
        inc = _elliptic_increments(config, table, counts, steps)
    else:
        inc = walk_increments(config.step_law, counts, steps, size=(table.num_classes,))
    return ProcessSample(config, _snapshots(config, np.cumsum(inc, axis=1)),
                         clock if config.clock == "fpp_shared" else None)


def _elliptic_increments(config, table, counts, rng) -> np.ndarray:
    """Gaussian increments with correlation ``rho`` between positions ``(i,j)`` and ``(j,i)``.

    Summing ``c`` correlated Gaussian step pairs is again a correlated pair with
    variance ``c``, so each increment is drawn in one shot.
    """
    rho = 0.0 if config.rho is None else float(config.rho)
    num = table.num_classes
    counts = np.broadcast_to(np.asarray(counts, dtype=np.int64), (num, np.shape(counts)[-1]))
    root = np.sqrt(counts)
    z1 = rng.standard_normal(counts.shape)
    z2 = rng.standard_normal(counts.shape)
    upper = table.index[np.triu_indices(config.n, 1)]
    lower = table.partner[upper]
    inc = root * z1
    inc[lower] = rho * inc[upper] + math.sqrt(max(0.0, 1.0 - rho * rho)) * (root * z2)[lower]
    return inc


def build_elliptic(config: ProcessConfig, rng=None, trial: int = 0) -> ProcessSample:
    if config.kind is not LinkKind.ELLIPTIC_IID:
        raise ValidationError("build_elliptic needs kind EllipticIID", field="kind")
    return build_process(config, rng, trial)


def build_process(config: ProcessConfig, rng=None, trial: int = 0) -> ProcessSample:
    if config.clock == "deterministic":
        return build_ctrw_process(config, rng, trial)
    return build_stopped_process(config, rng, trial)


def build_iid_copies_sum(kind, n: int, count, rng: np.random.Generator, alpha: float = 1.0,
                         step_law=StepLaw.STANDARD_GAUSSIAN, lam: float = 1.0) -> MatrixSnapshot:
    """Scaled sum of ``K`` independent one-step matrices.

    ``count`` is ``"n"`` (``K = n``, scale ``1/n``), ``"poisson"`` (``K ~
    Poisson(n)``, scale ``1/n``), ``"fpp"`` (``K = N(n)``, scale
    ``n^(-(1+alpha)/2)``) or an explicit nonnegative integer (scale ``1/n``).
    The result matches the corresponding process snapshot at ``t = 1``.
    """
    kind = LinkKind.parse(kind)
    alpha = check_alpha(alpha)
    scale = 1.0 / n
    if count == "n":
        k = n
    elif count == "poisson":
        k = int(rng.poisson(n))
    elif count == "fpp":
        k = int(sample_fpp(alpha, lam, [float(n)], rng).counts[0])
        scale = n ** (-(1.0 + alpha) / 2.0)
    elif isinstance(count, (int, np.integer)) and count >= 0:
        k = int(count)
    else:
        raise ValidationError(f"unsupported count law {count!r}", field="count")
    table = link_table(kind, n)
    if kind is LinkKind.ELLIPTIC_IID:
        raise ValidationError("iid copy sums are defined for symmetric link kinds", field="kind")
    values = walk_increments(step_law, [k], rng, size=(table.num_classes,))[:, 0] * scale
    values.setflags(write=False)
    return MatrixSnapshot(1.0, n, kind, values)


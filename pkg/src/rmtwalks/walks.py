"""Step laws, time grids and the partial-sum engine.

Randomness is always passed in explicitly as a ``numpy.random.Generator``.
:func:`random_stream` derives independent counter-based (Philox) substreams
from ``(seed, trial, role)`` so that results do not depend on scheduling.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# roles for substream derivation; one stream per (trial, role)
ROLE_STEPS = 0
ROLE_CLOCK = 1
ROLE_INDEX = 2
ROLE_ELLIPTIC = 3

# largest number of step draws summed per chunk in direct summation
_CHUNK = 1 << 22


def random_stream(seed: int, trial: int = 0, role: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, trial, role)``."""
    if seed is None or int(seed) < 0:
        raise ValidationError(f"seed must be a nonnegative integer, got {seed}", field="seed")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(role)))
    return np.random.Generator(np.random.Philox(ss))


class StepLaw(enum.Enum):
    STANDARD_GAUSSIAN = "standard_gaussian"
    RADEMACHER = "rademacher"
    UNIFORM_SCALED = "uniform_scaled"

    @classmethod
    def parse(cls, value) -> "StepLaw":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown step law {value!r}", field="step_law") from None

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        """Iid mean-zero, unit-variance draws."""
        if self is StepLaw.STANDARD_GAUSSIAN:
            return rng.standard_normal(size)
        if self is StepLaw.RADEMACHER:
            return 2.0 * rng.integers(0, 2, size=size) - 1.0
        r3 = math.sqrt(3.0)
        return rng.uniform(-r3, r3, size=size)


@dataclass(frozen=True)
class TimeGrid:
    points: tuple

    def __init__(self, points):
        pts = tuple(float(p) for p in np.atleast_1d(np.asarray(points, dtype=float)))
        if not pts:
            raise ValidationError("time grid must have at least one point", field="grid")
        if not all(math.isfinite(p) for p in pts):
            raise ValidationError("time grid points must be finite", field="grid")
        if pts[0] < 0:
            raise ValidationError(f"time grid must start at t_0 >= 0, got {pts[0]}", field="grid")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValidationError("time grid must be strictly increasing", field="grid")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, k):
        return self.points[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points)

    def scaled(self, c: float) -> "TimeGrid":
        return TimeGrid([c * p for p in self.points])


def _as_grid(grid) -> TimeGrid:
    return grid if isinstance(grid, TimeGrid) else TimeGrid(grid)


def step_floor(n: int, t: float) -> int:
    """``[n t]`` with a guard against binary round-off (``100 * 0.35`` is 34.999...)."""
    x = n * t
    k = math.floor(x)
    if math.isclose(x, k + 1, rel_tol=1e-12, abs_tol=1e-12):
        k += 1
    return int(k)


def step_counts(n: int, grid) -> np.ndarray:
    """``c_k = [n t_k] - [n t_{k-1}]`` for ``k = 1..p``."""
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}", field="n")
    floors = np.array([step_floor(n, t) for t in _as_grid(grid)], dtype=np.int64)
    return np.diff(floors)


def walk_increments(law, counts, rng: np.random.Generator, size=None,
                    method: str = "auto") -> np.ndarray:
    """Sum ``counts[k]`` fresh iid steps for each interval.

    ``size`` adds leading independent replicate axes (e.g. one per link
    class), giving an array of shape ``size + (len(counts),)``.  ``counts`` may
    also be an array broadcasting against that shape, for randomly stopped
    walks.  ``method="auto"`` uses exact distributional shortcuts (Gaussian
    and Rademacher); ``"direct"`` always sums individual draws.
    """
    law = StepLaw.parse(law)
    counts = np.asarray(counts, dtype=np.int64)
    if np.any(counts < 0):
        raise ValidationError("step counts must be nonnegative", field="counts")
    shape = np.broadcast_shapes(tuple(size or ()) + counts.shape[-1:], counts.shape) \
        if counts.ndim else tuple(size or ())
    counts = np.broadcast_to(counts, shape)
    if method == "auto":
        if law is StepLaw.STANDARD_GAUSSIAN:
            return gaussian_fastpath(counts, rng)
        if law is StepLaw.RADEMACHER:
            return 2.0 * rng.binomial(counts, 0.5) - counts
    elif method != "direct":
        raise ValidationError(f"unknown summation method {method!r}", field="method")
    return _direct_sums(law, counts, rng)


def _direct_sums(law: StepLaw, counts: np.ndarray, rng) -> np.ndarray:
    flat = counts.ravel()
    out = np.zeros(flat.size)
    cum = np.cumsum(flat)
    # chunk boundaries so that each chunk draws roughly _CHUNK steps at once
    cuts = np.searchsorted(cum, np.arange(_CHUNK, cum[-1] if cum.size else 0, _CHUNK), "right")
    bounds = np.unique(np.concatenate(([0], cuts, [flat.size])))
    for start, stop in zip(bounds[:-1], bounds[1:]):
        seg = flat[start:stop]
        ends = np.cumsum(seg)
        csum = np.concatenate(([0.0], np.cumsum(law.draw(rng, int(ends[-1])))))
        out[start:stop] = csum[ends] - csum[ends - seg]
    return out.reshape(counts.shape)


def gaussian_fastpath(counts, rng: np.random.Generator) -> np.ndarray:
    """Exact shortcut for Gaussian steps: ``sqrt(c) * N(0, 1)``."""
    counts = np.asarray(counts, dtype=np.int64)
    return np.sqrt(counts) * rng.standard_normal(counts.shape)


def partial_sums(increments: np.ndarray, first=None) -> np.ndarray:
    """Cumulative walk values along the last axis, optionally with a prepended start value."""
    out = np.cumsum(increments, axis=-1)
    if first is not None:
        out = out + np.expand_dims(first, -1)
        out = np.concatenate((np.expand_dims(first, -1), out), axis=-1)
    return out

"""Stable subordinators, their inverses and fractional Poisson counting processes.

All samplers are vectorised over independent paths through a ``size``
argument and take the generator explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .specfn import check_alpha, mittag_leffler_3p
from .walks import TimeGrid

# inverse paths: the first-passage grid step is this fraction of E L(t) at the smallest positive time
REL_TOL = 1e-3
MAX_DEPTH = 20
# stable increments drawn per block for each still-running path
_BLOCK = 256
# memory cap (number of doubles) for one block of path increments
_BLOCK_BUDGET = 1 << 23


@dataclass(frozen=True)
class InversePath:
    """Values of ``L(t)`` at every grid time; ``values`` has shape ``(..., len(times))``."""

    times: TimeGrid
    values: np.ndarray
    step: float = 0.0


@dataclass(frozen=True)
class FppPath:
    """Counts ``N(t)`` at every grid time; ``counts`` has shape ``(..., len(times))``."""

    times: TimeGrid
    counts: np.ndarray


def _as_grid(times) -> TimeGrid:
    return times if isinstance(times, TimeGrid) else TimeGrid(times)


def _kanter(alpha: float, rng: np.random.Generator, size) -> np.ndarray:
    """One-sided stable draws with ``E exp(-u H) = exp(-u^alpha)`` (Kanter's representation)."""
    u = rng.uniform(0.0, 1.0, size)
    e = rng.standard_exponential(size)
    pu = math.pi * u
    a = (np.sin(alpha * pu) ** alpha * np.sin((1.0 - alpha) * pu) ** (1.0 - alpha)
         / np.sin(pu)) ** (1.0 / (1.0 - alpha))
    return (a / e) ** ((1.0 - alpha) / alpha)


def sample_stable(alpha: float, t: float, rng: np.random.Generator, size=None):
    """Draw ``H(t)`` for the standard ``alpha``-stable subordinator (``0 < alpha < 1``)."""
    alpha = check_alpha(alpha)
    if alpha >= 1.0:
        raise ValidationError("sample_stable needs alpha < 1", field="alpha")
    if t <= 0:
        raise ValidationError(f"t must be positive, got {t}", field="t")
    out = t ** (1.0 / alpha) * _kanter(alpha, rng, size)
    return float(out) if size is None else out


def inverse_marginal(alpha: float, t: float, rng: np.random.Generator, size=None):
    """``L(t)`` at a single time from ``L(t) = (t / H(1))^alpha`` in law."""
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return float(t) if size is None else np.full(size, float(t))
    h = _kanter(alpha, rng, size)
    out = (t / h) ** alpha
    return float(out) if size is None else out


def inverse_values(alpha: float, times, rng: np.random.Generator, size=None,
                   method: str = "auto", rel_tol: float = REL_TOL) -> InversePath:
    """Jointly sample ``L(t_k)`` on a grid for ``size`` independent paths.

    ``method="path"`` simulates the subordinator on a uniform grid of step
    ``ds`` and records the right endpoint of the first step at which it
    reaches each level, so values are nondecreasing and overshoot by at most
    ``ds``.  ``ds`` starts at ``rel_tol * E L(t_min)`` for the smallest
    positive grid time; if the realised passages are resolved by fewer steps
    than intended the step is halved and the draw repeated, up to
    ``MAX_DEPTH`` times.  ``method="auto"`` uses the exact single-time identity
    when the grid has only one positive time (joint law equals the marginal
    then) and the path method otherwise.
    """
    alpha = check_alpha(alpha)
    grid = _as_grid(times)
    t = grid.as_array()
    shape = () if size is None else tuple(np.atleast_1d(size))
    if alpha == 1.0:
        return InversePath(grid, np.broadcast_to(t, shape + t.shape).copy())
    if method not in ("auto", "path"):
        raise ValidationError(f"unknown inverse method {method!r}", field="method")
    positive = t[t > 0]
    values = np.zeros(shape + t.shape)
    if positive.size == 0:
        return InversePath(grid, values)
    npaths = int(np.prod(shape)) if shape else 1
    if method == "auto" and positive.size == 1:
        draw = inverse_marginal(alpha, float(positive[0]), rng, size=npaths)
        values[..., t > 0] = draw.reshape(shape + (1,)) if shape else draw[0]
        return InversePath(grid, values)

    target = float(positive[0]) ** alpha / math.gamma(1.0 + alpha)
    ds = rel_tol * target
    for _ in range(MAX_DEPTH + 1):
        flat = _first_passage(alpha, positive, ds, npaths, rng)
        # resolution check: the smallest level must be crossed after ~1/rel_tol steps on average
        if flat[:, 0].mean() / ds >= 0.5 / rel_tol:
            values[..., t > 0] = flat.reshape(shape + positive.shape) if shape else flat[0]
            return InversePath(grid, values, ds)
        ds /= 2.0
    raise NumericError(f"inverse subordinator path unresolved after {MAX_DEPTH} refinements")


def _first_passage(alpha, levels, ds, npaths, rng) -> np.ndarray:
    """Right-endpoint first-passage times of ``H`` over ``levels`` for ``npaths`` paths."""
    out = np.zeros((npaths, levels.size))
    scale = ds ** (1.0 / alpha)
    active = np.arange(npaths)
    h_now = np.zeros(npaths)
    steps_done = 0
    pending = np.zeros((npaths, levels.size), dtype=bool)
    pending[:] = True
    block = _BLOCK
    while active.size:
        rows = max(1, min(active.size, _BLOCK_BUDGET // block))
        for lo in range(0, active.size, rows):
            idx = active[lo:lo + rows]
            h = h_now[idx, None] + np.cumsum(scale * _kanter(alpha, rng, (idx.size, block)), axis=1)
            for j, level in enumerate(levels):
                todo = pending[idx, j]
                if not todo.any():
                    continue
                crossed = h[todo] >= level
                hit = crossed.any(axis=1)
                first = np.argmax(crossed, axis=1)
                rows_hit = idx[todo][hit]
                out[rows_hit, j] = (steps_done + first[hit] + 1) * ds
                pending[rows_hit, j] = False
            h_now[idx] = h[:, -1]
        steps_done += block
        active = active[pending[active].any(axis=1)]
        block = min(2 * block, 1 << 14)
    return out


def ml_waiting_times(alpha: float, lam: float, rng: np.random.Generator, size=None):
    """Mittag-Leffler interarrival times with ``P(J > x) = E_alpha(-lam x^alpha)``.

    Uses the exact two-uniform representation
    ``J = -ln U * lam^(-1/alpha) * (sin(a pi)/tan(a pi V) - cos(a pi))^(1/alpha)``.
    """
    alpha = check_alpha(alpha)
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}", field="lambda")
    e = rng.standard_exponential(size)
    if alpha == 1.0:
        return e / lam
    v = rng.uniform(0.0, 1.0, size)
    api = alpha * math.pi
    w = math.sin(api) / np.tan(api * v) - math.cos(api)
    return e * (w / lam) ** (1.0 / alpha)


def sample_fpp(alpha: float, lam: float, times, rng: np.random.Generator, size=None,
               method: str = "mittag_leffler_waits") -> FppPath:
    """Sample the fractional Poisson counting process at the grid times.

    ``mittag_leffler_waits`` accumulates iid Mittag-Leffler interarrival times;
    ``time_change`` evaluates a rate-``lam`` Poisson process at inverse
    subordinator times.  Both give the same law.
    """
    alpha = check_alpha(alpha)
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}", field="lambda")
    grid = _as_grid(times)
    t = grid.as_array()
    shape = () if size is None else tuple(np.atleast_1d(size))
    npaths = int(np.prod(shape)) if shape else 1
    if method == "time_change":
        ell = inverse_values(alpha, grid, rng, size=npaths).values
        dl = np.diff(ell, axis=1, prepend=0.0)
        counts = np.cumsum(rng.poisson(lam * dl), axis=1)
    elif method == "mittag_leffler_waits":
        counts = _count_arrivals(alpha, lam, t, npaths, rng)
    else:
        raise ValidationError(f"unknown fpp method {method!r}", field="method")
    counts = counts.reshape(shape + t.shape) if shape else counts[0]
    return FppPath(grid, counts.astype(np.int64))


def _count_arrivals(alpha, lam, t, npaths, rng) -> np.ndarray:
    counts = np.zeros((npaths, t.size), dtype=np.int64)
    last = np.zeros(npaths)
    active = np.arange(npaths)
    horizon = t[-1]
    # first block sized near the expected count at the horizon
    block = int(min(4096, max(8, 2 * (lam * horizon ** alpha / math.gamma(1 + alpha)) + 8)))
    while active.size:
        arrivals = last[active, None] + np.cumsum(
            ml_waiting_times(alpha, lam, rng, (active.size, block)), axis=1)
        counts[active] += (arrivals[:, :, None] <= t).sum(axis=1)
        last[active] = arrivals[:, -1]
        active = active[last[active] <= horizon]
        block = min(2 * block, 4096)
    return counts


def fpp_pmf(alpha: float, lam: float, t: float, k: int) -> float:
    """``P(N(t) = k) = (lam t^a)^k E^{k+1}_{a, k a + 1}(-lam t^a)``."""
    alpha = check_alpha(alpha)
    if int(k) != k or k < 0:
        raise ValidationError(f"k must be a nonnegative integer, got {k}", field="k")
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}", field="lambda")
    if t < 0:
        raise ValidationError(f"t must be nonnegative, got {t}", field="t")
    if t == 0:
        return 1.0 if k == 0 else 0.0
    z = lam * t ** alpha
    if alpha == 1.0:
        return math.exp(k * math.log(z) - z - math.lgamma(k + 1))
    value = mittag_leffler_3p(alpha, k * alpha + 1.0, k + 1.0, -z)
    return z ** k * value

"""Eigenvalue processes picked at a uniform index and their finite-dimensional statistics.

Each path is one independent matrix realisation followed through the grid at
a single eigenvalue index drawn once before time evolution.  Only the walks of
the first row are simulated; the chosen eigenvalue is a fixed linear
combination of them.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .clocks import sample_fpp
from .ensemble import ProcessConfig, build_process
from .errors import ValidationError
from .patterns import LinkKind
from .spectra import MomentEstimate, trace_of_monomial
from .walks import ROLE_CLOCK, ROLE_INDEX, ROLE_STEPS, random_stream, step_floor, walk_increments

# paths simulated together (bounded by paths x classes x grid doubles)
_PATH_BUDGET = 1 << 23


@dataclass(frozen=True, eq=False)
class PathSample:
    """``values[p, k]`` is path ``p`` at grid time ``k``; ``index[p]`` is its eigenvalue index."""

    grid: tuple
    values: np.ndarray
    index: np.ndarray

    @property
    def paths(self) -> int:
        return self.values.shape[0]

    def column(self, t: float) -> np.ndarray:
        for k, s in enumerate(self.grid):
            if math.isclose(s, t, rel_tol=0, abs_tol=1e-12):
                return self.values[:, k]
        raise ValidationError(f"time {t} is not on the path grid", field="t")


@dataclass
class FddStats:
    """Rows of ``(s, t, statistic, estimate, stderr)`` over ``trials`` paths."""

    trials: int
    rows: list = field(default_factory=list)

    def get(self, statistic: str, s: float, t: float):
        for row in self.rows:
            if row[2] == statistic and math.isclose(row[0], s) and math.isclose(row[1], t):
                return row[3], row[4]
        raise KeyError((statistic, s, t))

    def covariance_matrix(self, grid) -> np.ndarray:
        p = len(grid)
        out = np.zeros((p, p))
        for i in range(p):
            for j in range(i, p):
                out[i, j] = out[j, i] = self.get("cov", grid[i], grid[j])[0]
        return out


def symmetric_circulant_weights(n: int, r: np.ndarray) -> np.ndarray:
    """Weights ``w_j(r)`` with ``lambda_r = sum_{j <= n/2} w_j(r) a_j`` for the symmetric circulant.

    ``w_0 = 1``, ``w_j = 2 cos(2 pi r j / n)`` for ``0 < j < n/2`` and
    ``w_{n/2} = (-1)^r`` for even ``n``.  For odd ``n`` this is the cosine form.
    """
    r = np.asarray(r)
    j = np.arange(n // 2 + 1)
    w = 2.0 * np.cos(2.0 * math.pi * np.outer(r, j) / n)
    w[:, 0] = 1.0
    if n % 2 == 0:
        w[:, -1] = np.where(r % 2 == 0, 1.0, -1.0)
    return w


def circulant_weights(n: int, r: np.ndarray) -> np.ndarray:
    """``exp(2 pi i r j / n)`` so that ``lambda_r = sum_j w_j(r) a_j``."""
    return np.exp(2j * math.pi * np.outer(np.asarray(r), np.arange(n)) / n)


def _sample_paths(config: ProcessConfig, paths: int, num_classes: int, weights_fn,
                  stopped: bool) -> PathSample:
    n = config.n
    grid = config.grid
    steps = random_stream(config.seed, 0, ROLE_STEPS)
    clock_rng = random_stream(config.seed, 0, ROLE_CLOCK)
    index_rng = random_stream(config.seed, 0, ROLE_INDEX)
    idx = index_rng.integers(0, n, size=paths)
    chunk = max(1, _PATH_BUDGET // (num_classes * len(grid)))
    pieces = []
    if stopped:
        clock = sample_fpp(config.alpha, config.lam, grid.scaled(n), clock_rng, size=paths)
        counts_all = np.diff(clock.counts, axis=1, prepend=0)
    else:
        floors = [step_floor(n, t) for t in grid]
        counts_all = np.broadcast_to(np.diff(np.asarray([0] + floors, dtype=np.int64)),
                                     (paths, len(grid)))
    for lo in range(0, paths, chunk):
        hi = min(paths, lo + chunk)
        counts = counts_all[lo:hi, None, :]
        inc = walk_increments(config.step_law, counts, steps,
                              size=(hi - lo, num_classes), method="auto")
        walks = np.cumsum(inc, axis=2)
        w = weights_fn(n, idx[lo:hi])
        pieces.append(np.einsum("pj,pjk->pk", w, walks) * config.scale)
    return PathSample(tuple(grid), np.concatenate(pieces), idx)


def _check_kind(config: ProcessConfig, kind: LinkKind):
    if config.kind is not kind:
        raise ValidationError(f"this process needs kind {kind.value}", field="kind")


def sample_Y(config: ProcessConfig, paths: int) -> PathSample:
    """Symmetric circulant eigenvalue path ``lambda_U(t)`` with a deterministic clock."""
    _check_kind(config, LinkKind.SYMMETRIC_CIRCULANT)
    if config.clock != "deterministic":
        raise ValidationError("sample_Y needs clock='deterministic'", field="clock")
    return _sample_paths(config, paths, config.n // 2 + 1, symmetric_circulant_weights, False)


def sample_Y_alpha(config: ProcessConfig, paths: int) -> PathSample:
    """As :func:`sample_Y` with walks stopped by one shared fractional Poisson clock per path."""
    _check_kind(config, LinkKind.SYMMETRIC_CIRCULANT)
    if config.clock != "fpp_shared":
        raise ValidationError("sample_Y_alpha needs clock='fpp_shared'", field="clock")
    return _sample_paths(config, paths, config.n // 2 + 1, symmetric_circulant_weights, True)


def sample_Z(config: ProcessConfig, paths: int) -> PathSample:
    """Complex circulant eigenvalue path; stopped when the config carries an fpp clock."""
    _check_kind(config, LinkKind.CIRCULANT)
    if config.clock == "fpp_per_entry":
        raise ValidationError("eigenvalue paths use a shared clock", field="clock")
    return _sample_paths(config, paths, config.n, circulant_weights,
                         config.clock == "fpp_shared")


def _mean_se(x: np.ndarray):
    return complex(x.mean()), float(np.std(x) / math.sqrt(x.size))


def fdd_stats(samples, pairs) -> FddStats:
    """Covariances and fourth mixed moments over paths for each ``(s, t)`` pair.

    Complex paths report ``cov`` as ``E Z(s) conj(Z(t))`` and ``pcov`` as
    ``E Z(s) Z(t)``; real paths report the centred covariance as ``cov`` and
    ``E Y(s)^2 Y(t)^2`` as ``m22``.
    """
    if isinstance(samples, PathSample):
        samples = [samples]
    grids = {s.grid for s in samples}
    if len(grids) != 1:
        raise ValidationError("all path samples must share a grid", field="paths")
    merged = PathSample(samples[0].grid, np.concatenate([s.values for s in samples]),
                        np.concatenate([s.index for s in samples]))
    stats = FddStats(merged.paths)
    for s, t in pairs:
        a = merged.column(s)
        b = merged.column(t)
        if np.iscomplexobj(a):
            est, se = _mean_se(a * np.conj(b))
            stats.rows.append((s, t, "cov", est.real, se))
            est, se = _mean_se(a * b)
            stats.rows.append((s, t, "pcov", est, se))
            est, se = _mean_se(a.real * b.imag)
            stats.rows.append((s, t, "re_im", est.real, se))
        else:
            prod = (a - a.mean()) * (b - b.mean())
            stats.rows.append((s, t, "cov", float(prod.mean() * a.size / (a.size - 1)),
                               float(prod.std() / math.sqrt(a.size))))
            est, se = _mean_se(a * a * b * b)
            stats.rows.append((s, t, "m22", est.real, se))
    return stats


def mixed_trace_estimate(config: ProcessConfig, s: float, t: float, trials: int | None = None) -> MomentEstimate:
    """Trial average of ``n^-1 Trace(A(s) A(t) A(s) A(t))``."""
    trials = config.trials if trials is None else trials
    vals = []
    for trial in range(trials):
        sample = build_process(config, trial=trial)
        a, b = sample.at(s), sample.at(t)
        vals.append(trace_of_monomial([a, b, a, b]))
    return MomentEstimate.from_samples(4, np.real(vals), time=t, alpha=config.alpha)


def write_paths_csv(path, sample: PathSample):
    is_complex = np.iscomplexobj(sample.values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path_id", "t", "value"] + (["im_value"] if is_complex else []))
        for p in range(sample.paths):
            for k, t in enumerate(sample.grid):
                v = sample.values[p, k]
                row = [p, t, repr(float(v.real))]
                if is_complex:
                    row.append(repr(float(v.imag)))
                w.writerow(row)


def write_fdd_csv(path, stats: FddStats, theory=None):
    theory = theory or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "t", "statistic", "estimate", "stderr", "theory"])
        for s, t, name, est, se in stats.rows:
            th = theory.get((s, t, name))
            est = est.real if isinstance(est, complex) and est.imag == 0 else est
            w.writerow([s, t, name, repr(est), repr(se), "" if th is None else repr(th)])

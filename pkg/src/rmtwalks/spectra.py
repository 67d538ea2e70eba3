"""Eigenvalues, spectral distributions, trace moments and goodness of fit.

Symmetric matrices go through LAPACK (``numpy.linalg.eigvalsh``).  The
circulant family is diagonalised exactly by the discrete Fourier transform of
its first row, which is both much faster and an independent second route.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ensemble import MAX_ORDER, MatrixSnapshot, ProcessConfig, build_process
from .errors import CapacityError, ContractError, NoClosedFormError, NumericError, ValidationError
from .patterns import LinkKind
from .specfn import limit_moment_closed, reference_cdf


@dataclass(frozen=True, eq=False)
class Esd:
    """Sorted real eigenvalues of one snapshot."""

    eigenvalues: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def cdf(self, x):
        return np.searchsorted(self.eigenvalues, x, side="right") / self.n

    def moment(self, l: int) -> float:
        return float(np.mean(self.eigenvalues ** l))


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    """Circulant eigenvalues indexed by ``r = 0..n-1``."""

    values: np.ndarray
    time: float = 0.0

    @property
    def n(self) -> int:
        return self.values.size

    def moment(self, l: int) -> complex:
        return complex(np.mean(self.values ** l))


@dataclass(frozen=True)
class MomentEstimate:
    order: int
    estimate: float
    stderr: float
    trials: int
    time: float = 1.0
    alpha: float = 1.0
    theory: float | None = None

    @property
    def rel_err(self) -> float | None:
        if self.theory is None or self.theory == 0:
            return None
        return abs(self.estimate - self.theory) / abs(self.theory)

    @classmethod
    def from_samples(cls, order, samples, **kw) -> "MomentEstimate":
        samples = np.asarray(samples, dtype=float)
        if samples.size < 2:
            raise ValidationError("a moment estimate needs at least 2 trials", field="trials")
        return cls(order, float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size)),
                   samples.size, **kw)


def eig_symmetric(snapshot: MatrixSnapshot, verify: bool = False) -> Esd:
    """All eigenvalues of a symmetric snapshot.

    ``verify=True`` spot-checks residuals ``|A v - lambda v| <= 1e-8 |A|`` for
    the extreme and middle eigenpairs.
    """
    if snapshot.n > MAX_ORDER:
        raise CapacityError(f"order {snapshot.n} exceeds the eigensolver cap {MAX_ORDER}")
    a = snapshot.entries
    if not np.array_equal(a, a.T):
        raise ContractError("eig_symmetric needs a symmetric snapshot")
    try:
        if verify:
            w, v = np.linalg.eigh(a)
            norm = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
            for k in {0, a.shape[0] // 2, a.shape[0] - 1}:
                if np.linalg.norm(a @ v[:, k] - w[k] * v[:, k]) > 1e-8 * norm:
                    raise NumericError(f"eigenpair {k} residual above tolerance")
        else:
            w = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"symmetric eigensolver did not converge: {exc}") from exc
    return Esd(w, snapshot.time)


def circulant_eigenvalues(snapshot: MatrixSnapshot, kind=None) -> np.ndarray:
    """Indexed eigenvalues ``lambda_r = sum_j a_j exp(2 pi i r j / n)`` of a circulant-type matrix.

    Works for the circulant and symmetric circulant kinds, whose matrices share
    the Fourier eigenbasis; the symmetric case returns real values.
    """
    kind = _family_kind(snapshot, kind)
    if kind not in (LinkKind.CIRCULANT, LinkKind.SYMMETRIC_CIRCULANT):
        raise ContractError(f"indexed eigenvalues are not defined for {kind.value}")
    row = snapshot.first_row()
    lam = np.conj(np.fft.fft(row))
    if kind is LinkKind.SYMMETRIC_CIRCULANT:
        return lam.real.copy()
    return lam


def _family_kind(snapshot: MatrixSnapshot, kind) -> LinkKind:
    kind = LinkKind.parse(kind) if kind is not None else snapshot.kind
    if kind is None or not kind.circulant_family:
        raise ContractError("snapshot is not from the circulant family")
    if snapshot.kind is not None and snapshot.kind is not kind:
        raise ContractError(f"snapshot kind {snapshot.kind.value} does not match {kind.value}")
    return kind


def eig_circulant_family(snapshot: MatrixSnapshot, kind=None):
    """Exact spectrum from the first row via the DFT.

    Circulant gives a :class:`ComplexSpectrum`; the symmetric circulant and the
    reverse circulant give an :class:`Esd`.  The reverse circulant spectrum is
    ``F_0``, ``F_{n/2}`` (even ``n``) and ``+-|F_k|`` for ``0 < k < n/2``.
    """
    kind = _family_kind(snapshot, kind)
    if kind is LinkKind.CIRCULANT:
        return ComplexSpectrum(circulant_eigenvalues(snapshot, kind), snapshot.time)
    if kind is LinkKind.SYMMETRIC_CIRCULANT:
        return Esd(circulant_eigenvalues(snapshot, kind), snapshot.time)
    row = snapshot.first_row()
    n = row.size
    f = np.fft.fft(row)
    mags = np.abs(f[1:(n + 1) // 2])
    parts = [f[:1].real, mags, -mags]
    if n % 2 == 0:
        parts.append(f[n // 2:n // 2 + 1].real)
    return Esd(np.concatenate(parts), snapshot.time)


def cosine_display_eigenvalues(row_values) -> np.ndarray:
    """Symmetric circulant eigenvalues ``a_0 + 2 sum_j a_j cos(2 pi r j / n)`` for odd ``n``.

    ``row_values`` is the full first row; only ``a_0 .. a_{(n-1)/2}`` are used.
    """
    a = np.asarray(row_values, dtype=float)
    n = a.size
    if n % 2 == 0:
        raise ValidationError("the cosine form holds for odd n only", field="n")
    j = np.arange(1, (n - 1) // 2 + 1)
    r = np.arange(n)
    return a[0] + 2.0 * np.cos(2.0 * math.pi * np.outer(r, j) / n) @ a[j]


def spectrum(snapshot: MatrixSnapshot):
    """Eigenvalues by the cheapest exact route for the snapshot's kind."""
    if snapshot.kind is not None and snapshot.kind.circulant_family:
        return eig_circulant_family(snapshot)
    return eig_symmetric(snapshot)


def trace_of_monomial(snapshots: Sequence[MatrixSnapshot], transposes=None) -> float:
    """``n^-1 Trace`` of the ordered product, with flagged factors transposed.

    Products of circulant and symmetric circulant factors are evaluated from
    their indexed eigenvalues (conjugated for transposes).
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise ValidationError("empty monomial", field="snapshots")
    flags = [False] * len(snapshots) if transposes is None else [bool(f) for f in transposes]
    if len(flags) != len(snapshots):
        raise ValidationError("one transpose flag per factor is required", field="transposes")
    n = snapshots[0].n
    if any(s.n != n for s in snapshots):
        raise ValidationError("factors must have a common order", field="snapshots")
    fourier = (LinkKind.CIRCULANT, LinkKind.SYMMETRIC_CIRCULANT)
    if all(s.kind in fourier for s in snapshots):
        prod = np.ones(n, dtype=complex)
        for s, f in zip(snapshots, flags):
            lam = circulant_eigenvalues(s)
            prod = prod * (np.conj(lam) if f else lam)
        out = prod.mean()
        return float(out.real) if abs(out.imag) <= 1e-12 * max(1.0, abs(out)) else complex(out)
    mats = [s.entries.T if f else s.entries for s, f in zip(snapshots, flags)]
    if len(mats) == 1:
        return float(np.trace(mats[0])) / n
    left = mats[0]
    for m in mats[1:-1]:
        left = left @ m
    # trace(P B) without forming the last product
    return float(np.sum(left * mats[-1].T)) / n


def empirical_moment(obj, l: int) -> float:
    """``n^-1 sum lambda^l`` for a spectrum, or ``n^-1 Trace(A^l)`` for a snapshot."""
    if int(l) != l or l < 1:
        raise ValidationError(f"moment order must be a positive integer, got {l}", field="l")
    if isinstance(obj, (Esd, ComplexSpectrum)):
        return obj.moment(l)
    if isinstance(obj, MatrixSnapshot):
        if obj.kind is not None and obj.kind.circulant_family or obj.symmetric:
            return spectrum(obj).moment(l)
        return trace_of_monomial([obj] * l)
    raise ValidationError("expected an Esd, ComplexSpectrum or MatrixSnapshot", field="obj")


def theory_moment(config: ProcessConfig, l: int, t: float):
    try:
        return limit_moment_closed(config.kind, l, t, config.alpha)
    except NoClosedFormError:
        return None


def moment_estimates(config: ProcessConfig, orders: Sequence[int], t: float | None = None,
                     trials: int | None = None) -> list:
    """Trial-averaged empirical moments at time ``t`` (default: last grid time)."""
    t = config.grid[-1] if t is None else t
    trials = config.trials if trials is None else trials
    samples = np.empty((trials, len(orders)), dtype=complex)
    for trial in range(trials):
        sp = spectrum(build_process(config, trial=trial).at(t))
        samples[trial] = [sp.moment(l) for l in orders]
    out = []
    for k, l in enumerate(orders):
        col = samples[:, k]
        vals = col.real if np.allclose(col.imag, 0.0, atol=1e-12) else np.abs(col)
        out.append(MomentEstimate.from_samples(l, vals, time=t, alpha=config.alpha,
                                               theory=theory_moment(config, l, t)))
    return out


def moment_estimate(config: ProcessConfig, l: int, t: float | None = None) -> MomentEstimate:
    return moment_estimates(config, [l], t)[0]


def ks_distance(esd: Esd, cdf) -> float:
    """Kolmogorov-Smirnov distance between an ESD and a reference CDF.

    ``cdf`` is a callable or a ``(law name, t)`` pair understood by
    :func:`reference_cdf`.
    """
    x = esd.eigenvalues
    if x.size == 0:
        raise ValidationError("empty spectrum", field="esd")
    f = _cdf_callable(cdf)(x)
    n = x.size
    # right limits of the empirical CDF at ties are the last index of each run
    upper = np.searchsorted(x, x, side="right") / n
    lower = np.searchsorted(x, x, side="left") / n
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(f - lower))))


def _cdf_callable(cdf) -> Callable:
    if callable(cdf):
        return cdf
    law, t = cdf
    return lambda x: reference_cdf(law, t, x)


def fd_histogram(values, density: bool = True):
    """Freedman-Diaconis histogram; returns ``(heights, edges)``."""
    values = np.asarray(values, dtype=float)
    if np.ptp(values) == 0:
        c = float(values[0])
        edges = np.array([c - 0.5, c + 0.5])
        return np.array([1.0 if density else float(values.size)]), edges
    return np.histogram(values, bins="fd", density=density)


def write_esd_csv(path, esd: Esd):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "eigenvalue"])
        for k, v in enumerate(esd.eigenvalues):
            w.writerow([k, repr(float(v))])


def write_moments_csv(path, estimates: Sequence[MomentEstimate]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["l", "t", "alpha", "estimate", "stderr", "theory", "rel_err"])
        for e in estimates:
            w.writerow([e.order, e.time, e.alpha, repr(e.estimate), repr(e.stderr),
                        "" if e.theory is None else repr(e.theory),
                        "" if e.rel_err is None else repr(e.rel_err)])

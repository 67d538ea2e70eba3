"""Special functions and closed-form limit moments.

Everything here is pure and stateless.  Gamma ratios go through ``lgamma`` so
that large orders do not overflow; the Mittag-Leffler and Wright functions are
evaluated from their power series with an explicit truncation rule and a
precision-loss guard (alternating series with large ``|z|`` are rejected
rather than silently returning noise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import NoClosedFormError, NumericError, SeriesError, ValidationError
from .patterns import LinkKind

MAX_TERMS = 10_000
TERM_TOL = 1e-15
# a result that lost more than this many orders of magnitude to cancellation is rejected
MAX_CANCELLATION = 1e8


@dataclass(frozen=True)
class MomentSpec:
    order: int
    time: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValidationError(f"moment order must be a positive integer, got {self.order}",
                                  field="order")
        if self.time < 0:
            raise ValidationError(f"time must be nonnegative, got {self.time}", field="time")
        check_alpha(self.alpha)


def check_alpha(alpha: float) -> float:
    if not (0.0 < alpha <= 1.0):
        raise ValidationError(f"alpha must lie in (0, 1], got {alpha}", field="alpha")
    return float(alpha)


def catalan(m: int) -> int:
    """The ``m``-th Catalan number ``(2m)! / ((m+1)! m!)`` for ``1 <= m <= 30``."""
    if int(m) != m or m < 1 or m > 30:
        raise ValidationError(f"catalan supports integer 1 <= m <= 30, got {m}", field="m")
    m = int(m)
    return math.comb(2 * m, m) // (m + 1)


def double_factorial_odd(m: int) -> int:
    """``(2m - 1)!!``, the number of pair partitions of ``2m`` points."""
    out = 1
    for k in range(1, 2 * m, 2):
        out *= k
    return out


def gamma_ratio(a: float, b: float) -> float:
    """``Gamma(a) / Gamma(b)`` for positive arguments via log-gamma."""
    return math.exp(math.lgamma(a) - math.lgamma(b))


def inverse_subordinator_moment(l: int, t: float, alpha: float) -> float:
    """``E L(t)^l = t^(l alpha) Gamma(l+1) / Gamma(l alpha + 1)``."""
    if int(l) != l or l < 1:
        raise ValidationError(f"moment order must be a positive integer, got {l}", field="l")
    if t < 0:
        raise ValidationError(f"time must be nonnegative, got {t}", field="t")
    alpha = check_alpha(alpha)
    if t == 0:
        return 0.0
    if alpha == 1.0:
        return float(t) ** l
    return t ** (l * alpha) * gamma_ratio(l + 1, l * alpha + 1)


def limit_moment_closed(kind, order: int, t: float = 1.0, alpha: float = 1.0) -> float:
    """Limiting ``order``-th spectral moment with a known closed form.

    Wigner gives Catalan numbers, the symmetric circulant Gaussian moments and
    the reverse circulant ``m!``; each even moment ``2m`` is multiplied by
    ``E L(t)^m`` (which is ``t^m`` when ``alpha = 1``).
    """
    spec = order if isinstance(order, MomentSpec) else MomentSpec(order, t, alpha)
    kind = LinkKind.parse(kind)
    if kind not in (LinkKind.WIGNER, LinkKind.SYMMETRIC_CIRCULANT, LinkKind.REVERSE_CIRCULANT):
        raise NoClosedFormError(f"no closed-form limit moments for {kind.value}")
    if kind is LinkKind.REVERSE_CIRCULANT and spec.alpha < 1.0:
        raise NoClosedFormError("reverse circulant limit is only available for alpha = 1")
    if spec.order % 2:
        return 0.0
    m = spec.order // 2
    clock = inverse_subordinator_moment(m, spec.time, spec.alpha)
    if kind is LinkKind.WIGNER:
        return catalan(m) * clock
    if kind is LinkKind.SYMMETRIC_CIRCULANT:
        return double_factorial_odd(m) * clock
    return math.factorial(m) * clock


def _log_rgamma(x: float):
    """Return ``(log|1/Gamma(x)|, sign)``; sign 0 at the poles of Gamma."""
    if x <= 0 and x == math.floor(x):
        return -math.inf, 0
    if x > 0:
        return -math.lgamma(x), 1
    sign = -1 if math.floor(-x) % 2 == 0 else 1
    return -math.lgamma(x), sign


def _sum_power_series(log_coef, z, label):
    """Sum ``sum_r c_r z^r`` where ``log_coef(r)`` gives ``(log|c_r|, sign)``.

    Stops once a term drops below ``TERM_TOL`` (absolute, or relative to the
    partial sum) while successive term ratios are below one, so the remaining
    tail is geometrically bounded.
    """
    is_complex = isinstance(z, complex)
    if z == 0:
        logc, sign = log_coef(0)
        return sign * math.exp(logc) if sign else 0.0
    logz = math.log(abs(z))
    phase = z / abs(z) if is_complex else (1.0 if z > 0 else -1.0)
    terms = []
    prev = None
    biggest = 0.0
    for r in range(MAX_TERMS):
        logc, sign = log_coef(r)
        if sign == 0:
            mag = 0.0
        else:
            logmag = logc + r * logz
            mag = math.exp(logmag) if logmag > -745 else 0.0
        term = sign * mag * (phase ** r)
        terms.append(term)
        biggest = max(biggest, mag)
        if prev is not None and mag < prev and r > 1:
            partial = abs(sum(terms)) if is_complex else abs(math.fsum(terms))
            if mag <= TERM_TOL * max(1.0, partial) or mag == 0.0:
                total = sum(terms) if is_complex else math.fsum(terms)
                if biggest > 0 and abs(total) > 0 and biggest / abs(total) > MAX_CANCELLATION:
                    raise NumericError(
                        f"{label}: cancellation too severe (max term {biggest:.3g}, "
                        f"sum {abs(total):.3g}); |z| is outside the series regime")
                return total
        prev = mag
    total = sum(terms) if is_complex else math.fsum(terms)
    raise SeriesError(f"{label}: series did not converge in {MAX_TERMS} terms",
                      partial_sum=total, last_term=terms[-1], terms=len(terms))


def mittag_leffler_3p(a: float, b: float, g: float, z):
    """Three-parameter Mittag-Leffler ``E^g_{a,b}(z)``.

    ``sum_r Gamma(g+r) z^r / (r! Gamma(g) Gamma(a r + b))``.  Only the
    moderate-``|z|`` regime is supported.
    """
    if a <= 0:
        raise ValidationError(f"a must be positive, got {a}", field="a")

    def log_coef(r):
        lr, sr = _log_rgamma(a * r + b)
        if sr == 0:
            return -math.inf, 0
        if g > 0:
            return math.lgamma(g + r) - math.lgamma(g) - math.lgamma(r + 1) + lr, sr
        # Pochhammer (g)_r as a product so that any real g works
        lp, sp = 0.0, 1
        for k in range(r):
            f = g + k
            if f == 0:
                return -math.inf, 0
            lp += math.log(abs(f))
            sp *= 1 if f > 0 else -1
        return lp - math.lgamma(r + 1) + lr, sp * sr

    return _sum_power_series(log_coef, z, "mittag_leffler_3p")


def wright(nu: float, mu: float, z):
    """Wright function ``W_{nu,mu}(z) = sum_r z^r / (r! Gamma(nu r + mu))``."""
    if nu <= 0 or mu <= 0:
        raise ValidationError("wright needs nu > 0 and mu > 0", field="nu" if nu <= 0 else "mu")

    def log_coef(r):
        return -math.lgamma(r + 1) - math.lgamma(nu * r + mu), 1

    return _sum_power_series(log_coef, z, "wright")


def semicircle_mgf(u: float, t: float) -> float:
    """``E exp(u Z)`` for a centred semicircle of variance ``t``: ``I_1(2 sqrt(t) u)/(sqrt(t) u)``."""
    if u == 0:
        return 1.0
    x = math.sqrt(t) * u
    return float(special.iv(1, 2 * x) / x)


def tc_semicircle_mgf(u, t: float, alpha: float):
    """MGF of a semicircle variable evaluated at an inverse-subordinator time.

    Equals ``(u^2 t^a)^{-1} (W_{a,1-a}(u^2 t^a) - 1/Gamma(1-a))``.  The
    subtraction removes the ``r = 0`` term of the Wright series exactly, so the
    remaining series ``sum_{r>=1} z^{r-1} / (r! Gamma(a r + 1 - a))`` is summed
    directly; this avoids cancellation for small ``u``.  ``alpha = 1`` falls
    back to the plain semicircle MGF.
    """
    if t <= 0:
        raise ValidationError(f"t must be positive, got {t}", field="t")
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return semicircle_mgf(u, t)
    if u == 0:
        return 1.0
    z = u * u * t ** alpha

    def log_coef(r):
        # coefficient of z^r in the shifted series: 1 / ((r+1)! Gamma(alpha r + 1))
        return -math.lgamma(r + 2) - math.lgamma(alpha * r + 1), 1

    return _sum_power_series(log_coef, z, "tc_semicircle_mgf")


REFERENCE_KINDS = ("semicircle", "gaussian", "symmetrized_rayleigh")


def reference_cdf(kind: str, t: float, x):
    """CDF of the named limit law with variance parameter ``t`` (vectorised in ``x``).

    ``symmetrized_rayleigh`` is ``eps * R`` with a fair random sign ``eps`` and
    ``R`` Rayleigh with ``E R^2 = t``, so that ``E X^{2m} = t^m m!``.
    """
    if t <= 0:
        raise ValidationError(f"t must be positive, got {t}", field="t")
    x = np.asarray(x, dtype=float)
    if kind == "semicircle":
        y = np.clip(x / (2.0 * math.sqrt(t)), -1.0, 1.0)
        out = 0.5 + (y * np.sqrt(1.0 - y * y) + np.arcsin(y)) / math.pi
    elif kind == "gaussian":
        out = special.ndtr(x / math.sqrt(t))
    elif kind == "symmetrized_rayleigh":
        out = 0.5 + 0.5 * np.sign(x) * (-np.expm1(-x * x / t))
    else:
        raise ValidationError(f"unknown reference law {kind!r}", field="kind")
    return out if out.ndim else float(out)


def reference_pdf(kind: str, t: float, x):
    """Density matching :func:`reference_cdf`."""
    if t <= 0:
        raise ValidationError(f"t must be positive, got {t}", field="t")
    x = np.asarray(x, dtype=float)
    if kind == "semicircle":
        out = np.sqrt(np.clip(4.0 * t - x * x, 0.0, None)) / (2.0 * math.pi * t)
    elif kind == "gaussian":
        out = np.exp(-x * x / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    elif kind == "symmetrized_rayleigh":
        out = np.abs(x) / t * np.exp(-x * x / t)
    else:
        raise ValidationError(f"unknown reference law {kind!r}", field="kind")
    return out if out.ndim else float(out)


def reference_law_for(kind) -> str:
    """Name of the limiting law of the ``alpha = 1`` ensemble for a link kind."""
    kind = LinkKind.parse(kind)
    try:
        return {LinkKind.WIGNER: "semicircle",
                LinkKind.SYMMETRIC_CIRCULANT: "gaussian",
                LinkKind.REVERSE_CIRCULANT: "symmetrized_rayleigh"}[kind]
    except KeyError:
        raise NoClosedFormError(f"no closed-form limit law for {kind.value}") from None


__all__ = [
    "MomentSpec", "catalan", "double_factorial_odd", "gamma_ratio",
    "inverse_subordinator_moment", "limit_moment_closed", "mittag_leffler_3p",
    "wright", "semicircle_mgf", "tc_semicircle_mgf", "reference_cdf", "reference_pdf",
    "reference_law_for", "check_alpha",
]

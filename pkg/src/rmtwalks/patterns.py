"""Link functions and their structural diagnostics.

A link function maps a matrix position ``(i, j)`` (1-based) to a value; two
positions with the same value carry the same input random variable.  Every
link is turned into a :class:`LinkTable` that stores a dense canonical class
id per position, so an ensemble needs exactly one random walk per class.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError


class LinkKind(enum.Enum):
    WIGNER = "Wigner"
    SYM_TOEPLITZ = "SymToeplitz"
    SYM_HANKEL = "SymHankel"
    REVERSE_CIRCULANT = "ReverseCirculant"
    SYMMETRIC_CIRCULANT = "SymmetricCirculant"
    CIRCULANT = "Circulant"
    ELLIPTIC_IID = "EllipticIID"

    @property
    def dimension(self) -> int:
        return 2 if self is LinkKind.WIGNER else 1

    @property
    def symmetric(self) -> bool:
        return self not in (LinkKind.CIRCULANT, LinkKind.ELLIPTIC_IID)

    @property
    def circulant_family(self) -> bool:
        return self in (LinkKind.SYMMETRIC_CIRCULANT, LinkKind.REVERSE_CIRCULANT,
                        LinkKind.CIRCULANT)

    @classmethod
    def parse(cls, value) -> "LinkKind":
        if isinstance(value, cls):
            return value
        for kind in cls:
            if value in (kind.value, kind.name) or str(value).lower() == kind.value.lower():
                return kind
        raise ValidationError(f"unknown link kind {value!r}", field="kind")


def _check_indices(n, i, j):
    i = np.asarray(i)
    j = np.asarray(j)
    if n < 1:
        raise ValidationError(f"matrix order must be positive, got {n}", field="n")
    if np.any(i < 1) or np.any(i > n) or np.any(j < 1) or np.any(j > n):
        raise ValidationError(f"indices must lie in 1..{n}", field="index")
    return i.astype(np.int64), j.astype(np.int64)


def link_value(kind: LinkKind, n: int, i, j):
    """Raw link value ``L(i, j)`` for 1-based indices (vectorised).

    The two-dimensional Wigner value ``(max, min)`` is encoded as the
    triangular number ``max (max - 1) / 2 + min``, which does not depend on
    ``n``.  The symmetric circulant uses the literal
    ``n/2 - |n/2 - |i - j||``, which equals ``min(|i-j|, n-|i-j|)``.
    """
    kind = LinkKind.parse(kind)
    i, j = _check_indices(n, i, j)
    if kind is LinkKind.WIGNER:
        hi = np.maximum(i, j)
        return hi * (hi - 1) // 2 + np.minimum(i, j)
    if kind is LinkKind.SYM_TOEPLITZ:
        return np.abs(i - j)
    if kind is LinkKind.SYM_HANKEL:
        return i + j - 2
    if kind is LinkKind.REVERSE_CIRCULANT:
        return (i + j - 2) % n
    if kind is LinkKind.SYMMETRIC_CIRCULANT:
        d = np.abs(i - j)
        return np.minimum(d, n - d)
    if kind is LinkKind.CIRCULANT:
        return (j - i + n) % n
    # EllipticIID: every ordered pair is its own variable
    return (i - 1) * n + (j - 1)


@dataclass(frozen=True)
class LinkTable:
    """Canonical class ids for every position of an ``n x n`` matrix.

    ``index[i-1, j-1]`` is the dense id of ``L(i, j)``; ids are assigned in
    order of first occurrence in a row-major scan.  For the elliptic kind,
    ``partner[c]`` is the class of the transposed position and ``diagonal[c]``
    flags classes on the main diagonal; both are ``None`` for other kinds.
    """

    kind: LinkKind
    n: int
    index: np.ndarray
    num_classes: int
    partner: np.ndarray | None = None
    diagonal: np.ndarray | None = None

    def __post_init__(self):
        self.index.setflags(write=False)

    def first_row(self) -> np.ndarray:
        return self.index[0]


@lru_cache(maxsize=8)
def link_table(kind: LinkKind, n: int) -> LinkTable:
    kind = LinkKind.parse(kind)
    if n < 1:
        raise ValidationError(f"matrix order must be positive, got {n}", field="n")
    ii, jj = np.indices((n, n)) + 1
    values = link_value(kind, n, ii, jj).ravel()
    _, first, inverse = np.unique(values, return_index=True, return_inverse=True)
    # relabel sorted-unique ids by order of first appearance
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    index = rank[inverse].reshape(n, n)
    partner = diagonal = None
    if kind is LinkKind.ELLIPTIC_IID:
        partner = np.empty(first.size, dtype=np.int64)
        partner[index.ravel()] = index.T.ravel()
        diagonal = np.zeros(first.size, dtype=bool)
        diagonal[np.diag(index)] = True
        partner.setflags(write=False)
        diagonal.setflags(write=False)
    return LinkTable(kind, n, index, int(first.size), partner, diagonal)


def link_index(kind: LinkKind, n: int, i, j):
    """Canonical class id of ``L(i, j)`` (1-based indices)."""
    i, j = _check_indices(n, i, j)
    out = link_table(kind, n).index[i - 1, j - 1]
    return int(out) if out.ndim == 0 else out


def delta_L(kind: LinkKind, n: int) -> int:
    """Largest number of times one link value occurs within a single row."""
    if n < 2:
        raise ValidationError("delta_L needs n >= 2", field="n")
    table = link_table(kind, n)
    return int(max(np.bincount(row).max() for row in table.index))


def matched_set_size(kind: LinkKind, n: int, i: int, j: int) -> int:
    """``#{k : L(k, i) = L(k, j)}`` for distinct columns ``i`` and ``j``."""
    if i == j:
        raise ValidationError("matched sets are defined for i != j", field="j")
    i, j = _check_indices(n, i, j)
    table = link_table(kind, n)
    return int(np.count_nonzero(table.index[:, i - 1] == table.index[:, j - 1]))


def beta_n(kind: LinkKind, n: int) -> int:
    """Size of the largest link class: ``max_r #{(i, j) : L(i, j) = r}``."""
    table = link_table(kind, n)
    return int(np.bincount(table.index.ravel()).max())

"""Words, circuits and brute-force class counts.

A circuit ``pi(0..l)`` with ``pi(0) = pi(l)`` belongs to word ``w`` when its
consecutive link values coincide exactly where the letters of ``w`` do.
Counting is exact and vectorised over circuit prefixes.
"""
from __future__ import annotations

import csv
import string
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .patterns import link_table

# largest number of circuit prefixes held in memory at once
_PREFIX_BUDGET = 1 << 22
# full enumeration of every circuit
_ALL_BUDGET = 1 << 22
# prefix count allowed for words longer than 6
_LONG_WORD_BUDGET = 32 ** 4


def _check_word(w: str) -> str:
    if not w or len(w) % 2:
        raise ValidationError(f"word {w!r} must have even positive length", field="word")
    counts = Counter(w)
    if any(c != 2 for c in counts.values()):
        raise ValidationError(f"word {w!r} is not pair-matched", field="word")
    seen = []
    for ch in w:
        if ch not in seen:
            seen.append(ch)
    if "".join(seen) != string.ascii_lowercase[:len(seen)]:
        raise ValidationError(f"word {w!r} is not in first-occurrence order", field="word")
    return w


def enumerate_pair_matched(m: int) -> list:
    """All pair-matched words of length ``2m`` (``1 <= m <= 5``), in lexicographic order."""
    if int(m) != m or not 1 <= m <= 5:
        raise ValidationError(f"m must lie in 1..5, got {m}", field="m")
    out = []

    def grow(prefix, used):
        if len(prefix) == 2 * m:
            out.append("".join(prefix))
            return
        counts = Counter(prefix)
        # reuse any letter seen once, or open the next fresh letter
        for ch in string.ascii_lowercase[:used]:
            if counts[ch] == 1:
                grow(prefix + [ch], used)
        if used < m:
            grow(prefix + [string.ascii_lowercase[used]], used + 1)

    grow([], 0)
    return sorted(out)


def is_noncrossing(w: str) -> bool:
    stack = []
    for ch in _check_word(w):
        if stack and stack[-1] == ch:
            stack.pop()
        elif ch in stack:
            return False
        else:
            stack.append(ch)
    return not stack


def is_odd_even_matched(w: str) -> bool:
    """Every letter occupies one odd and one even position."""
    first = {}
    for pos, ch in enumerate(_check_word(w)):
        if ch in first:
            if (pos - first[ch]) % 2 == 0:
                return False
        else:
            first[ch] = pos
    return True


def _word_pattern(w: str):
    """For each position: index of the letter's first position (or -1 when fresh)."""
    first = {}
    ref = []
    for pos, ch in enumerate(w):
        ref.append(first.get(ch, -1))
        first.setdefault(ch, pos)
    return ref


def count_circuits(kind, n: int, w: str) -> int:
    """Exact ``#{pi : w(i) = w(j) iff L(pi(i-1), pi(i)) = L(pi(j-1), pi(j))}``."""
    w = _check_word(w)
    l = len(w)
    m = l // 2
    if l <= 6 and n > 32:
        raise CapacityError(f"brute force supports n <= 32 for words up to length 6, got n={n}")
    if l > 6 and n ** (m + 1) > _LONG_WORD_BUDGET:
        raise CapacityError(f"n={n} is too large for brute force on a word of length {l}")
    index = link_table(kind, n).index
    ref = _word_pattern(w)
    total = 0
    for start in range(n):
        # each row: vertices visited so far and the link class of each step
        verts = np.array([[start]], dtype=np.int64)
        classes = np.empty((1, 0), dtype=np.int64)
        for pos in range(l):
            cur = verts[:, -1]
            if pos == l - 1:
                nxt = np.full((cur.size, 1), start, dtype=np.int64)
            else:
                nxt = np.broadcast_to(np.arange(n), (cur.size, n))
            cand = index[cur[:, None], nxt]
            if ref[pos] >= 0:
                keep = cand == classes[:, ref[pos]][:, None]
            else:
                # a fresh letter must differ from every earlier letter's class
                keep = np.ones(cand.shape, dtype=bool)
                for q in range(pos):
                    if ref[q] < 0:
                        keep &= cand != classes[:, q][:, None]
            rows, cols = np.nonzero(keep)
            if rows.size > _PREFIX_BUDGET:
                raise CapacityError(f"prefix expansion exceeds {_PREFIX_BUDGET} rows")
            verts = np.concatenate((verts[rows], nxt[rows, cols][:, None]), axis=1)
            classes = np.concatenate((classes[rows], cand[rows, cols][:, None]), axis=1)
            if not rows.size:
                break
        total += verts.shape[0] if verts.shape[1] == l + 1 else 0
    return int(total)


def count_all_classes(kind, n: int, l: int) -> dict:
    """Counts of every circuit of length ``l`` grouped by its link-value coincidence word."""
    if n ** l > _ALL_BUDGET:
        raise CapacityError(f"{n}^{l} circuits exceed the enumeration budget")
    index = link_table(kind, n).index
    verts = np.indices((n,) * l).reshape(l, -1).T
    verts = np.concatenate((verts, verts[:, :1]), axis=1)
    classes = index[verts[:, :-1], verts[:, 1:]]
    # relabel each row by first occurrence
    letters = np.zeros_like(classes)
    fresh = np.zeros(classes.shape[0], dtype=np.int64)
    for pos in range(l):
        lab = np.full(classes.shape[0], -1)
        for q in range(pos):
            hit = (classes[:, q] == classes[:, pos]) & (lab < 0)
            lab[hit] = letters[hit, q]
        new = lab < 0
        lab[new] = fresh[new]
        fresh[new] += 1
        letters[:, pos] = lab
    alphabet = np.array(list(string.ascii_lowercase))
    words, counts = np.unique(letters, axis=0, return_counts=True)
    return {"".join(alphabet[row]): int(c) for row, c in zip(words, counts)}


@dataclass(frozen=True)
class CombinatorialLimit:
    """Word-sum ``t^m sum_w #Pi(w) / n^(1+m)`` at several orders, with 1/n extrapolation."""

    kind: str
    m: int
    t: float
    orders: tuple
    ratios: dict
    sums: tuple
    value: float
    extrapolated: float


def extrapolate(n1: int, f1: float, n2: int, f2: float) -> float:
    """Two-point Richardson extrapolation assuming ``f(n) = f_inf + c/n``."""
    return (n2 * f2 - n1 * f1) / (n2 - n1)


def limit_moment_combinatorial(kind, m: int, t: float = 1.0, samples=(8, 16, 24)) -> CombinatorialLimit:
    samples = tuple(int(s) for s in samples)
    if int(m) != m or not 1 <= m <= 3:
        raise ValidationError(f"brute-force limits support m in 1..3, got {m}", field="m")
    if len(samples) < 2:
        raise ValidationError("need at least two orders for extrapolation", field="samples")
    words = enumerate_pair_matched(m)
    ratios = {w: tuple(count_circuits(kind, n, w) / n ** (1 + m) for n in samples) for w in words}
    sums = tuple(sum(r[k] for r in ratios.values()) for k in range(len(samples)))
    scale = t ** m
    ext = extrapolate(samples[-2], sums[-2], samples[-1], sums[-1])
    return CombinatorialLimit(str(getattr(kind, "value", kind)), m, t, samples, ratios,
                              tuple(scale * s for s in sums), scale * sums[-1], scale * ext)


def write_words_csv(path, result: CombinatorialLimit):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "word", "n", "count", "ratio", "extrapolated"])
        for word, ratios in result.ratios.items():
            ext = extrapolate(result.orders[-2], ratios[-2], result.orders[-1], ratios[-1])
            for n, r in zip(result.orders, ratios):
                count = round(r * n ** (1 + result.m))
                w.writerow([result.kind, word, n, count, repr(r), repr(ext)])

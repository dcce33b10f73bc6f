"""One-sided topological Markov shifts over a finite alphabet.

Symbols are the 1-based integers ``1..k`` everywhere in the public API.
Internally (kernels, arrays) symbols are 0-based.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import CapExceededError, ValidationError

DEFAULT_ENUM_CAP = 10**7
CAP_ENV = "INDUCED_PRESSURE_ENUM_CAP"


def enumeration_cap(cap=None):
    """Resolve the enumeration cap: explicit value, then env var, then default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(CAP_ENV)
    if env:
        return int(float(env))
    return DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class Sft:
    """Shift space defined by a 0/1 transition matrix ``A = (t_ij)``."""

    transitions: tuple

    def __post_init__(self):
        raw = self.transitions
        if isinstance(raw, np.ndarray):
            raw = raw.tolist()
        k = len(raw)
        if k < 1:
            raise ValidationError("alphabet_size must be at least 1")
        for i, row in enumerate(raw, start=1):
            if len(row) != k:
                raise ValidationError(f"row {i} has {len(row)} entries, expected {k}")
            if any(v not in (0, 1) for v in row):
                raise ValidationError(f"row {i} contains entries other than 0/1")
        rows = tuple(tuple(int(v) for v in row) for row in raw)
        object.__setattr__(self, "transitions", rows)
        for i, row in enumerate(rows, start=1):
            if not any(row):
                raise ValidationError(f"row {i} is all zeros")
        for j in range(k):
            if not any(rows[i][j] for i in range(k)):
                raise ValidationError(f"column {j + 1} is all zeros")

    @classmethod
    def full_shift(cls, k):
        return cls(tuple((1,) * k for _ in range(k)))

    @classmethod
    def golden_mean(cls):
        return cls(((1, 1), (1, 0)))

    @property
    def alphabet_size(self):
        return len(self.transitions)

    @cached_property
    def matrix(self):
        a = np.array(self.transitions, dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def _succ(self):
        k = self.alphabet_size
        deg = self.matrix.sum(axis=1).astype(np.int64)
        succ = np.full((k, int(deg.max())), -1, dtype=np.int64)
        for i in range(k):
            nz = np.flatnonzero(self.matrix[i])
            succ[i, : len(nz)] = nz
        deg.setflags(write=False)
        succ.setflags(write=False)
        return succ, deg

    def is_admissible(self, word):
        """True iff ``word`` (1-based symbols) is an admissible finite word."""
        k = self.alphabet_size
        if len(word) == 0 or any(not 1 <= s <= k for s in word):
            return False
        return all(self.transitions[a - 1][b - 1] for a, b in zip(word, word[1:]))

    def __repr__(self):
        return f"Sft(k={self.alphabet_size}, transitions={self.transitions})"


def count_words(sft, n):
    """Number of admissible words of length ``n`` (exact integer).

    Equals the sum of the entries of ``A**(n-1)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = sft.transitions
    k = sft.alphabet_size
    v = [1] * k
    for _ in range(n - 1):
        v = [sum(v[j] for j in range(k) if a[i][j]) for i in range(k)]
    return sum(v)


def _symbol_dtype(k):
    return np.uint8 if k <= 255 else np.int32


def word_array(sft, n, cap=None):
    """All admissible words of length ``n`` as a 0-based integer array.

    Rows are in lexicographic order.  Raises :class:`CapExceededError` when
    the word count exceeds the cap.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cap = enumeration_cap(cap)
    count = count_words(sft, n)
    if count > cap:
        raise CapExceededError(count, cap)
    succ, deg = sft._succ
    out = _kernels.enumerate_words(succ, deg, n, count, _symbol_dtype(sft.alphabet_size))
    return out


def enumerate_words(sft, n, cap=None):
    """Admissible words of length ``n`` as 1-based tuples, lexicographic."""
    arr = word_array(sft, n, cap)
    return [tuple(int(s) + 1 for s in row) for row in arr]


def is_irreducible(sft):
    """True iff every symbol reaches every symbol by a path of length >= 1."""
    reach = sft.matrix.astype(bool)
    for m in range(sft.alphabet_size):
        reach = reach | (reach[:, m : m + 1] & reach[m : m + 1, :])
    return bool(reach.all())


def primitivity_exponent(sft):
    """Smallest N with ``A**N > 0`` entrywise, or None if A is not primitive.

    The search stops at the Wielandt bound ``(k-1)**2 + 1``.
    """
    k = sft.alphabet_size
    a = sft.matrix.astype(bool)
    b = a.copy()
    for n in range(1, (k - 1) ** 2 + 2):
        if b.all():
            return n
        b = (b.astype(np.int64) @ a.astype(np.int64)) > 0
    return None


def is_mixing(sft):
    return primitivity_exponent(sft) is not None


def period(sft):
    """Period of an irreducible shift (gcd of cycle lengths)."""
    if not is_irreducible(sft):
        raise ValidationError("period is defined for irreducible shifts only")
    succ, deg = sft._succ
    level = {0: 0}
    frontier = [0]
    g = 0
    while frontier:
        nxt = []
        for u in frontier:
            for v in succ[u, : deg[u]]:
                v = int(v)
                if v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    for u in range(sft.alphabet_size):
        for v in succ[u, : deg[u]]:
            g = math.gcd(g, level[u] + 1 - level[int(v)])
    return abs(g)

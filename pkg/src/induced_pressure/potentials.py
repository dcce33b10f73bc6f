"""Locally constant potentials, Birkhoff sums and higher-block recoding."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .sft import Sft, enumerate_words

PSI_FLOOR = 1e-9


def word_code(word, k):
    """Base-k code of a 0-based word (most significant symbol first)."""
    code = 0
    for s in word:
        code = code * k + s
    return code


@dataclass(frozen=True)
class LocallyConstantPotential:
    """Real function of the first ``memory`` symbols of a point.

    ``table`` maps every admissible word of length ``memory`` (a tuple of
    1-based symbols) to a finite real value.
    """

    sft: Sft
    memory: int
    table: dict

    def __post_init__(self):
        m = int(self.memory)
        if m < 1:
            raise ValidationError("memory must be a positive integer")
        object.__setattr__(self, "memory", m)
        table = {}
        for key, value in dict(self.table).items():
            word = (key,) if isinstance(key, (int, np.integer)) else tuple(int(s) for s in key)
            if len(word) != m:
                raise ValidationError(f"table key {word} has length {len(word)}, expected memory {m}")
            if not self.sft.is_admissible(word):
                raise ValidationError(f"table key {_fmt(word)} is not an admissible word")
            v = float(value)
            if not math.isfinite(v):
                raise ValidationError(f"table value for {_fmt(word)} is not finite")
            table[word] = v
        expected = enumerate_words(self.sft, m)
        missing = [w for w in expected if w not in table]
        if missing:
            raise ValidationError(f"table has no entry for admissible word {_fmt(missing[0])}")
        object.__setattr__(self, "table", {w: table[w] for w in expected})

    @classmethod
    def constant(cls, sft, c, memory=1):
        return cls(sft, memory, {w: c for w in enumerate_words(sft, memory)})

    @classmethod
    def from_values(cls, sft, values):
        """Memory-1 potential from one value per symbol."""
        if len(values) != sft.alphabet_size:
            raise ValidationError("need exactly one value per symbol")
        return cls(sft, 1, {(i + 1,): v for i, v in enumerate(values)})

    @classmethod
    def from_function(cls, sft, memory, func):
        return cls(sft, memory, {w: func(w) for w in enumerate_words(sft, memory)})

    @cached_property
    def values(self):
        """Dense table indexed by the base-k code of 0-based words; NaN where inadmissible."""
        k = self.sft.alphabet_size
        arr = np.full(k**self.memory, np.nan)
        for w, v in self.table.items():
            arr[word_code([s - 1 for s in w], k)] = v
        arr.setflags(write=False)
        return arr

    def lift(self, memory):
        return lift(self, memory)

    def _combine(self, other, op):
        if isinstance(other, LocallyConstantPotential):
            if other.sft != self.sft:
                raise ValidationError("potentials are defined over different shifts")
            m = max(self.memory, other.memory)
            a, b = lift(self, m), lift(other, m)
            return LocallyConstantPotential(self.sft, m, {w: op(a.table[w], b.table[w]) for w in a.table})
        c = float(other)
        return LocallyConstantPotential(self.sft, self.memory, {w: op(v, c) for w, v in self.table.items()})

    def __add__(self, other):
        return self._combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._combine(other, lambda x, y: y - x)

    def __mul__(self, c):
        c = float(c)
        return LocallyConstantPotential(self.sft, self.memory, {w: c * v for w, v in self.table.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _fmt(word):
    return "".join(str(s) for s in word) if all(s < 10 for s in word) else ".".join(map(str, word))


def min_value(p):
    return min(p.table.values())


def max_value(p):
    return max(p.table.values())


def sup_norm(p):
    return max(abs(v) for v in p.table.values())


def require_positive(p, floor=PSI_FLOOR):
    """Reject ``p`` for the ψ slot unless its minimum exceeds ``floor``."""
    if min_value(p) <= floor:
        raise ValidationError(f"potential must be positive: min value {min_value(p)!r} <= floor {floor!r}")
    return p


def birkhoff_sum(p, word, n=None):
    """``S_n p`` on the cylinder of ``word`` (1-based symbols).

    Needs ``len(word) >= n + memory - 1``; by default ``n`` is the largest
    length the word supports.
    """
    m = p.memory
    if n is None:
        n = len(word) - m + 1
    if n < 1 or len(word) < n + m - 1:
        raise ValidationError(
            f"word of length {len(word)} too short for S_{n} of a memory-{m} potential"
        )
    word = tuple(word)
    total = 0.0
    for i in range(n):
        total += p.table[word[i : i + m]]
    return total


def lift(p, memory):
    """Re-express ``p`` as a potential of larger ``memory`` (same function)."""
    if memory < p.memory:
        raise ValidationError("cannot lower the memory of a potential")
    if memory == p.memory:
        return p
    m = p.memory
    return LocallyConstantPotential(
        p.sft, memory, {w: p.table[w[:m]] for w in enumerate_words(p.sft, memory)}
    )


def higher_block_words(sft, length):
    """Symbols of the ``length``-block presentation, in recoded-symbol order."""
    return enumerate_words(sft, length)


def recode_to_memory2(sft, potentials):
    """Higher-block recoding so that every potential has memory <= 2.

    With ``M`` the largest memory, the new alphabet is the admissible words
    of length ``M - 1`` (symbol ``j`` is ``higher_block_words(sft, M-1)[j-1]``).
    A recoded word of length ``n`` corresponds to an original word of length
    ``n + M - 2`` and Birkhoff sums agree exactly.  Inputs are returned
    unchanged when ``M <= 2``.
    """
    potentials = list(potentials)
    for p in potentials:
        if p.sft != sft:
            raise ValidationError("all potentials must live on the given shift")
    big_m = max((p.memory for p in potentials), default=1)
    if big_m <= 2:
        return sft, potentials
    blocks = higher_block_words(sft, big_m - 1)
    n_blocks = len(blocks)
    trans = [[0] * n_blocks for _ in range(n_blocks)]
    for i, u in enumerate(blocks):
        for j, v in enumerate(blocks):
            if u[1:] == v[:-1] and sft.transitions[u[-1] - 1][v[-1] - 1]:
                trans[i][j] = 1
    new_sft = Sft(tuple(tuple(r) for r in trans))
    out = []
    for p in potentials:
        lifted = lift(p, big_m)
        table = {}
        for i, u in enumerate(blocks):
            for j, v in enumerate(blocks):
                if trans[i][j]:
                    table[(i + 1, j + 1)] = lifted.table[u + (v[-1],)]
        out.append(LocallyConstantPotential(new_sft, 2, table))
    return new_sft, out

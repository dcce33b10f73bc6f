import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from induced_pressure.errors import CapExceededError, ValidationError
from induced_pressure.sft import (
    CAP_ENV,
    Sft,
    count_words,
    enumerate_words,
    enumeration_cap,
    is_irreducible,
    is_mixing,
    period,
    primitivity_exponent,
    word_array,
)

GOLDEN = Sft.golden_mean()
FULL2 = Sft.full_shift(2)
FLIP = Sft(((0, 1), (1, 0)))
ONE = Sft(((1,),))


@st.composite
def transition_matrices(draw, max_k=4):
    k = draw(st.integers(1, max_k))
    rows = draw(st.lists(st.lists(st.integers(0, 1), min_size=k, max_size=k), min_size=k, max_size=k))
    for i in range(k):
        rows[i][(i + 1) % k] = 1  # cyclic permutation keeps rows and columns nonzero
    return Sft(tuple(tuple(r) for r in rows))


def brute_force_words(sft, n):
    k = sft.alphabet_size
    return [w for w in itertools.product(range(1, k + 1), repeat=n) if sft.is_admissible(w)]


class TestConstruction:
    def test_zero_row_rejected(self):
        with pytest.raises(ValidationError, match="row 2"):
            Sft(((1, 1), (0, 0)))

    def test_zero_column_rejected(self):
        with pytest.raises(ValidationError, match="column 2"):
            Sft(((1, 0), (1, 0)))

    def test_non_binary_rejected(self):
        with pytest.raises(ValidationError):
            Sft(((1, 2), (1, 1)))

    def test_ragged_rejected(self):
        with pytest.raises(ValidationError):
            Sft(((1, 1), (1,)))

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            Sft(())

    def test_accepts_numpy(self):
        assert Sft(np.ones((3, 3), dtype=int)) == Sft.full_shift(3)

    def test_matrix_read_only(self):
        with pytest.raises(ValueError):
            GOLDEN.matrix[0, 0] = 0

    def test_hashable_and_equal(self):
        assert hash(Sft.golden_mean()) == hash(GOLDEN)
        assert GOLDEN != FULL2


class TestCountWords:
    def test_full_shift(self):
        assert count_words(FULL2, 3) == 8

    def test_golden_mean(self):
        assert count_words(GOLDEN, 3) == 5

    def test_single_symbol(self):
        assert count_words(ONE, 10) == 1

    def test_fibonacci(self):
        assert [count_words(GOLDEN, n) for n in range(1, 11)] == [2, 3, 5, 8, 13, 21, 34, 55, 89, 144]

    def test_large_counts_are_exact(self):
        assert count_words(FULL2, 200) == 2**200

    def test_bad_length(self):
        with pytest.raises(ValueError):
            count_words(FULL2, 0)


class TestEnumerate:
    def test_golden_pairs(self, backend):
        assert enumerate_words(GOLDEN, 2) == [(1, 1), (1, 2), (2, 1)]

    def test_full_shift_letters(self, backend):
        assert enumerate_words(FULL2, 1) == [(1,), (2,)]

    def test_period_two(self, backend):
        assert enumerate_words(FLIP, 3) == [(1, 2, 1), (2, 1, 2)]

    def test_cap_error_carries_count(self, backend):
        with pytest.raises(CapExceededError) as info:
            enumerate_words(FULL2, 12, cap=1000)
        assert info.value.count == 4096
        assert info.value.cap == 1000

    def test_cap_from_environment(self, monkeypatch):
        monkeypatch.setenv(CAP_ENV, "50")
        assert enumeration_cap() == 50
        with pytest.raises(CapExceededError):
            word_array(FULL2, 6)

    def test_array_dtype_is_compact(self, backend):
        assert word_array(GOLDEN, 4).dtype == np.uint8

    @settings(max_examples=40, deadline=None)
    @given(transition_matrices(), st.integers(1, 5))
    def test_matches_brute_force(self, sft, n):
        words = enumerate_words(sft, n)
        assert words == brute_force_words(sft, n)
        assert len(words) == count_words(sft, n)
        assert all(sft.is_admissible(w) for w in words)

    def test_backends_agree(self, monkeypatch):
        sft = Sft(((1, 1, 0), (1, 0, 1), (1, 1, 1)))
        monkeypatch.setenv("INDUCED_PRESSURE_PURE_NUMPY", "1")
        a = word_array(sft, 7)
        monkeypatch.delenv("INDUCED_PRESSURE_PURE_NUMPY")
        b = word_array(sft, 7)
        np.testing.assert_array_equal(a, b)


class TestStructure:
    def test_golden_irreducible(self):
        assert is_irreducible(GOLDEN)

    def test_triangular_not_irreducible(self):
        # valid construction: no zero rows or columns, but 2 never reaches 1
        assert not is_irreducible(Sft(((1, 1), (0, 1))))

    def test_full_shift_irreducible(self):
        assert is_irreducible(Sft.full_shift(4))

    def test_mixing_examples(self):
        assert is_mixing(GOLDEN)
        assert not is_mixing(FLIP)
        assert is_mixing(FULL2)

    def test_primitivity_exponents(self):
        assert primitivity_exponent(FULL2) == 1
        assert primitivity_exponent(GOLDEN) == 2
        assert primitivity_exponent(FLIP) is None

    def test_wielandt_extremal(self):
        # Wielandt matrix for k=4 attains (k-1)^2 + 1 = 10
        w = Sft(((0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (1, 1, 0, 0)))
        assert primitivity_exponent(w) == 10

    def test_period(self):
        assert period(FLIP) == 2
        assert period(GOLDEN) == 1
        cycle3 = Sft(((0, 1, 0), (0, 0, 1), (1, 0, 0)))
        assert period(cycle3) == 3

    def test_period_needs_irreducible(self):
        with pytest.raises(ValidationError):
            period(Sft(((1, 1), (0, 1))))

    @settings(max_examples=60, deadline=None)
    @given(transition_matrices(max_k=5))
    def test_mixing_implies_irreducible(self, sft):
        if is_mixing(sft):
            assert is_irreducible(sft)
        if is_irreducible(sft):
            assert is_mixing(sft) == (period(sft) == 1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 6), st.integers(1, 6))
    def test_full_shift_multiplicative(self, k, n, m):
        f = Sft.full_shift(k)
        assert count_words(f, n + m) == count_words(f, n) * count_words(f, m)

    @settings(max_examples=30, deadline=None)
    @given(transition_matrices(), st.integers(1, 6), st.integers(1, 6))
    def test_submultiplicative(self, sft, n, m):
        assert count_words(sft, n + m) <= count_words(sft, n) * count_words(sft, m)

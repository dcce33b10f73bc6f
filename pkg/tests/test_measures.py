import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from induced_pressure.errors import NotMixingError, ValidationError
from induced_pressure.induced import InducedProblem, induced_pressure_root
from induced_pressure.measures import (
    MarkovMeasure,
    equilibrium_check,
    gibbs_constant_estimate,
    gibbs_measure,
    integrate,
    markov_entropy,
    markov_measure,
    pressure_quotient,
    random_transition,
    stationary_vector,
    variational_search,
)
from induced_pressure.potentials import LocallyConstantPotential as Pot
from induced_pressure.sft import Sft, primitivity_exponent
from induced_pressure.suite import GOLDEN_RATIO, full2_memory3, golden_memory2, mixing_suite, period_two, three_symbol

G = GOLDEN_RATIO
GOLDEN = Sft.golden_mean()
FULL2 = Sft.full_shift(2)
THREE = Sft(((1, 1, 0), (1, 0, 1), (1, 1, 1)))
ONE = Sft(((1,),))
BERN_PHI = Pot.from_values(FULL2, [math.log(0.3), math.log(0.7)])


def bernoulli(p):
    p = np.asarray(p, dtype=float)
    return markov_measure(FULL2, np.vstack([p, p]))


def parry():
    return markov_measure(GOLDEN, np.array([[1 / G, 1 / G**2], [1.0, 0.0]]))


def prob(sft, phi, psi):
    return InducedProblem(sft, phi, psi)


class TestMarkovMeasure:
    def test_rows_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            MarkovMeasure(FULL2, np.array([[0.5, 0.6], [0.5, 0.5]]), np.array([0.5, 0.5]))

    def test_support_enforced(self):
        with pytest.raises(ValidationError):
            markov_measure(GOLDEN, np.array([[0.5, 0.5], [0.5, 0.5]]))

    def test_stationarity_enforced(self):
        with pytest.raises(ValidationError):
            MarkovMeasure(FULL2, np.array([[0.3, 0.7], [0.3, 0.7]]), np.array([0.5, 0.5]))

    def test_stationary_vector(self):
        pi = stationary_vector(FULL2, np.array([[0.9, 0.1], [0.5, 0.5]]))
        np.testing.assert_allclose(pi, [5 / 6, 1 / 6], atol=1e-13)

    def test_cylinder_mass(self):
        mu = parry()
        words = np.array([[0, 0, 1], [1, 0, 0]])
        expected = [mu.stationary[0] / G / G**2, mu.stationary[1] * 1 / G]
        np.testing.assert_allclose(np.exp(mu.log_cylinder_mass(words)), expected, rtol=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([GOLDEN, FULL2, THREE]), st.integers(0, 10**6))
    def test_random_measures_valid(self, sft, seed):
        mu = markov_measure(sft, random_transition(sft, np.random.default_rng(seed)))
        assert np.abs(mu.transition.sum(axis=1) - 1).max() <= 1e-12
        assert np.abs(mu.stationary @ mu.transition - mu.stationary).max() <= 1e-12
        assert (mu.transition[sft.matrix == 0] == 0).all()


class TestGibbs:
    def test_bernoulli(self):
        mu, beta = gibbs_measure(prob(FULL2, BERN_PHI, Pot.constant(FULL2, 1.0)))
        assert beta == pytest.approx(0.0, abs=1e-10)
        np.testing.assert_allclose(mu.transition, [[0.3, 0.7], [0.3, 0.7]], atol=1e-12)
        np.testing.assert_allclose(mu.stationary, [0.3, 0.7], atol=1e-12)

    def test_uniform(self):
        mu, beta = gibbs_measure(prob(FULL2, Pot.constant(FULL2, 0.0), Pot.constant(FULL2, 1.0)))
        assert beta == pytest.approx(math.log(2), abs=1e-10)
        np.testing.assert_allclose(mu.transition, 0.5, atol=1e-12)
        np.testing.assert_allclose(mu.stationary, 0.5, atol=1e-12)

    def test_parry(self):
        mu, beta = gibbs_measure(prob(GOLDEN, Pot.constant(GOLDEN, 0.0), Pot.constant(GOLDEN, 1.0)))
        np.testing.assert_allclose(mu.transition, [[1 / G, 1 / G**2], [1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(mu.stationary, [G**2 / (1 + G**2), 1 / (1 + G**2)], atol=1e-12)

    def test_not_mixing_rejected(self):
        with pytest.raises(NotMixingError):
            gibbs_measure(period_two())

    def test_higher_memory_uses_block_alphabet(self):
        p = full2_memory3()
        mu, beta = gibbs_measure(p)
        assert mu.sft.alphabet_size == 4
        assert equilibrium_check(mu, p, beta_star=beta).ok

    @pytest.mark.parametrize("p", mixing_suite(), ids=lambda p: p.name)
    def test_equilibrium_on_suite(self, p):
        mu, beta = gibbs_measure(p)
        rep = equilibrium_check(mu, p, tol=1e-6)
        assert rep.ok and abs(rep.gap) <= 1e-9
        assert rep.beta_star == pytest.approx(beta, abs=1e-12)


class TestEntropyIntegrals:
    def test_uniform_entropy(self):
        assert markov_entropy(bernoulli([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-14)

    def test_bernoulli_entropy(self):
        h = markov_entropy(bernoulli([0.3, 0.7]))
        assert h == pytest.approx(-0.3 * math.log(0.3) - 0.7 * math.log(0.7), abs=1e-14)
        assert h == pytest.approx(0.6108643, abs=1e-7)

    def test_parry_entropy(self):
        assert markov_entropy(parry()) == pytest.approx(math.log(G), abs=1e-12)

    def test_point_mass_rows_zero_entropy(self):
        cycle = Sft(((0, 1, 0), (0, 0, 1), (1, 0, 0)))
        assert markov_entropy(markov_measure(cycle, cycle.matrix.astype(float))) == 0.0
        assert markov_entropy(markov_measure(ONE, np.ones((1, 1)))) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([GOLDEN, FULL2, THREE]), st.integers(0, 10**6))
    def test_entropy_positive_when_rows_spread(self, sft, seed):
        mu = markov_measure(sft, random_transition(sft, np.random.default_rng(seed)))
        h = markov_entropy(mu)
        assert h >= 0
        spread = ((mu.transition > 0).sum(axis=1) > 1) & (mu.stationary > 0)
        assert (h > 0) == bool(spread.any())

    def test_integrate_constant(self):
        assert integrate(parry(), Pot.constant(GOLDEN, 2.5)) == pytest.approx(2.5, abs=1e-14)

    def test_integrate_bernoulli(self):
        assert integrate(bernoulli([0.3, 0.7]), Pot.from_values(FULL2, [1.0, 2.0])) == pytest.approx(1.7, abs=1e-14)

    def test_integrate_parry(self):
        assert integrate(parry(), Pot.from_values(GOLDEN, [1.0, 0.0])) == pytest.approx(0.7236068, abs=1e-7)

    def test_integrate_memory2(self):
        mu = parry()
        p = Pot(GOLDEN, 2, {(1, 1): 1.0, (1, 2): 2.0, (2, 1): 3.0})
        pi, P = mu.stationary, mu.transition
        expected = pi[0] * (P[0, 0] * 1 + P[0, 1] * 2) + pi[1] * 3
        assert integrate(mu, p) == pytest.approx(expected, abs=1e-14)

    def test_integrate_memory3_rejected(self):
        with pytest.raises(ValidationError):
            integrate(parry(), Pot.from_function(GOLDEN, 3, lambda w: 0.0))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
    def test_integrate_linear(self, seed, a, b):
        rng = np.random.default_rng(seed)
        mu = markov_measure(THREE, random_transition(THREE, rng))
        f = Pot.from_function(THREE, 2, lambda w: float(rng.normal()))
        g = Pot.from_function(THREE, 1, lambda w: float(rng.normal()))
        lhs = integrate(mu, a * f + b * g)
        assert lhs == pytest.approx(a * integrate(mu, f) + b * integrate(mu, g), abs=1e-12)

    def test_quotients(self):
        assert pressure_quotient(markov_measure(ONE, np.ones((1, 1))), Pot.constant(ONE, 0.6), Pot.constant(ONE, 1.5)) == pytest.approx(0.4)
        assert pressure_quotient(bernoulli([0.5, 0.5]), Pot.constant(FULL2, 0.0), Pot.constant(FULL2, 1.0)) == pytest.approx(math.log(2))
        assert pressure_quotient(bernoulli([0.3, 0.7]), BERN_PHI, Pot.constant(FULL2, 1.0)) == pytest.approx(0.0, abs=1e-14)


class TestEquilibriumCheck:
    def test_non_equilibrium(self):
        p = prob(FULL2, Pot.constant(FULL2, 0.0), Pot.constant(FULL2, 1.0))
        rep = equilibrium_check(bernoulli([0.9, 0.1]), p)
        assert not rep.ok
        assert rep.quotient == pytest.approx(0.3250830, abs=1e-7)
        assert rep.gap < 0

    def test_single_symbol(self):
        p = prob(ONE, Pot.constant(ONE, 0.2), Pot.constant(ONE, 0.5))
        assert equilibrium_check(markov_measure(ONE, np.ones((1, 1))), p).ok


class TestGibbsBands:
    def test_bernoulli_exact(self):
        p = prob(FULL2, BERN_PHI, Pot.constant(FULL2, 1.0))
        mu, beta = gibbs_measure(p)
        bands = gibbs_constant_estimate(mu, p, beta, 10)
        np.testing.assert_allclose(bands.k_low, 1.0, atol=1e-10)
        np.testing.assert_allclose(bands.k_high, 1.0, atol=1e-10)

    def test_uniform_exact(self):
        p = prob(FULL2, Pot.constant(FULL2, 0.0), Pot.constant(FULL2, 1.0))
        mu, beta = gibbs_measure(p)
        bands = gibbs_constant_estimate(mu, p, beta, 10)
        np.testing.assert_allclose(bands.spread, 1.0, atol=1e-10)

    def test_parry_bands(self):
        # ratio on a cylinder w is l[w_1] r[w_n] exp(-chi(w_n)), a function of the end symbols;
        # depth 2 misses the pair (2, 2), so its band is narrower than at depths >= 3
        p = prob(GOLDEN, Pot.constant(GOLDEN, 0.0), Pot.constant(GOLDEN, 1.0))
        mu, beta = gibbs_measure(p)
        bands = gibbs_constant_estimate(mu, p, beta, 12)
        expected = [G**2, G] + [G**2] * 10
        np.testing.assert_allclose(bands.spread, expected, rtol=1e-10)
        assert bands.k_low.min() > 0.44 and bands.k_high.max() < 1.18

    @pytest.mark.parametrize("p", mixing_suite(), ids=lambda p: p.name)
    def test_bands_saturate(self, p):
        mu, beta = gibbs_measure(p)
        bands = gibbs_constant_estimate(mu, p, beta, 10)
        n0 = primitivity_exponent(mu.sft) + 1
        ref = bands.spread[n0 - 1]
        assert (bands.spread <= ref * (1 + 1e-9)).all()
        np.testing.assert_allclose(bands.spread[n0 - 1 :], ref, rtol=1e-9)


class TestVariational:
    def test_golden_injected(self):
        p = prob(GOLDEN, Pot.constant(GOLDEN, 0.0), Pot.constant(GOLDEN, 1.0))
        res = variational_search(p, 300, 100, seed=1, inject_gibbs=True)
        assert res.best_quotient == pytest.approx(0.4812118, abs=1e-6)
        assert res.gibbs_quotient == pytest.approx(math.log(G), abs=1e-10)

    def test_moran_injected(self):
        p = prob(FULL2, Pot.constant(FULL2, 0.0), Pot.from_values(FULL2, [math.log(2), math.log(4)]))
        res = variational_search(p, 300, 100, seed=2, inject_gibbs=True)
        assert res.best_quotient == pytest.approx(0.6942419, abs=1e-6)

    def test_single_symbol(self):
        p = prob(ONE, Pot.constant(ONE, 0.3), Pot.constant(ONE, 2.0))
        res = variational_search(p, 5, 10, seed=0)
        assert res.best_quotient == pytest.approx(0.15, abs=1e-14)

    @pytest.mark.parametrize("p", [golden_memory2(), three_symbol(), full2_memory3()], ids=lambda p: p.name)
    def test_samples_below_root(self, p):
        beta = induced_pressure_root(p)
        res = variational_search(p, 300, 200, seed=5)
        assert np.nanmax(res.sample_quotients) <= beta + 1e-8
        assert res.best_quotient <= beta + 1e-8
        assert (np.diff(res.refine_trajectory) >= 0).all()

    def test_deterministic(self):
        p = three_symbol()
        a = variational_search(p, 200, 100, seed=9)
        b = variational_search(p, 200, 100, seed=9)
        assert a.best_quotient == b.best_quotient
        np.testing.assert_array_equal(a.sample_quotients, b.sample_quotients)
        np.testing.assert_array_equal(a.refine_trajectory, b.refine_trajectory)
        c = variational_search(p, 200, 100, seed=10)
        assert not np.array_equal(a.sample_quotients, c.sample_quotients)

    def test_samples_must_be_positive(self):
        with pytest.raises(ValueError):
            variational_search(three_symbol(), 0)

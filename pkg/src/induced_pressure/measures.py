"""Markov measures: Gibbs construction, entropy, equilibrium and variational checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ConvergenceError, NotMixingError, ValidationError
from .induced import InducedProblem, induced_pressure_root
from .potentials import recode_to_memory2
from .pressure import _lazy_shift, build_transfer_matrix, perron_eigendata
from .sft import Sft, is_mixing, word_array

STATIONARY_TOL = 1e-14
INVARIANT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Shift-invariant Markov measure: ``mu(C_w) = pi[w1] * prod P[w_i, w_i+1]``."""

    sft: Sft
    transition: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        k = self.sft.alphabet_size
        p = np.array(self.transition, dtype=float)
        pi = np.array(self.stationary, dtype=float)
        if p.shape != (k, k) or pi.shape != (k,):
            raise ValidationError("shape mismatch with the alphabet")
        if np.any(p < 0) or np.any(pi < 0):
            raise ValidationError("negative probabilities")
        if np.any(p[self.sft.matrix == 0] != 0):
            raise ValidationError("transition probability on a forbidden transition")
        if np.abs(p.sum(axis=1) - 1).max() > INVARIANT_TOL:
            raise ValidationError("rows of the transition matrix must sum to 1")
        if abs(pi.sum() - 1) > INVARIANT_TOL or np.abs(pi @ p - pi).max() > INVARIANT_TOL:
            raise ValidationError("stationary vector is not invariant")
        p.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "stationary", pi)

    def log_cylinder_mass(self, words):
        """``log mu(C_w)`` for each row of a 0-based word array."""
        words = np.asarray(words, dtype=np.int64)
        with np.errstate(divide="ignore"):
            out = np.log(self.stationary[words[:, 0]])
            logp = np.log(self.transition)
        for i in range(words.shape[1] - 1):
            out = out + logp[words[:, i], words[:, i + 1]]
        return out


def stationary_vector(sft, transition, tol=STATIONARY_TOL, max_iters=100_000):
    """Stationary probability vector by power iteration on ``P.T``."""
    lam, pi, res, _, ok = _kernels.power_iteration(
        np.ascontiguousarray(np.asarray(transition, dtype=float).T), _lazy_shift(sft), tol, max_iters
    )
    if not ok and res > INVARIANT_TOL:
        raise ConvergenceError(f"stationary vector did not converge (residual {res:.3g})")
    return pi / pi.sum()


def markov_measure(sft, transition):
    return MarkovMeasure(sft, transition, stationary_vector(sft, transition))


def _recoded(prob):
    sft, (phi, psi) = recode_to_memory2(prob.sft, [prob.phi, prob.psi])
    return sft, phi, psi


def gibbs_measure(prob, tol=1e-12):
    """Markov measure built from the Perron data of ``phi - beta* psi``.

    Returns ``(measure, beta_star)``.  When the problem has memory > 2 the
    measure lives on the higher-block alphabet of
    :func:`~induced_pressure.potentials.recode_to_memory2`.
    """
    if not is_mixing(prob.sft):
        raise NotMixingError("Gibbs construction requires a topologically mixing shift")
    beta = induced_pressure_root(prob)
    sft, (chi,) = recode_to_memory2(prob.sft, [prob.phi - beta * prob.psi])
    transfer = build_transfer_matrix(sft, chi)
    eig = perron_eigendata(transfer, tol)
    r, l = eig.right_vector, eig.left_vector
    p = transfer.entries * r[None, :] / (eig.eigenvalue * r[:, None])
    p = p / p.sum(axis=1, keepdims=True)
    pi = l * r
    pi = pi / pi.sum()
    # l*r is stationary up to the eigen-residual; a few sweeps settle it to rounding
    for _ in range(200):
        nxt = pi @ p
        nxt /= nxt.sum()
        done = np.abs(nxt - pi).max() <= 1e-15
        pi = nxt
        if done:
            break
    return MarkovMeasure(sft, p, pi), beta


def markov_entropy(mu):
    p = mu.transition
    nz = p > 0
    terms = np.zeros_like(p)
    terms[nz] = p[nz] * np.log(p[nz])
    return float(max(-(mu.stationary @ terms.sum(axis=1)), 0.0))


def integrate(mu, p):
    if p.sft != mu.sft:
        raise ValidationError("potential and measure live on different alphabets; recode first")
    k = mu.sft.alphabet_size
    if p.memory == 1:
        return float(mu.stationary @ p.values)
    if p.memory == 2:
        vals = np.where(mu.sft.matrix == 1, p.values.reshape(k, k), 0.0)
        return float(mu.stationary @ (mu.transition * vals).sum(axis=1))
    raise ValidationError(f"memory {p.memory} potential: recode to memory <= 2 first")


def pressure_quotient(mu, phi, psi):
    """``(h(mu) + int phi dmu) / int psi dmu``."""
    return (markov_entropy(mu) + integrate(mu, phi)) / integrate(mu, psi)


def _potentials_for(mu, prob):
    if mu.sft == prob.sft and prob.memory <= 2:
        return prob.phi, prob.psi
    sft, phi, psi = _recoded(prob)
    if sft != mu.sft:
        raise ValidationError("measure alphabet matches neither the problem nor its recoding")
    return phi, psi


class EquilibriumReport(NamedTuple):
    ok: bool
    gap: float
    quotient: float
    beta_star: float


def equilibrium_check(mu, prob, tol=1e-6, beta_star=None):
    """Is ``mu`` an equilibrium measure, i.e. does its quotient equal ``P_psi(phi)``?"""
    phi, psi = _potentials_for(mu, prob)
    if beta_star is None:
        beta_star = induced_pressure_root(prob)
    q = pressure_quotient(mu, phi, psi)
    gap = q - beta_star
    return EquilibriumReport(abs(gap) <= tol, gap, q, beta_star)


@dataclass(frozen=True)
class GibbsBands:
    depths: np.ndarray
    k_low: np.ndarray
    k_high: np.ndarray

    @property
    def spread(self):
        return self.k_high / self.k_low


def gibbs_constant_estimate(mu, prob, beta_star, n_max, cap=None):
    """Per-depth min and max of ``mu(C_w) / exp(S_n phi - beta* S_n psi)``.

    Depth counts symbols of the measure's alphabet.  The Birkhoff sums
    depend on the point inside the cylinder through the next ``M' - 1``
    symbols; min and max are taken over all admissible extensions.
    """
    phi, psi = _potentials_for(mu, prob)
    chi = phi - beta_star * psi
    m = chi.memory
    k = mu.sft.alphabet_size
    depths = np.arange(1, n_max + 1)
    lows, highs = [], []
    for n in depths:
        words = word_array(mu.sft, int(n) + m - 1, cap).astype(np.int64)
        s = np.zeros(words.shape[0])
        for i in range(int(n)):
            codes = np.zeros(words.shape[0], dtype=np.int64)
            for t in range(m):
                codes = codes * k + words[:, i + t]
            s = s + chi.values[codes]
        log_ratio = mu.log_cylinder_mass(words[:, : int(n)]) - s
        lows.append(math.exp(log_ratio.min()))
        highs.append(math.exp(log_ratio.max()))
    return GibbsBands(depths, np.array(lows), np.array(highs))


def random_transition(sft, rng):
    """Row-stochastic matrix supported on ``A``, rows ~ symmetric Dirichlet(1)."""
    k = sft.alphabet_size
    p = np.zeros((k, k))
    for i in range(k):
        support = np.flatnonzero(sft.matrix[i])
        p[i, support] = rng.dirichlet(np.ones(support.size))
    return p


@dataclass(frozen=True, eq=False)
class VariationalResult:
    best_quotient: float
    best_measure: MarkovMeasure
    sample_quotients: np.ndarray
    refine_trajectory: np.ndarray
    gibbs_quotient: float | None


def variational_search(prob, samples, refine_steps=500, seed=0, inject_gibbs=False):
    """Random search for ``sup (h + int phi) / int psi`` over Markov measures.

    Samples ``samples`` random transition matrices on the (recoded) support,
    optionally adds the Gibbs measure as a candidate, then refines the best
    one by multiplicative perturbation of single entries (accepted only on
    improvement; the step halves after 20 straight rejections).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sft, phi, psi = _recoded(prob)
    rng = np.random.default_rng(seed)

    def evaluate(p):
        mu = markov_measure(sft, p)
        return pressure_quotient(mu, phi, psi), mu

    quotients = np.full(samples, np.nan)
    best_q, best_mu = -math.inf, None
    for s in range(samples):
        try:
            q, mu = evaluate(random_transition(sft, rng))
        except (ConvergenceError, ValidationError):
            continue
        quotients[s] = q
        if q > best_q:
            best_q, best_mu = q, mu

    gibbs_q = None
    if inject_gibbs:
        mu, _ = gibbs_measure(prob)
        gibbs_q = pressure_quotient(mu, phi, psi)
        if gibbs_q > best_q:
            best_q, best_mu = gibbs_q, mu
    if best_mu is None:
        raise ConvergenceError("no sampled measure could be evaluated")

    rows = [i for i in range(sft.alphabet_size) if sft.matrix[i].sum() >= 2]
    trajectory = [best_q]
    step = 0.5
    rejections = 0
    current = best_mu.transition.copy()
    for _ in range(refine_steps if rows else 0):
        i = rows[rng.integers(len(rows))]
        support = np.flatnonzero(sft.matrix[i])
        j = support[rng.integers(support.size)]
        sign = 1.0 if rng.random() < 0.5 else -1.0
        cand = current.copy()
        cand[i, j] *= math.exp(sign * step)
        cand[i] /= cand[i].sum()
        try:
            q, mu = evaluate(cand)
        except (ConvergenceError, ValidationError):
            q = -math.inf
        if q > best_q:
            best_q, best_mu, current = q, mu, cand
            rejections = 0
        else:
            rejections += 1
            if rejections == 20:
                step /= 2
                rejections = 0
        trajectory.append(best_q)
    return VariationalResult(best_q, best_mu, quotients, np.array(trajectory), gibbs_q)

"""Induced pressure: Bowen-equation root, definitional partition sums, R diagnostic.

The root solver is the production path.  The partition sums evaluate the
definition directly at the cylinder scale (one representative per cylinder
of the Bowen metric), so their cost grows exponentially in ``T``; they are
meant for validation on small systems.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapExceededError, ConvergenceError, ValidationError
from .potentials import (
    LocallyConstantPotential,
    higher_block_words,
    lift,
    max_value,
    min_value,
    recode_to_memory2,
    require_positive,
    word_code,
)
from .pressure import (
    DEFAULT_TOL,
    TransferMatrix,
    _lazy_shift,
    log_spectral_radius,
    perron_eigendata,
    require_irreducible,
    transfer_exponents,
)
from .sft import Sft, enumeration_cap

DEFAULT_TOL_BETA = 1e-11


@dataclass(frozen=True, eq=False)
class InducedProblem:
    sft: Sft
    phi: LocallyConstantPotential
    psi: LocallyConstantPotential
    name: str = ""

    def __post_init__(self):
        if self.phi.sft != self.sft or self.psi.sft != self.sft:
            raise ValidationError("phi and psi must be defined over the problem's shift")
        require_positive(self.psi)

    @property
    def memory(self):
        return max(self.phi.memory, self.psi.memory)


class BowenFunction:
    """``beta -> P(phi - beta*psi)`` with the recoding done once."""

    def __init__(self, prob, tol_inner=DEFAULT_TOL):
        require_irreducible(prob.sft)
        self.sft, (phi2, psi2) = recode_to_memory2(prob.sft, [prob.phi, prob.psi])
        self.e_phi = transfer_exponents(phi2)
        self.e_psi = transfer_exponents(psi2)
        self.shift = _lazy_shift(self.sft)
        self.tol = tol_inner
        self.evaluations = 0

    def __call__(self, beta):
        self.evaluations += 1
        return log_spectral_radius(self.sft, self.e_phi - beta * self.e_psi, self.tol, shift=self.shift)


@dataclass(frozen=True)
class RootResult:
    beta: float
    lo: float
    hi: float
    residual: float
    evaluations: int

    @property
    def bracket_width(self):
        return self.hi - self.lo


def solve_bowen(prob, tol_beta=DEFAULT_TOL_BETA, tol_inner=DEFAULT_TOL, max_expand=64):
    """Bisection for the unique root of the strictly decreasing ``P(phi - beta*psi)``."""
    g = BowenFunction(prob, tol_inner)
    p0 = g(0.0)
    a, b = p0 / max_value(prob.psi), p0 / min_value(prob.psi)
    lo, hi = min(a, b) - 1.0, max(a, b) + 1.0
    width = hi - lo
    for _ in range(max_expand):
        if g(lo) > 0:
            break
        lo -= width
        width *= 2
    else:
        raise ConvergenceError("could not bracket the Bowen root from below")
    for _ in range(max_expand):
        if g(hi) < 0:
            break
        hi += width
        width *= 2
    else:
        raise ConvergenceError("could not bracket the Bowen root from above")
    while hi - lo > tol_beta:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        val = g(mid)
        if val > 0:
            lo = mid
        elif val < 0:
            hi = mid
        else:
            lo = hi = mid
    beta = 0.5 * (lo + hi)
    return RootResult(float(beta), float(lo), float(hi), float(g(beta)), g.evaluations)


def induced_pressure_root(prob, tol_beta=DEFAULT_TOL_BETA, tol_inner=DEFAULT_TOL):
    return solve_bowen(prob, tol_beta, tol_inner).beta


def bs_dimension(sft, psi, tol=DEFAULT_TOL_BETA):
    """BS dimension of the whole shift: the induced pressure of ``phi = 0``."""
    zero = LocallyConstantPotential.constant(sft, 0.0)
    return induced_pressure_root(InducedProblem(sft, zero, psi), tol_beta=tol)


# ------------------------------------------------------------ partition sums

@dataclass(frozen=True)
class PartitionSumReport:
    """Partition sum of the stopping-time family at level ``T``.

    ``per_n[n] = (number of cylinders, log of their summed weights)``.
    ``variant`` is ``"q"`` (spanning family) or ``"p"``
    (separated, one maximal term per length-n cylinder).
    """

    T: float
    variant: str
    s_set: tuple
    per_n: dict
    log_value: float
    log_rate: float
    visited: int

    @property
    def value(self):
        return math.exp(self.log_value) if self.log_value < 709 else math.inf

    q_value = value


def _lifted(p, memory):
    return np.asarray(lift(p, memory).values)


def _check_T(T):
    if not T > 0:
        raise ValidationError("T must be positive")


def partition_sums(prob, T, cap=None):
    """Both variants from one traversal: ``(q_report, p_report)``."""
    _check_T(T)
    big_m = prob.memory
    n_max = int(math.floor(T / min_value(prob.psi))) + 1
    succ, deg = prob.sft._succ
    s_flag, q_cnt, q_log, p_cnt, p_log, visited = _kernels.partition_sums(
        succ,
        deg,
        big_m,
        _lifted(prob.psi, big_m),
        _lifted(prob.phi, big_m),
        prob.phi.memory,
        T,
        n_max,
        enumeration_cap(cap),
    )
    s_set = tuple(int(n) for n in np.flatnonzero(s_flag))
    reports = []
    for variant, cnt, logs in (("q", q_cnt, q_log), ("p", p_cnt, p_log)):
        per_n = {n: (int(cnt[n]), float(logs[n])) for n in s_set}
        total = _kernels.logsumexp([logs[n] for n in s_set])
        reports.append(PartitionSumReport(float(T), variant, s_set, per_n, total, total / T, int(visited)))
    return tuple(reports)


def q_partition_sum(prob, T, cap=None):
    return partition_sums(prob, T, cap)[0]


def p_partition_sum(prob, T, cap=None):
    return partition_sums(prob, T, cap)[1]


@dataclass(frozen=True)
class DefinitionalScan:
    grid: np.ndarray
    log_rates: np.ndarray
    estimate: float
    partial: bool
    variant: str


def _tail_max(rates):
    start = len(rates) - math.ceil(len(rates) / 3)
    return float(np.max(rates[start:]))


def definitional_scan(prob, T_max, T_step=None, variant="q", cap=None):
    """``(1/T) log Q_T`` on the grid ``T_step, 2*T_step, ..., T_max``.

    The estimate is the maximum over the last third of the grid, a
    finite-sample stand-in for the limsup.  If the enumeration cap stops
    the scan early the result is flagged ``partial``.
    """
    if variant not in ("q", "p"):
        raise ValueError("variant must be 'q' or 'p'")
    if T_step is None:
        T_step = min_value(prob.psi) / 2
    n_pts = int(math.floor(T_max / T_step + 1e-9))
    if n_pts < 1:
        raise ValidationError("T_max must be at least T_step")
    grid = T_step * np.arange(1, n_pts + 1)
    rates = []
    partial = False
    for T in grid:
        try:
            q, p = partition_sums(prob, float(T), cap)
        except CapExceededError:
            if not rates:
                raise
            partial = True
            break
        rates.append((q if variant == "q" else p).log_rate)
    rates = np.array(rates)
    grid = grid[: len(rates)]
    return DefinitionalScan(grid, rates, _tail_max(rates), partial, variant)


def induced_pressure_definitional(prob, T_max, T_step=None, cap=None):
    scan = definitional_scan(prob, T_max, T_step, "q", cap)
    if scan.partial:
        warnings.warn(
            f"enumeration cap reached at T={scan.grid[-1]:g} < T_max={T_max:g}; estimate uses a partial grid",
            RuntimeWarning,
            stacklevel=2,
        )
    return scan.estimate


# ------------------------------------------------------------- R diagnostic

@dataclass(frozen=True)
class RDiagnosticReport:
    """Truncated ``R_T`` sums for ``phi - beta*psi`` over a grid of levels.

    ``samples`` holds ``(T, R_T)`` pairs, ``tail_bounds`` the geometric
    bound on the mass beyond the truncation horizon (``inf`` when the
    pressure is not negative), ``horizons`` the horizons ``N_max(T)``.
    """

    beta: float
    samples: list
    log_values: np.ndarray
    tail_bounds: np.ndarray
    horizons: np.ndarray
    pressure: float
    verdict: str


class _Continuation:
    """Weights of all continuations of a word by ``m`` further windows.

    A word whose last window closes in state ``s`` (last ``M-1`` symbols,
    or the last symbol when ``M == 1``) extends by ``m`` windows with total
    weight ``(Lc**m 1)[s]``.
    """

    def __init__(self, prob, chi):
        sft, big_m = prob.sft, prob.memory
        k = sft.alphabet_size
        if big_m == 1:
            self.sft = sft
            mat = np.where(sft.matrix == 1, np.exp(chi.values)[None, :], 0.0)
            self.state_of_code = np.arange(k, dtype=np.int64)
        else:
            self.sft, (chi2,) = recode_to_memory2(sft, [lift(chi, big_m)])
            mat = np.where(self.sft.matrix == 1, np.exp(transfer_exponents(chi2)), 0.0)
            self.state_of_code = np.full(k ** (big_m - 1), -1, dtype=np.int64)
            for idx, block in enumerate(higher_block_words(sft, big_m - 1)):
                self.state_of_code[word_code([s - 1 for s in block], k)] = idx
        self.mat = mat
        eig = perron_eigendata(TransferMatrix(self.sft, mat))
        self.log_lam = eig.log_eigenvalue
        self.log_kappa = math.log(eig.right_vector.max() / eig.right_vector.min())

    def log_weights(self, horizon):
        """Row ``j`` holds ``log sum_{m <= horizon - j} Lc**m 1``."""
        n_states = self.mat.shape[0]
        log_v = np.zeros(n_states)
        cum = [log_v]
        for _ in range(horizon):
            mx = log_v.max()
            log_v = np.log(self.mat @ np.exp(log_v - mx)) + mx
            cum.append(np.logaddexp(cum[-1], log_v))
        out = np.full((horizon + 1, n_states), -np.inf)
        for j in range(1, horizon + 1):
            out[j] = cum[horizon - j]
        return out


def default_T_grid(prob, budget=12.0, points=8):
    """Grid sized so the first-crossing tree stays near ``exp(budget)`` words."""
    dim = bs_dimension(prob.sft, prob.psi)
    top = max_value(prob.psi)
    t_hi = min(max(budget / max(dim, 1e-12), 6 * top), 40 * top)
    return list(np.linspace(t_hi / 4, t_hi, points))


def r_diagnostic(prob, beta, T_grid=None, cap=None):
    """Truncated ``R_{psi,T}(phi - beta*psi)`` and a bounded/growing verdict.

    For each ``T`` the sum runs over lengths ``n <= N_max = ceil(4T/min psi)``
    and over the length-``(n+M-1)`` cylinders with ``S_n psi > T``.  It is
    evaluated exactly by enumerating first-crossing words and weighting each
    by the transfer-matrix mass of its continuations.

    Verdict ``bounded``: pressure < 0, values non-increasing over the last
    two thirds of the grid (up to the truncation remainder), remainder
    below 1% of the final value.  ``growing``: the final value is at least
    10x the first.  Otherwise ``inconclusive``.
    """
    if T_grid is None:
        T_grid = default_T_grid(prob)
    T_grid = [float(t) for t in T_grid]
    if any(t <= 0 for t in T_grid) or any(b <= a for a, b in zip(T_grid, T_grid[1:])):
        raise ValidationError("T_grid must be positive and strictly increasing")
    big_m = prob.memory
    chi = lift(prob.phi - beta * prob.psi, big_m)
    cont = _Continuation(prob, chi)
    admissible = chi.values[np.isfinite(chi.values)]
    log_z1 = _kernels.logsumexp(admissible)
    psi_vals = _lifted(prob.psi, big_m)
    chi_vals = np.asarray(chi.values)
    succ, deg = prob.sft._succ
    m_psi = min_value(prob.psi)
    cap = enumeration_cap(cap)

    logs, tails, horizons = [], [], []
    for T in T_grid:
        horizon = int(math.ceil(4 * T / m_psi))
        total, _, _ = _kernels.crossing_logsum(
            succ, deg, big_m, psi_vals, chi_vals, T, horizon, cont.state_of_code, cont.log_weights(horizon), cap
        )
        logs.append(total)
        horizons.append(horizon)
        if cont.log_lam < 0:
            tails.append(log_z1 + cont.log_kappa + horizon * cont.log_lam - math.log(-math.expm1(cont.log_lam)))
        else:
            tails.append(math.inf)
    logs = np.array(logs)
    tails = np.array(tails)
    values = np.exp(logs)
    verdict = _verdict(logs, tails, cont.log_lam)
    return RDiagnosticReport(
        float(beta),
        list(zip(T_grid, values.tolist())),
        logs,
        np.exp(tails),
        np.array(horizons),
        cont.log_lam,
        verdict,
    )


def _verdict(logs, tails, log_lam):
    start = len(logs) // 3
    if log_lam < 0 and np.isfinite(logs[-1]):
        steady = all(
            logs[i + 1] <= np.logaddexp(logs[i], tails[i]) + 1e-12
            for i in range(start, len(logs) - 1)
        )
        if steady and tails[-1] <= logs[-1] + math.log(0.01):
            return "bounded"
    if np.isfinite(logs[0]) and logs[-1] - logs[0] >= math.log(10.0):
        return "growing"
    return "inconclusive"

"""Classical topological pressure of locally constant potentials."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, NotIrreducibleError, ValidationError
from .potentials import recode_to_memory2
from .sft import Sft, enumeration_cap, is_irreducible, period

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITERS = 100_000


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """``L_ij = t_ij * exp(phi(ij))`` (memory 2) or ``t_ij * exp(phi(i))`` (memory 1)."""

    sft: Sft
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        k = self.sft.alphabet_size
        if e.shape != (k, k):
            raise ValidationError(f"transfer matrix must be {k}x{k}")
        if not np.all(np.isfinite(e)):
            raise ValidationError("transfer matrix entries must be finite")
        if np.any((e > 0) != (self.sft.matrix == 1)) or np.any(e < 0):
            raise ValidationError("transfer matrix support must equal the transition matrix")
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Perron eigendata with ``sum(r) == 1`` and ``l @ r == 1``.

    ``residual`` is the larger of the relative residuals
    ``max|L r - lam r| / lam`` and ``max|l L - lam l| / lam`` measured with
    both vectors scaled to unit sum.
    """

    eigenvalue: float
    log_eigenvalue: float
    right_vector: np.ndarray
    left_vector: np.ndarray
    residual: float
    iterations: int


def transfer_exponents(p):
    """k x k array with ``phi(ij)`` (memory 2) or ``phi(i)`` (memory 1); 0 off-support."""
    k = p.sft.alphabet_size
    mask = p.sft.matrix == 1
    if p.memory == 1:
        e = np.repeat(p.values[:, None], k, axis=1)
    elif p.memory == 2:
        e = p.values.reshape(k, k).copy()
    else:
        raise ValidationError(f"memory {p.memory} > 2: recode the potential first")
    return np.where(mask, e, 0.0)


def build_transfer_matrix(sft, phi):
    if phi.sft != sft:
        raise ValidationError("potential lives on a different shift")
    e = transfer_exponents(phi)
    return TransferMatrix(sft, np.where(sft.matrix == 1, np.exp(e), 0.0))


def _lazy_shift(sft):
    # irreducible periodic matrices oscillate under plain power iteration
    return 0.0 if period(sft) == 1 else 1.0


def _eigen_scaled(mat, shift, tol, max_iters):
    lam, r, res_r, it_r, ok_r = _kernels.power_iteration(mat, shift, tol, max_iters)
    lam_l, l, res_l, it_l, ok_l = _kernels.power_iteration(mat.T, shift, tol, max_iters)
    if not (ok_r and ok_l):
        raise ConvergenceError(
            f"power iteration did not converge in {max_iters} iterations "
            f"(residuals {res_r:.3g}, {res_l:.3g})"
        )
    return lam, r, l, max(res_r, res_l) / lam, max(it_r, it_l)


def perron_eigendata(transfer, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Perron eigenvalue and positive eigenvectors by power iteration.

    The matrix is rescaled by its largest entry before iterating.  For a
    periodic support the iteration runs on ``L + I`` (same eigenvectors).
    """
    e = transfer.entries
    scale = e.max()
    if scale <= 0:
        raise ValidationError("zero transfer matrix")
    if not is_irreducible(transfer.sft):
        raise NotIrreducibleError("irreducibility required for Perron eigendata")
    lam, r, l, res, iters = _eigen_scaled(e / scale, _lazy_shift(transfer.sft), tol, max_iters)
    r = r / r.sum()
    l = l / (l @ r)
    return SpectralData(lam * scale, math.log(lam) + math.log(scale), r, l, res, iters)


def log_spectral_radius(sft, exponents, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, shift=None):
    """``log`` of the Perron root of ``t_ij * exp(exponents_ij)``, overflow-safe."""
    mask = sft.matrix == 1
    top = exponents[mask].max()
    mat = np.where(mask, np.exp(exponents - top), 0.0)
    if shift is None:
        shift = _lazy_shift(sft)
    lam, _ = _right_only(mat, shift, tol, max_iters)
    return math.log(lam) + top


def _right_only(mat, shift, tol, max_iters):
    lam, r, res, it, ok = _kernels.power_iteration(mat, shift, tol, max_iters)
    if not ok:
        raise ConvergenceError(f"power iteration did not converge (residual {res:.3g})")
    return lam, r


def require_irreducible(sft):
    if not is_irreducible(sft):
        raise NotIrreducibleError("irreducibility required: the transition matrix is reducible")


def pressure_spectral(sft, phi, tol=DEFAULT_TOL):
    """``P(phi) = log`` of the Perron root of the transfer matrix."""
    require_irreducible(sft)
    rsft, (rphi,) = recode_to_memory2(sft, [phi])
    return log_spectral_radius(rsft, transfer_exponents(rphi), tol)


def pressure_definitional(sft, phi, n, cap=None):
    """``(1/n) log`` of the sum of ``exp(S_n phi)`` over all length-n cylinders.

    Each summand is evaluated exactly on a word of length ``n + memory - 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    succ, deg = sft._succ
    logsum, _ = _kernels.word_logsum(
        succ, deg, np.asarray(phi.values), phi.memory, n + phi.memory - 1, enumeration_cap(cap)
    )
    return logsum / n

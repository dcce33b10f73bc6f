"""Hot loops: word-tree traversals and power iteration.

Every public function here dispatches to a numba kernel or a vectorised
numpy twin depending on :func:`induced_pressure._accel.use_numba`.  Both
twins walk the words in lexicographic order and make identical membership
decisions (the running Birkhoff sums are accumulated in the same order);
only the final floating-point reductions may differ in the last bits.

Potential tables are passed as dense arrays indexed by the base-k code of
the last ``memory`` symbols of a 0-based word.
"""
import numpy as np

from ._accel import njit, use_numba
from .errors import CapExceededError

NEG_INF = -np.inf


# ---------------------------------------------------------------- helpers

def logsumexp(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return NEG_INF
    mx = values.max()
    if not np.isfinite(mx):
        return float(mx)
    return float(mx + np.log(np.exp(values - mx).sum()))


@njit
def _lse_push(mx, acc, v):
    # online log-sum-exp: state is (running max, sum of exp(x - max))
    if v > mx:
        return v, acc * np.exp(mx - v) + 1.0
    return mx, acc + np.exp(v - mx)


def _finish_lse(mx, acc):
    out = np.full(mx.shape, NEG_INF)
    ok = acc > 0
    out[ok] = mx[ok] + np.log(acc[ok])
    return out


# ------------------------------------------------------- word enumeration

@njit
def _enumerate_numba(succ, deg, n, out):
    k = succ.shape[0]
    sym = np.zeros(n + 1, np.int64)
    nxt = np.zeros(n + 1, np.int64)
    row = 0
    d = 0
    while True:
        nch = k if d == 0 else deg[sym[d]]
        if nxt[d] < nch:
            s = nxt[d] if d == 0 else succ[sym[d], nxt[d]]
            nxt[d] += 1
            c = d + 1
            sym[c] = s
            if c == n:
                for i in range(n):
                    out[row, i] = sym[i + 1]
                row += 1
            else:
                d = c
                nxt[d] = 0
        else:
            if d == 0:
                break
            d -= 1
    return row


def _children(succ, deg, parent_syms):
    counts = deg[parent_syms]
    mask = np.arange(succ.shape[1])[None, :] < counts[:, None]
    child_syms = succ[parent_syms][mask]
    return counts, child_syms


def _enumerate_numpy(succ, deg, n, dtype):
    k = succ.shape[0]
    words = np.arange(k, dtype=np.int64)[:, None]
    for _ in range(n - 1):
        counts, child = _children(succ, deg, words[:, -1])
        words = np.repeat(words, counts, axis=0)
        words = np.concatenate([words, child[:, None]], axis=1)
    return words.astype(dtype)


def enumerate_words(succ, deg, n, count, dtype):
    if use_numba():
        out = np.empty((count, n), dtype=dtype)
        rows = _enumerate_numba(succ, deg, n, out)
        assert rows == count
        return out
    out = _enumerate_numpy(succ, deg, n, dtype)
    assert out.shape[0] == count
    return out


# ------------------------------------------------- plain partition sum

@njit
def _word_logsum_numba(succ, deg, phi, memory, length, cap):
    k = succ.shape[0]
    km = k**memory
    sym = np.zeros(length + 1, np.int64)
    code = np.zeros(length + 1, np.int64)
    cph = np.zeros(length + 1)
    nxt = np.zeros(length + 1, np.int64)
    mx = NEG_INF
    acc = 0.0
    count = 0
    visited = 0
    d = 0
    while True:
        nch = k if d == 0 else deg[sym[d]]
        if nxt[d] < nch:
            s = nxt[d] if d == 0 else succ[sym[d], nxt[d]]
            nxt[d] += 1
            c = d + 1
            visited += 1
            if visited > cap:
                return mx, acc, count, -1
            sym[c] = s
            code[c] = (code[d] * k + s) % km
            cph[c] = cph[d] + (phi[code[c]] if c >= memory else 0.0)
            if c == length:
                mx, acc = _lse_push(mx, acc, cph[c])
                count += 1
            else:
                d = c
                nxt[d] = 0
        else:
            if d == 0:
                break
            d -= 1
    return mx, acc, count, visited


def _word_logsum_numpy(succ, deg, phi, memory, length, cap):
    k = succ.shape[0]
    km = k**memory
    syms = np.arange(k, dtype=np.int64)
    code = syms.copy()
    cph = phi[code] if memory == 1 else np.zeros(k)
    visited = k
    for c in range(2, length + 1):
        counts, child = _children(succ, deg, syms)
        visited += child.size
        if visited > cap:
            raise CapExceededError(visited, cap, exact=False)
        code = (np.repeat(code, counts) * k + child) % km
        cph = np.repeat(cph, counts)
        if c >= memory:
            cph = cph + phi[code]
        syms = child
    return logsumexp(cph), cph.size


def word_logsum(succ, deg, phi, memory, length, cap):
    """log of sum over admissible words w of ``length`` of exp(cumulative phi)."""
    if use_numba():
        mx, acc, count, visited = _word_logsum_numba(succ, deg, phi, memory, length, cap)
        if visited < 0:
            raise CapExceededError(cap + 1, cap, exact=False)
        return float(mx + np.log(acc)), int(count)
    return _word_logsum_numpy(succ, deg, phi, memory, length, cap)


# ------------------------------------------- induced partition sums Q / P

@njit
def _partition_numba(succ, deg, big_m, psi, phi, m_phi, t, n_max, cap):
    # psi, phi: memory big_m tables.  cps[c] = S_{c-M+1} psi on the path prefix.
    k = succ.shape[0]
    km = k**big_m
    dmax = n_max + big_m
    lag = big_m - m_phi + 1
    sym = np.zeros(dmax + 1, np.int64)
    code = np.zeros(dmax + 1, np.int64)
    cps = np.zeros(dmax + 1)
    cph = np.zeros(dmax + 1)
    nxt = np.zeros(dmax + 1, np.int64)
    qflag = np.zeros(dmax + 1, np.bool_)
    qval = np.zeros(dmax + 1)
    pbest = np.full(dmax + 1, NEG_INF)
    s_flag = np.zeros(n_max + 2, np.bool_)
    q_cnt = np.zeros(n_max + 2, np.int64)
    q_mx = np.full(n_max + 2, NEG_INF)
    q_acc = np.zeros(n_max + 2)
    p_cnt = np.zeros(n_max + 2, np.int64)
    p_mx = np.full(n_max + 2, NEG_INF)
    p_acc = np.zeros(n_max + 2)
    visited = 0
    d = 0
    while True:
        nch = k if d == 0 else deg[sym[d]]
        if nxt[d] < nch:
            s = nxt[d] if d == 0 else succ[sym[d], nxt[d]]
            nxt[d] += 1
            c = d + 1
            visited += 1
            if visited > cap:
                visited = -1
                break
            sym[c] = s
            code[c] = (code[d] * k + s) % km
            if c >= big_m:
                cps[c] = cps[d] + psi[code[c]]
                cph[c] = cph[d] + phi[code[c]]
            else:
                cps[c] = 0.0
                cph[c] = 0.0
            qflag[c] = False
            pbest[c] = NEG_INF
            n = c - big_m
            if n >= 1 and cps[c - 1] <= t and cps[c] > t:
                s_flag[n] = True
                a = c - lag
                qflag[a] = True
                qval[a] = cph[c - 1]
                if cph[c - 1] > pbest[n]:
                    pbest[n] = cph[c - 1]
            if c < dmax and cps[c] <= t:
                d = c
                nxt[d] = 0
        else:
            if d == 0:
                break
            # leaving node at depth d: flush its dedup records
            if qflag[d]:
                n = d - m_phi + 1
                q_mx[n], q_acc[n] = _lse_push(q_mx[n], q_acc[n], qval[d])
                q_cnt[n] += 1
            if pbest[d] > NEG_INF:
                p_mx[d], p_acc[d] = _lse_push(p_mx[d], p_acc[d], pbest[d])
                p_cnt[d] += 1
            d -= 1
    return s_flag, q_cnt, q_mx, q_acc, p_cnt, p_mx, p_acc, visited


def _partition_numpy(succ, deg, big_m, psi, phi, m_phi, t, n_max, cap):
    k = succ.shape[0]
    km = k**big_m
    dmax = n_max + big_m
    lag = big_m - m_phi + 1
    s_flag = np.zeros(n_max + 2, bool)
    q_cnt = np.zeros(n_max + 2, np.int64)
    q_log = np.full(n_max + 2, NEG_INF)
    p_cnt = np.zeros(n_max + 2, np.int64)
    p_log = np.full(n_max + 2, NEG_INF)

    syms = np.arange(k, dtype=np.int64)
    code = syms.copy()
    zeros = np.zeros(k)
    cps = psi[code] if big_m == 1 else zeros
    cph = phi[code] if big_m == 1 else zeros.copy()
    # anc[:, i] = index of the ancestor at depth c-1-i (i < big_m)
    anc = np.full((k, big_m), -1, dtype=np.int64)
    levels = [None, (cps, cph)]
    visited = k
    c = 1
    while True:
        n = c - big_m
        if n >= 1:
            par = anc[:, 0]
            par_cps = levels[c - 1][0][par]
            par_cph = levels[c - 1][1][par]
            ok = (par_cps <= t) & (cps > t)
            if ok.any():
                s_flag[n] = True
                q_anc = anc[ok, lag - 1]
                uq, first = np.unique(q_anc, return_index=True)
                q_cnt[n] = uq.size
                q_log[n] = logsumexp(par_cph[ok][first])
                p_anc = anc[ok, big_m - 1]
                best = np.full(levels[n][0].size, NEG_INF)
                np.maximum.at(best, p_anc, par_cph[ok])
                best = best[np.isfinite(best)]
                p_cnt[n] = best.size
                p_log[n] = logsumexp(best)
        alive = np.flatnonzero(cps <= t) if c < dmax else np.zeros(0, np.int64)
        if alive.size == 0:
            break
        counts, child = _children(succ, deg, syms[alive])
        visited += child.size
        if visited > cap:
            raise CapExceededError(visited, cap, exact=False)
        parent = np.repeat(alive, counts)
        code = (code[parent] * k + child) % km
        if c + 1 >= big_m:
            cps = cps[parent] + psi[code]
            cph = cph[parent] + phi[code]
        else:
            cps = np.zeros(child.size)
            cph = np.zeros(child.size)
        anc = np.concatenate([parent[:, None], anc[parent, : big_m - 1]], axis=1)
        syms = child
        c += 1
        levels.append((cps, cph))
        if len(levels) > big_m + 2:
            levels[len(levels) - big_m - 3] = None
    return s_flag, q_cnt, q_log, p_cnt, p_log, visited


def partition_sums(succ, deg, big_m, psi, phi, m_phi, t, n_max, cap):
    """Per-length partition sums of the stopping-time word family at level ``t``.

    Returns ``(s_flag, q_count, q_log, p_count, p_log, visited)``; arrays are
    indexed by the length ``n`` (index 0 unused).  ``q`` deduplicates at the
    depth where the phi-sum is determined, ``p`` keeps one maximal term per
    length-``n`` cylinder.
    """
    if use_numba():
        s_flag, q_cnt, q_mx, q_acc, p_cnt, p_mx, p_acc, visited = _partition_numba(
            succ, deg, big_m, psi, phi, m_phi, float(t), n_max, cap
        )
        if visited < 0:
            raise CapExceededError(cap + 1, cap, exact=False)
        return s_flag, q_cnt, _finish_lse(q_mx, q_acc), p_cnt, _finish_lse(p_mx, p_acc), visited
    return _partition_numpy(succ, deg, big_m, psi, phi, m_phi, float(t), n_max, cap)


# -------------------------------------------- first-crossing sums for R

@njit
def _crossing_numba(succ, deg, big_m, psi, chi, t, j_max, state_of_code, n_state_codes, log_weight, cap):
    k = succ.shape[0]
    km = k**big_m
    dmax = j_max + big_m - 1
    sym = np.zeros(dmax + 1, np.int64)
    code = np.zeros(dmax + 1, np.int64)
    cps = np.zeros(dmax + 1)
    cch = np.zeros(dmax + 1)
    nxt = np.zeros(dmax + 1, np.int64)
    mx = NEG_INF
    acc = 0.0
    count = 0
    visited = 0
    d = 0
    while True:
        nch = k if d == 0 else deg[sym[d]]
        if nxt[d] < nch:
            s = nxt[d] if d == 0 else succ[sym[d], nxt[d]]
            nxt[d] += 1
            c = d + 1
            visited += 1
            if visited > cap:
                return mx, acc, count, -1
            sym[c] = s
            code[c] = (code[d] * k + s) % km
            if c >= big_m:
                cps[c] = cps[d] + psi[code[c]]
                cch[c] = cch[d] + chi[code[c]]
            else:
                cps[c] = 0.0
                cch[c] = 0.0
            j = c - big_m + 1
            if j >= 1 and cps[c] > t:
                st = state_of_code[code[c] % n_state_codes]
                mx, acc = _lse_push(mx, acc, cch[c] + log_weight[j, st])
                count += 1
            elif c < dmax:
                d = c
                nxt[d] = 0
        else:
            if d == 0:
                break
            d -= 1
    return mx, acc, count, visited


def _crossing_numpy(succ, deg, big_m, psi, chi, t, j_max, state_of_code, n_state_codes, log_weight, cap):
    k = succ.shape[0]
    km = k**big_m
    dmax = j_max + big_m - 1
    syms = np.arange(k, dtype=np.int64)
    code = syms.copy()
    cps = psi[code] if big_m == 1 else np.zeros(k)
    cch = chi[code] if big_m == 1 else np.zeros(k)
    terms = []
    visited = k
    c = 1
    while True:
        j = c - big_m + 1
        crossed = (cps > t) if j >= 1 else np.zeros(syms.size, bool)
        if crossed.any():
            st = state_of_code[code[crossed] % n_state_codes]
            terms.append(cch[crossed] + log_weight[j, st])
        alive = np.flatnonzero(~crossed) if c < dmax else np.zeros(0, np.int64)
        if alive.size == 0:
            break
        counts, child = _children(succ, deg, syms[alive])
        visited += child.size
        if visited > cap:
            raise CapExceededError(visited, cap, exact=False)
        parent = np.repeat(alive, counts)
        code = (code[parent] * k + child) % km
        if c + 1 >= big_m:
            cps = cps[parent] + psi[code]
            cch = cch[parent] + chi[code]
        else:
            cps = np.zeros(child.size)
            cch = np.zeros(child.size)
        syms = child
        c += 1
    allv = np.concatenate(terms) if terms else np.zeros(0)
    return logsumexp(allv), allv.size, visited


def crossing_logsum(succ, deg, big_m, psi, chi, t, j_max, state_of_code, log_weight, cap):
    """log of sum over first-crossing words of exp(S_j chi + log_weight[j, state]).

    A first-crossing word has ``S_{j-1} psi <= t < S_j psi`` with ``j <= j_max``.
    """
    n_codes = state_of_code.size
    if use_numba():
        mx, acc, count, visited = _crossing_numba(
            succ, deg, big_m, psi, chi, float(t), j_max, state_of_code, n_codes, log_weight, cap
        )
        if visited < 0:
            raise CapExceededError(cap + 1, cap, exact=False)
        total = float(mx + np.log(acc)) if acc > 0 else NEG_INF
        return total, int(count), int(visited)
    total, count, visited = _crossing_numpy(
        succ, deg, big_m, psi, chi, float(t), j_max, state_of_code, n_codes, log_weight, cap
    )
    return total, int(count), int(visited)


# ----------------------------------------------------- power iteration

@njit
def _power_numba(mat, shift, tol, max_iters):
    k = mat.shape[0]
    x = np.full(k, 1.0 / k)
    y = np.zeros(k)
    lam_prev = -1.0
    lam = 0.0
    res = np.inf
    for it in range(1, max_iters + 1):
        lam = 0.0
        for i in range(k):
            acc = 0.0
            for j in range(k):
                acc += mat[i, j] * x[j]
            y[i] = acc
            lam += acc
        res = 0.0
        for i in range(k):
            r = abs(y[i] - lam * x[i])
            if r > res:
                res = r
        if res <= tol * lam and abs(lam - lam_prev) <= tol * lam:
            return lam, x, res, it, True
        lam_prev = lam
        norm = 0.0
        for i in range(k):
            y[i] += shift * x[i]
            norm += y[i]
        for i in range(k):
            x[i] = y[i] / norm
    return lam, x, res, max_iters, False


def _power_numpy(mat, shift, tol, max_iters):
    k = mat.shape[0]
    x = np.full(k, 1.0 / k)
    lam_prev = -1.0
    lam, res = 0.0, np.inf
    for it in range(1, max_iters + 1):
        y = mat @ x
        lam = y.sum()
        res = np.abs(y - lam * x).max()
        if res <= tol * lam and abs(lam - lam_prev) <= tol * lam:
            return lam, x, res, it, True
        lam_prev = lam
        y = y + shift * x
        x = y / y.sum()
    return lam, x, res, max_iters, False


def power_iteration(mat, shift, tol, max_iters):
    """Dominant eigenpair of a nonnegative irreducible matrix.

    Iterates ``x <- (mat + shift*I) x`` from the uniform vector, with
    ``sum(x) == 1``.  Stops when ``max|mat x - lam x| <= tol*lam`` and the
    eigenvalue estimate moved by at most ``tol*lam``.
    Returns ``(lam, x, residual, iterations, converged)``.
    """
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    if use_numba():
        lam, x, res, it, ok = _power_numba(mat, float(shift), float(tol), int(max_iters))
        return float(lam), x.copy(), float(res), int(it), bool(ok)
    return _power_numpy(mat, float(shift), float(tol), int(max_iters))

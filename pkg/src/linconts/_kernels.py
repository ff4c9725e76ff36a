"""Hot loops: per-round LP selection, KL-UCB indices, whole-run simulation.

``build(jit=True)`` returns numba-compiled kernels; ``build(jit=False)``
returns the numpy fallback. The two agree draw-for-draw: each round
consumes the stream in the same order.

Per-round stream order
    LP rounds: one Beta sample per arm in index order (LinConTS only),
    then one uniform to pick the arm, then one uniform for the reward event.
    Forced rounds (t < N): only the reward-event uniform.

Run kernels return ``(arms, events, mode, support, weights)`` where
``mode`` is 0 for forced rounds, 1 for LP rounds and 2 for the uniform
fallback, and ``support``/``weights`` hold the (at most two) arms of the
selection vector with ``-1`` padding.
"""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np

from . import _rng

FORCED, LP, UNIFORM = 0, 1, 2


def _identity(f):
    return f


def _lp_select_vec(mu, r, eta):
    """Vectorised twin of the loop kernel; identical tie-breaking."""
    n = mu.shape[0]
    high = mu >= eta
    if not high.any():
        return False, -1, -1, 0.0, 0.0, -np.inf
    single = np.where(high, mu * r, -np.inf)
    j = int(np.argmax(single))
    best = float(single[j])
    a, b, xa, xb = j, -1, 1.0, 0.0
    lo_idx = np.flatnonzero(~high)
    if lo_idx.size:
        hi_idx = np.flatnonzero(high)
        ml = mu[lo_idx][:, None]
        mh = mu[hi_idx][None, :]
        den = mh - ml
        wl = (mh - eta) / den
        wh = (eta - ml) / den
        val = wl * ml * r[lo_idx][:, None] + wh * mh * r[hi_idx][None, :]
        vmax = float(val.max())
        if vmax > best:
            li = np.broadcast_to(lo_idx[:, None], val.shape)
            hj = np.broadcast_to(hi_idx[None, :], val.shape)
            key = np.minimum(li, hj) * n + np.maximum(li, hj)
            flat = np.flatnonzero(val.ravel() == vmax)
            pick = flat[np.argmin(key.ravel()[flat])]
            p, q = np.unravel_index(pick, val.shape)
            lo, hi = int(lo_idx[p]), int(hi_idx[q])
            w_lo, w_hi = float(wl[p, q]), float(wh[p, q])
            best = vmax
            if lo < hi:
                a, b, xa, xb = lo, hi, w_lo, w_hi
            else:
                a, b, xa, xb = hi, lo, w_hi, w_lo
    return True, a, b, xa, xb, best


def _klucb_vec(s, k, thr, tol):
    s = np.asarray(s, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    out = np.empty(s.shape, dtype=np.float64)
    zero = k == 0
    out[zero] = 1.0
    p = np.where(zero, 0.0, s / np.where(zero, 1.0, k))
    if thr <= 0.0:
        out[~zero] = p[~zero]
        return out
    full = ~zero & (s == k)
    out[full] = np.exp(-thr / k[full])
    general = ~zero & ~full
    lo = p.copy()
    hi = np.ones_like(p)
    active = np.flatnonzero(general)
    while active.size:
        l = lo[active]
        h = hi[active]
        mid = 0.5 * (l + h)
        stop = (h - l <= tol * (1.0 - l)) | (mid <= l) | (mid >= h)
        go = ~stop
        active = active[go]
        mid = mid[go]
        pa = p[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = np.where(pa > 0.0, pa * np.log(pa / mid), 0.0)
        t2 = (1.0 - pa) * np.log((1.0 - pa) / (1.0 - mid))
        ok = k[active] * (t1 + t2) <= thr
        lo[active[ok]] = mid[ok]
        hi[active[~ok]] = mid[~ok]
    out[general] = lo[general]
    return out


def build(jit: bool) -> SimpleNamespace:
    if jit:
        import numba

        deco = numba.njit(nogil=True)
        next_double = _rng.next_double_nb
    else:
        deco = _identity
        next_double = _rng.next_double_py

    _normal, _gamma, beta_sample = _rng.make_samplers(next_double, deco)

    @deco
    def lp_select_loop(mu, r, eta):
        n = mu.shape[0]
        feasible = False
        best = -np.inf
        a = -1
        b = -1
        xa = 0.0
        xb = 0.0
        for j in range(n):
            if mu[j] >= eta:
                feasible = True
                v = mu[j] * r[j]
                if v > best:
                    best = v
                    a = j
                    b = -1
                    xa = 1.0
                    xb = 0.0
        if not feasible:
            return False, -1, -1, 0.0, 0.0, best
        for i in range(n):
            for j in range(i + 1, n):
                if mu[i] < eta and mu[j] >= eta:
                    lo = i
                    hi = j
                elif mu[j] < eta and mu[i] >= eta:
                    lo = j
                    hi = i
                else:
                    continue
                den = mu[hi] - mu[lo]
                w_lo = (mu[hi] - eta) / den
                w_hi = (eta - mu[lo]) / den
                v = w_lo * mu[lo] * r[lo] + w_hi * mu[hi] * r[hi]
                if v > best:
                    best = v
                    a = i
                    b = j
                    if lo == i:
                        xa = w_lo
                        xb = w_hi
                    else:
                        xa = w_hi
                        xb = w_lo
        return True, a, b, xa, xb, best

    @deco
    def kl_scalar(p, q):
        if q <= 0.0 or q >= 1.0:
            return 0.0 if p == q else np.inf
        res = 0.0
        if p > 0.0:
            res += p * math.log(p / q)
        if p < 1.0:
            res += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
        return res

    @deco
    def klucb_scalar(s, k, thr, tol):
        if k == 0:
            return 1.0
        p = s / k
        if thr <= 0.0:
            return p
        if s == k:
            return math.exp(-thr / k)
        lo = p
        hi = 1.0
        # width relative to the gap to 1 keeps k * d(p, q) accurate near q = 1
        while hi - lo > tol * (1.0 - lo):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if k * kl_scalar(p, mid) <= thr:
                lo = mid
            else:
                hi = mid
        return lo

    @deco
    def klucb_loop(s, k, thr, tol):
        out = np.empty(s.shape[0])
        for i in range(s.shape[0]):
            out[i] = klucb_scalar(float(s[i]), float(k[i]), thr, tol)
        return out

    @deco
    def sample_betas(alpha, beta, st):
        out = np.empty(alpha.shape[0])
        for i in range(alpha.shape[0]):
            out[i] = beta_sample(alpha[i], beta[i], st)
        return out

    lp_select = lp_select_loop if jit else _lp_select_vec
    klucb_indices = klucb_loop if jit else _klucb_vec

    @deco
    def pick_arm(feasible, a, b, xa, n, st):
        u = next_double(st)
        if not feasible:
            arm = int(u * n)
            if arm >= n:
                arm = n - 1
            return arm, UNIFORM
        if b < 0 or u < xa:
            return a, LP
        return b, LP

    @deco
    def _record(k, arm, mode_k, feasible, a, b, xa, xb, n, mode, support, weights):
        mode[k] = mode_k
        if mode_k == FORCED:
            support[k, 0] = arm
            weights[k, 0] = 1.0
        elif mode_k == LP:
            support[k, 0] = a
            weights[k, 0] = xa
            if b >= 0:
                support[k, 1] = b
                weights[k, 1] = xb

    @deco
    def run_linconts(mu, r, eta, horizon, st):
        n = mu.shape[0]
        alpha = np.ones(n)
        beta = np.ones(n)
        arms = np.empty(horizon, dtype=np.int64)
        events = np.empty(horizon, dtype=np.int8)
        mode = np.empty(horizon, dtype=np.int8)
        support = np.full((horizon, 2), -1, dtype=np.int64)
        weights = np.zeros((horizon, 2))
        for t in range(1, horizon + 1):
            k = t - 1
            if t < n:
                arm = t - 1
                _record(k, arm, FORCED, True, arm, -1, 1.0, 0.0, n, mode, support, weights)
            else:
                theta = sample_betas(alpha, beta, st)
                feasible, a, b, xa, xb, _obj = lp_select(theta, r, eta)
                arm, m = pick_arm(feasible, a, b, xa, n, st)
                _record(k, arm, m, feasible, a, b, xa, xb, n, mode, support, weights)
            ev = 1 if next_double(st) < mu[arm] else 0
            arms[k] = arm
            events[k] = ev
            alpha[arm] += ev
            beta[arm] += 1 - ev
        return arms, events, mode, support, weights

    @deco
    def run_klucb(mu, r, eta, horizon, c, tol, st):
        n = mu.shape[0]
        plays = np.zeros(n)
        succ = np.zeros(n)
        arms = np.empty(horizon, dtype=np.int64)
        events = np.empty(horizon, dtype=np.int8)
        mode = np.empty(horizon, dtype=np.int8)
        support = np.full((horizon, 2), -1, dtype=np.int64)
        weights = np.zeros((horizon, 2))
        for t in range(1, horizon + 1):
            k = t - 1
            if t < n:
                arm = t - 1
                _record(k, arm, FORCED, True, arm, -1, 1.0, 0.0, n, mode, support, weights)
            else:
                thr = math.log(t)
                if c != 0.0:
                    thr += c * math.log(math.log(t))
                idx = klucb_indices(succ, plays, thr, tol)
                feasible, a, b, xa, xb, _obj = lp_select(idx, r, eta)
                arm, m = pick_arm(feasible, a, b, xa, n, st)
                _record(k, arm, m, feasible, a, b, xa, xb, n, mode, support, weights)
            ev = 1 if next_double(st) < mu[arm] else 0
            arms[k] = arm
            events[k] = ev
            plays[arm] += 1.0
            succ[arm] += ev
        return arms, events, mode, support, weights

    return SimpleNamespace(
        name="numba" if jit else "numpy",
        jit=jit,
        next_double=next_double,
        beta_sample=beta_sample,
        sample_betas=sample_betas,
        lp_select=lp_select,
        lp_select_loop=lp_select_loop,
        kl_scalar=kl_scalar,
        klucb_scalar=klucb_scalar,
        klucb_indices=klucb_indices,
        pick_arm=pick_arm,
        run_linconts=run_linconts,
        run_klucb=run_klucb,
    )

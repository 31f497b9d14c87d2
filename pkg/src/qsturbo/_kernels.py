"""Compiled inner loops for trellis encoding and decoding.

Everything here works on plain arrays so that the Python-level classes stay
picklable and the kernels can be cached on disk by numba.
"""

import math

import numpy as np
from numba import njit

# Stand-in for log(0). Finite so that max* never sees inf - inf.
NEG = -1.0e300
LLR_CLAMP = 300.0


@njit(cache=True)
def maxstar(a, b):
    if a < b:
        a, b = b, a
    if b <= NEG:
        return a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True)
def encode_kernel(next_state, parity_out, feedback_in, message, memory, terminate):
    n = message.shape[0]
    total = n + memory if terminate else n
    sys = np.empty(total, dtype=np.int8)
    par = np.empty(total, dtype=np.int8)
    state = 0
    for k in range(n):
        u = message[k]
        sys[k] = u
        par[k] = parity_out[state, u]
        state = next_state[state, u]
    if terminate:
        for k in range(n, total):
            u = feedback_in[state]
            sys[k] = u
            par[k] = parity_out[state, u]
            state = next_state[state, u]
    return sys, par, state


@njit(cache=True)
def bcjr_extrinsic(next_state, parity_out, lsys, lpar, lapr, terminated):
    """Exact log-MAP pass; returns extrinsic LLRs (posterior - apriori - systematic).

    Branch metric for input u and parity p is u*(lsys+lapr) + p*lpar. The
    extrinsic part is marginalised over the parity term only, so the posterior
    decomposition holds exactly.
    """
    n = lsys.shape[0]
    ns = next_state.shape[0]
    alpha = np.full((n + 1, ns), NEG)
    beta = np.full((n + 1, ns), NEG)
    alpha[0, 0] = 0.0
    for k in range(n):
        lu = lsys[k] + lapr[k]
        lp = lpar[k]
        nxt = alpha[k + 1]
        cur = alpha[k]
        for s in range(ns):
            a = cur[s]
            if a <= NEG:
                continue
            for u in range(2):
                t = next_state[s, u]
                m = a + u * lu + parity_out[s, u] * lp
                nxt[t] = maxstar(nxt[t], m)
        top = NEG
        for s in range(ns):
            if nxt[s] > top:
                top = nxt[s]
        for s in range(ns):
            if nxt[s] > NEG:
                nxt[s] -= top

    if terminated:
        beta[n, 0] = 0.0
    else:
        for s in range(ns):
            beta[n, s] = 0.0
    for k in range(n - 1, -1, -1):
        lu = lsys[k] + lapr[k]
        lp = lpar[k]
        cur = beta[k]
        nb = beta[k + 1]
        for s in range(ns):
            acc = NEG
            for u in range(2):
                b = nb[next_state[s, u]]
                if b <= NEG:
                    continue
                acc = maxstar(acc, b + u * lu + parity_out[s, u] * lp)
            cur[s] = acc
        top = NEG
        for s in range(ns):
            if cur[s] > top:
                top = cur[s]
        for s in range(ns):
            if cur[s] > NEG:
                cur[s] -= top

    ext = np.empty(n)
    for k in range(n):
        lp = lpar[k]
        num = NEG
        den = NEG
        for s in range(ns):
            a = alpha[k, s]
            if a <= NEG:
                continue
            for u in range(2):
                b = beta[k + 1, next_state[s, u]]
                if b <= NEG:
                    continue
                m = a + parity_out[s, u] * lp + b
                if u == 1:
                    num = maxstar(num, m)
                else:
                    den = maxstar(den, m)
        e = num - den
        if e > LLR_CLAMP:
            e = LLR_CLAMP
        elif e < -LLR_CLAMP:
            e = -LLR_CLAMP
        ext[k] = e
    return ext


@njit(cache=True)
def viterbi_kernel(next_state, parity_out, lsys, lpar, n_info):
    """Full-frame soft Viterbi on a terminated trellis.

    Maximises sum(llr * (2c - 1)). On equal metrics the survivor coming
    through input bit 0 wins, and the forced start/end in state 0 makes the
    tie-break consistent along the whole frame.
    """
    n = lsys.shape[0]
    ns = next_state.shape[0]
    metric = np.full(ns, NEG)
    metric[0] = 0.0
    new = np.empty(ns)
    from_state = np.empty((n, ns), dtype=np.int32)
    from_input = np.empty((n, ns), dtype=np.int8)
    for k in range(n):
        for s in range(ns):
            new[s] = NEG
        ls = lsys[k]
        lp = lpar[k]
        for s in range(ns):
            m0 = metric[s]
            if m0 <= NEG:
                continue
            for u in range(2):
                t = next_state[s, u]
                p = parity_out[s, u]
                m = m0 + (2 * u - 1) * ls + (2 * p - 1) * lp
                if m > new[t] or (m == new[t] and u < from_input[k, t]):
                    new[t] = m
                    from_state[k, t] = s
                    from_input[k, t] = u
        for s in range(ns):
            metric[s] = new[s]
    best = metric[0]
    out = np.empty(n, dtype=np.int8)
    state = 0
    for k in range(n - 1, -1, -1):
        out[k] = from_input[k, state]
        state = from_state[k, state]
    return out[:n_info], best

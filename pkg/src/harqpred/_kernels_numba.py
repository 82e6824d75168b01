"""Compiled inner loops. Semantics are identical to ``_kernels_numpy``."""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def batch_burst(eps, p_fp, p_fn, delay):
    m, n = p_fp.shape
    cum = np.empty(n + 1)
    cum[0] = 1.0
    for i in range(n):
        cum[i + 1] = cum[i] * eps[i]
    last = n - delay
    e_t = np.empty(m)
    bler = np.empty(m)
    for r in range(m):
        undecoded = 1.0
        decoded = 0.0
        nack_run = 1.0
        fail = 0.0
        acc = 0.0
        for i in range(1, last):
            e = eps[i - 1]
            fp = p_fp[r, i - 1]
            fn = p_fn[r, i - 1]
            still = undecoded * e
            done = decoded + undecoded * (1.0 - e)
            acc += (i + delay) * (still * fp + done * (1.0 - fn))
            undecoded = still * (1.0 - fp)
            decoded = done * fn
            fail += nack_run * fp * cum[i + delay]
            nack_run = nack_run * (1.0 - fp)
        acc += n * (undecoded + decoded)
        e_t[r] = acc
        bler[r] = fail + nack_run * cum[n]
    return e_t, bler


@njit(cache=True, nogil=True)
def enumerate_burst(eps, p_fp, p_fn, delay, predict):
    n = eps.shape[0]
    pmf = np.zeros(n + 1)
    fail = 0.0
    state = np.zeros(n, np.bool_)
    n_pred = (1 << n) if predict else 1
    for dcode in range(1 << n):
        pd = 1.0
        dec = False
        for i in range(n):
            if (dcode >> i) & 1:
                pd *= 1.0 - eps[i]
                dec = True
            else:
                pd *= eps[i]
            state[i] = dec
        if pd == 0.0:
            continue
        for acode in range(n_pred):
            p = pd
            first = -1
            for i in range(n):
                if predict:
                    q = (1.0 - p_fn[i]) if state[i] else p_fp[i]
                    ack = (acode >> i) & 1 == 1
                    p *= q if ack else 1.0 - q
                else:
                    ack = state[i]
                if ack and first < 0:
                    first = i
            if p == 0.0:
                continue
            t = n if first < 0 else min(first + 1 + delay, n)
            pmf[t] += p
            if not state[t - 1]:
                fail += p
    return pmf, fail


@njit(cache=True, nogil=True)
def enumerate_schedule(eps, cum_sizes):
    s = eps.shape[0]
    k = cum_sizes.shape[0]
    pmf = np.zeros(s + 1)
    fail = 0.0
    for dcode in range(1 << s):
        p = 1.0
        first = s + 1
        for i in range(s):
            if (dcode >> i) & 1:
                p *= 1.0 - eps[i]
                if first > s:
                    first = i + 1
            else:
                p *= eps[i]
        if p == 0.0:
            continue
        t = cum_sizes[k - 1]
        for j in range(k):
            if cum_sizes[j] >= first:
                t = cum_sizes[j]
                break
        pmf[t] += p
        if first > cum_sizes[k - 1]:
            fail += p
    return pmf, fail


@njit(cache=True, nogil=True)
def replay_burst(eps, p_fp, p_fn, delay, u_dec, u_pred, predict):
    m, n = u_dec.shape
    sent = np.empty(m, np.int64)
    delivered = np.empty(m, np.bool_)
    for r in range(m):
        first_dec = n + 1
        for i in range(n):
            if u_dec[r, i] >= eps[i]:
                first_dec = i + 1
                break
        t = n
        for i in range(n):
            dec = i + 1 >= first_dec
            if predict:
                if dec:
                    ack = u_pred[r, i] >= p_fn[i]
                else:
                    ack = u_pred[r, i] < p_fp[i]
            else:
                ack = dec
            if ack:
                t = min(i + 1 + delay, n)
                break
        sent[r] = t
        delivered[r] = first_dec <= t
    return sent, delivered


@njit(cache=True, nogil=True)
def replay_schedule(eps, cum_sizes, u_dec):
    m, s = u_dec.shape
    k = cum_sizes.shape[0]
    sent = np.empty(m, np.int64)
    delivered = np.empty(m, np.bool_)
    for r in range(m):
        first_dec = s + 1
        for i in range(s):
            if u_dec[r, i] >= eps[i]:
                first_dec = i + 1
                break
        t = cum_sizes[k - 1]
        for j in range(k):
            if cum_sizes[j] >= first_dec:
                t = cum_sizes[j]
                break
        sent[r] = t
        delivered[r] = first_dec <= cum_sizes[k - 1]
    return sent, delivered

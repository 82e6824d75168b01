"""Vectorized numpy implementations of the compiled kernels.

Used when numba is unavailable or disabled through ``HARQPRED_DISABLE_NUMBA``.
"""
import numpy as np

_CHUNK = 1 << 20


def batch_burst(eps, p_fp, p_fn, delay):
    p_fp = np.asarray(p_fp, dtype=float)
    p_fn = np.asarray(p_fn, dtype=float)
    m, n = p_fp.shape
    cum = np.empty(n + 1)
    cum[0] = 1.0
    for i in range(n):
        cum[i + 1] = cum[i] * eps[i]
    last = n - delay
    undecoded = np.ones(m)
    decoded = np.zeros(m)
    nack_run = np.ones(m)
    fail = np.zeros(m)
    acc = np.zeros(m)
    for i in range(1, last):
        e = eps[i - 1]
        fp = p_fp[:, i - 1]
        fn = p_fn[:, i - 1]
        still = undecoded * e
        done = decoded + undecoded * (1.0 - e)
        acc += (i + delay) * (still * fp + done * (1.0 - fn))
        undecoded = still * (1.0 - fp)
        decoded = done * fn
        fail += nack_run * fp * cum[i + delay]
        nack_run = nack_run * (1.0 - fp)
    acc += n * (undecoded + decoded)
    return acc, fail + nack_run * cum[n]


def _bits(n):
    return ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(bool)


def _first_true(mask, default):
    has = mask.any(axis=-1)
    return np.where(has, mask.argmax(axis=-1), default)


def enumerate_burst(eps, p_fp, p_fn, delay, predict):
    eps = np.asarray(eps, dtype=float)
    n = eps.shape[0]
    dbits = _bits(n)
    pd = np.where(dbits, 1.0 - eps, eps).prod(axis=1)
    state = np.logical_or.accumulate(dbits, axis=1)
    keep = pd != 0.0
    pd, state = pd[keep], state[keep]
    pmf = np.zeros(n + 1)
    fail = 0.0
    if not predict:
        first = _first_true(state, -1)
        t = np.where(first < 0, n, np.minimum(first + 1 + delay, n))
        pmf += np.bincount(t, weights=pd, minlength=n + 1)
        fail += pd[~state[np.arange(len(t)), t - 1]].sum()
        return pmf, fail
    abits = _bits(n)
    step = max(1, _CHUNK // abits.shape[0])
    for lo in range(0, pd.shape[0], step):
        st = state[lo:lo + step, None, :]
        q = np.where(st, 1.0 - p_fn, p_fp)
        p = pd[lo:lo + step, None] * np.where(abits[None], q, 1.0 - q).prod(axis=2)
        first = _first_true(abits, -1)
        t = np.where(first < 0, n, np.minimum(first + 1 + delay, n))
        t = np.broadcast_to(t, p.shape)
        dec_at_t = np.take_along_axis(
            np.broadcast_to(st, p.shape + (n,)), (t - 1)[..., None], axis=2
        )[..., 0]
        pmf += np.bincount(t.ravel(), weights=p.ravel(), minlength=n + 1)
        fail += p[~dec_at_t].sum()
    return pmf, fail


def enumerate_schedule(eps, cum_sizes):
    eps = np.asarray(eps, dtype=float)
    s = eps.shape[0]
    dbits = _bits(s)
    p = np.where(dbits, 1.0 - eps, eps).prod(axis=1)
    first = _first_true(dbits, s) + 1
    idx = np.searchsorted(cum_sizes, first, side="left")
    t = np.where(idx < len(cum_sizes), cum_sizes[np.minimum(idx, len(cum_sizes) - 1)], cum_sizes[-1])
    pmf = np.bincount(t, weights=p, minlength=s + 1)
    fail = p[first > cum_sizes[-1]].sum()
    return pmf, fail


def replay_burst(eps, p_fp, p_fn, delay, u_dec, u_pred, predict):
    m, n = u_dec.shape
    first_dec = _first_true(u_dec >= eps, n) + 1
    state = np.arange(1, n + 1)[None, :] >= first_dec[:, None]
    if predict:
        ack = np.where(state, u_pred >= p_fn, u_pred < p_fp)
    else:
        ack = state
    first = _first_true(ack, -1)
    sent = np.where(first < 0, n, np.minimum(first + 1 + delay, n)).astype(np.int64)
    return sent, first_dec <= sent


def replay_schedule(eps, cum_sizes, u_dec):
    m, s = u_dec.shape
    first_dec = _first_true(u_dec >= eps, s) + 1
    idx = np.searchsorted(cum_sizes, first_dec, side="left")
    sent = np.where(idx < len(cum_sizes), cum_sizes[np.minimum(idx, len(cum_sizes) - 1)], cum_sizes[-1])
    return sent.astype(np.int64), first_dec <= cum_sizes[-1]

import os
import subprocess
import sys

import numpy as np
import pytest

from harqpred import kernels
from harqpred import _kernels_numpy as npk

nb = pytest.importorskip("harqpred._kernels_numba")


def _case(rng, n):
    eps = rng.random(n)
    eps[rng.random(n) < 0.2] = 0.0
    return eps, rng.random(n), rng.random(n)


@pytest.mark.parametrize("n,delay", [(1, 1), (4, 1), (6, 2), (9, 3), (14, 5)])
def test_batch_burst_backends_agree(n, delay):
    rng = np.random.default_rng(n)
    eps = rng.random(n)
    fp, fn = rng.random((7, n)), rng.random((7, n))
    a = npk.batch_burst(eps, fp, fn, delay)
    b = nb.batch_burst(eps, fp, fn, delay)
    assert np.allclose(a[0], b[0], rtol=0, atol=1e-13)
    assert np.allclose(a[1], b[1], rtol=0, atol=1e-13)


@pytest.mark.parametrize("predict", [False, True])
@pytest.mark.parametrize("n,delay", [(1, 1), (3, 1), (5, 2), (6, 6)])
def test_enumerate_backends_agree(n, delay, predict):
    eps, fp, fn = _case(np.random.default_rng(10 + n), n)
    pa, fa = npk.enumerate_burst(eps, fp, fn, delay, predict)
    pb, fb = nb.enumerate_burst(eps, fp, fn, delay, predict)
    assert np.allclose(pa, pb, atol=1e-14) and abs(fa - fb) <= 1e-14


@pytest.mark.parametrize("predict", [False, True])
def test_replay_backends_identical(predict):
    rng = np.random.default_rng(3)
    n, delay = 8, 2
    eps, fp, fn = _case(rng, n)
    u = rng.random((5000, 2 * n))
    sa, da = npk.replay_burst(eps, fp, fn, delay, u[:, :n], u[:, n:], predict)
    sb, db = nb.replay_burst(eps, fp, fn, delay, u[:, :n], u[:, n:], predict)
    assert np.array_equal(sa, sb) and np.array_equal(da, db)


def test_schedule_kernels_identical():
    rng = np.random.default_rng(4)
    eps = rng.random(7)
    cum = np.array([2, 5, 7], dtype=np.int64)
    u = rng.random((4000, 7))
    sa, da = npk.replay_schedule(eps, cum, u)
    sb, db = nb.replay_schedule(eps, cum, u)
    assert np.array_equal(sa, sb) and np.array_equal(da, db)
    pa, fa = npk.enumerate_schedule(eps, cum)
    pb, fb = nb.enumerate_schedule(eps, cum)
    assert np.allclose(pa, pb, atol=1e-15) and abs(fa - fb) <= 1e-15


def test_env_flag_selects_numpy():
    env = dict(os.environ, HARQPRED_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from harqpred import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_default_backend_is_numba():
    if os.environ.get("HARQPRED_DISABLE_NUMBA"):
        pytest.skip("numba disabled in this environment")
    assert kernels.BACKEND == "numba"
    assert set(kernels.backends()) == {"numpy", "numba"}

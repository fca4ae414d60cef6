import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenwave import _accel
from degenwave.kernels import oscillator_sweep, partial_panel, q1_element_stiffness

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def test_sweep_constant_forcing_closed_form():
    omega = np.array([1.0, 3.0])
    K, dt = 50, 0.02
    g = np.ones((K + 1, 2))
    Y, V = oscillator_sweep(omega, np.zeros(2), np.zeros(2), g, dt, use_numba=False)
    t = np.arange(K + 1) * dt
    assert Y == pytest.approx((1 - np.cos(np.outer(t, omega))) / omega**2, abs=1e-14)
    assert V == pytest.approx(np.sin(np.outer(t, omega)) / omega, abs=1e-14)


def test_partial_panel_matches_full_panel():
    rng = np.random.default_rng(0)
    omega = rng.uniform(0.5, 20, 5)
    y, v, a, bb = rng.standard_normal((4, 5))
    g = np.stack([a, a + bb * 0.1])
    Y, V = oscillator_sweep(omega, y, v, g, 0.1, use_numba=False)
    yp, vp = partial_panel(omega, y, v, a, bb, 0.1)
    assert yp == pytest.approx(Y[1], rel=1e-12) and vp == pytest.approx(V[1], rel=1e-12)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 40), K=st.integers(1, 300))
def test_sweep_backends_agree(seed, m, K):
    rng = np.random.default_rng(seed)
    omega = np.sqrt(rng.uniform(0.1, 1e4, m))
    y0, v0 = rng.standard_normal((2, m))
    g = rng.standard_normal((K + 1, m))
    a = oscillator_sweep(omega, y0, v0, g, 1.0 / K, use_numba=False)
    b = oscillator_sweep(omega, y0, v0, g, 1.0 / K, use_numba=True)
    for x, y in zip(a, b):
        assert np.abs(x - y).max() <= 1e-12 * (1 + np.abs(x).max())


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 200))
def test_stiffness_backends_agree(seed, n):
    rng = np.random.default_rng(seed)
    wq = rng.uniform(0, 3, (n, 16))
    G = rng.standard_normal((16, 4, 4))
    a = q1_element_stiffness(wq, G, use_numba=False)
    b = q1_element_stiffness(wq, G, use_numba=True)
    assert np.abs(a - b).max() <= 1e-13 * (1 + np.abs(a).max())


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba" if _accel.HAVE_NUMBA else "numpy")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, DEGENWAVE_NO_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from degenwave import backend; print(backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_pipelines_agree_across_backends():
    code = ("import numpy as np\n"
            "from degenwave import *\n"
            "s = assemble(WeightSpec.power(0.5, (0.5, 0.5), dimension=2), build_grid(Domain.rectangle(0, 1, 0, 1), 9))\n"
            "b = solve_eigen(s, 6)\n"
            "u = BoundarySignal(np.linspace(0, 1, 51), np.outer(np.ones(s.n_boundary), np.linspace(0, 1, 51) ** 2))\n"
            "print(repr(float(np.sum(s.K_full.data))), repr(float(lift_L(b, u, 1.0).sum())))\n")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, DEGENWAVE_NO_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                   text=True, check=True).stdout.split())
    assert np.allclose(np.array(outs[0], float), np.array(outs[1], float), rtol=1e-12, atol=1e-12)


@needs_numba
def test_thread_cap(monkeypatch):
    monkeypatch.setenv("DEGENWAVE_THREADS", "1")
    assert _accel.configure_threads() == 1

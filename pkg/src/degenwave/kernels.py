"""Hot numeric kernels with a numba path and a pure-numpy twin.

``oscillator_sweep`` advances decoupled forced oscillators
``y'' + omega**2 y = g(t)`` exactly across uniform time panels on which ``g``
is linear.  It is the inner loop of every Duhamel, boundary-lift and Gramian
evaluation.  ``q1_element_stiffness`` forms the 4x4 weighted stiffness blocks
of bilinear rectangles from weight samples at the quadrature points.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit


def panel_coefficients(omega: np.ndarray, tau: float) -> tuple[np.ndarray, ...]:
    """Per-mode propagation coefficients for a panel of length ``tau``.

    Returns ``(c, s_over_w, w_s, a_y, b_y, a_v, b_v)`` such that with the panel
    forcing ``g(t_k + r) = a + b r`` the exact update is::

        y' = c*y + s_over_w*v + a_y*a + b_y*b
        v' = -w_s*y + c*v + a_v*a + b_v*b
    """
    omega = np.asarray(omega, dtype=float)
    x = omega * tau
    c = np.cos(x)
    s = np.sin(x)
    w2 = omega * omega
    half = np.sin(0.5 * x)
    one_minus_c = 2.0 * half * half
    # x - sin(x) loses digits for small x; use the series there.
    small = np.abs(x) < 1e-3
    xs = np.where(small, x, 0.0)
    x_minus_s = np.where(small, xs**3 / 6.0 - xs**5 / 120.0 + xs**7 / 5040.0, x - s)
    s_over_w = s / omega
    a_y = one_minus_c / w2
    b_y = x_minus_s / (w2 * omega)
    a_v = s_over_w
    b_v = one_minus_c / w2
    return c, s_over_w, omega * s, a_y, b_y, a_v, b_v


def _sweep_numpy(coefs, y0, v0, g, dt):
    c, sw, ws, a_y, b_y, a_v, b_v = coefs
    n_t = g.shape[0]
    Y = np.empty_like(g)
    V = np.empty_like(g)
    y = y0.astype(float).copy()
    v = v0.astype(float).copy()
    Y[0] = y
    V[0] = v
    for k in range(n_t - 1):
        a = g[k]
        b = (g[k + 1] - g[k]) / dt
        y_new = c * y + sw * v + a_y * a + b_y * b
        v = -ws * y + c * v + a_v * a + b_v * b
        y = y_new
        Y[k + 1] = y
        V[k + 1] = v
    return Y, V


@njit
def _sweep_loop(c, sw, ws, a_y, b_y, a_v, b_v, y0, v0, g, dt):
    n_t, m = g.shape
    Y = np.empty((n_t, m))
    V = np.empty((n_t, m))
    for n in range(m):
        y = y0[n]
        v = v0[n]
        Y[0, n] = y
        V[0, n] = v
        for k in range(n_t - 1):
            a = g[k, n]
            b = (g[k + 1, n] - a) / dt
            y_new = c[n] * y + sw[n] * v + a_y[n] * a + b_y[n] * b
            v = -ws[n] * y + c[n] * v + a_v[n] * a + b_v[n] * b
            y = y_new
            Y[k + 1, n] = y
            V[k + 1, n] = v
    return Y, V


def _sweep_numba(coefs, y0, v0, g, dt):
    c, sw, ws, a_y, b_y, a_v, b_v = coefs
    return _sweep_loop(c, sw, ws, a_y, b_y, a_v, b_v,
                       np.ascontiguousarray(y0, dtype=float),
                       np.ascontiguousarray(v0, dtype=float),
                       np.ascontiguousarray(g, dtype=float), float(dt))


def oscillator_sweep(omega, y0, v0, g, dt, *, use_numba: bool | None = None):
    """Exact states of ``y'' + omega^2 y = g`` at every node of a uniform grid.

    Parameters
    ----------
    omega : (m,) array of positive angular frequencies.
    y0, v0 : (m,) initial position and velocity.
    g : (K+1, m) forcing samples; linear between consecutive samples.
    dt : panel length.

    Returns
    -------
    Y, V : (K+1, m) positions and velocities at the grid nodes.
    """
    g = np.asarray(g, dtype=float)
    coefs = panel_coefficients(omega, dt)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _sweep_numba(coefs, y0, v0, g, dt)
    return _sweep_numpy(coefs, np.asarray(y0, float), np.asarray(v0, float), g, dt)


def partial_panel(omega, y, v, a, b, tau):
    """Advance states ``(y, v)`` by ``tau`` under forcing ``a + b r``."""
    c, sw, ws, a_y, b_y, a_v, b_v = panel_coefficients(omega, tau)
    y_new = c * y + sw * v + a_y * a + b_y * b
    v_new = -ws * y + c * v + a_v * a + b_v * b
    return y_new, v_new


def _stiffness_numpy(wq, G):
    return np.einsum("eq,qij->eij", wq, G)


@njit
def _stiffness_loop(wq, G):
    n_e, n_q = wq.shape
    out = np.zeros((n_e, 4, 4))
    for e in range(n_e):
        for q in range(n_q):
            wv = wq[e, q]
            for i in range(4):
                for j in range(4):
                    out[e, i, j] += wv * G[q, i, j]
    return out


def q1_element_stiffness(wq, G, *, use_numba: bool | None = None):
    """Element stiffness blocks ``sum_q w(x_q) G[q]`` for every element.

    ``wq`` is (n_elements, n_quad) weight samples and ``G`` is (n_quad, 4, 4)
    holding quadrature weight * Jacobian * grad(phi_i).grad(phi_j).
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    wq = np.ascontiguousarray(wq, dtype=float)
    G = np.ascontiguousarray(G, dtype=float)
    if use_numba:
        return _stiffness_loop(wq, G)
    return _stiffness_numpy(wq, G)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenwave import (EnergyState, HUMOperator, ParameterError, adjoint_solve, duality_check,
                       gramian_apply, hum_control, observe, to_coeffs, unique_continuation_probe)
from degenwave.controllability import conjugate_residual
from degenwave.reference import midpoint_boundary_direct
from degenwave.spectral import energy_norm_sq


@pytest.fixture(scope="module")
def string_op(string_basis):
    return HUMOperator(string_basis, 2.2, 2200)


def test_adjoint_terminal_data(string_basis, rng):
    z0, z1 = rng.standard_normal((2, string_basis.m))
    s = adjoint_solve(string_basis, z0, z1, 1.5, 1.5)
    assert s.y == pytest.approx(z0) and s.v == pytest.approx(z1)
    with pytest.raises(ParameterError):
        adjoint_solve(string_basis, z0, z1, 1.5, 2.0)


def test_adjoint_velocity_is_time_derivative(degen_basis, rng):
    z0, z1 = rng.standard_normal((2, degen_basis.m))
    d = 1e-5
    a = adjoint_solve(degen_basis, z0, z1, 2.0, 0.7 + d).y
    b = adjoint_solve(degen_basis, z0, z1, 2.0, 0.7 - d).y
    v = adjoint_solve(degen_basis, z0, z1, 2.0, 0.7).v
    assert np.linalg.norm((a - b) / (2 * d) - v) < 1e-6 * np.linalg.norm(v)


def test_gramian_symmetric(string_op, rng):
    m = string_op.basis.m
    e = (rng.standard_normal(m), rng.standard_normal(m))
    f = (rng.standard_normal(m), rng.standard_normal(m))
    Le, Lf = string_op.apply(*e), string_op.apply(*f)
    a = Le[0] @ f[0] + Le[1] @ f[1]
    b = Lf[0] @ e[0] + Lf[1] @ e[1]
    assert abs(a - b) < 1e-12 * abs(a)
    assert string_op.quadratic(*e) == pytest.approx(Le[0] @ e[0] + Le[1] @ e[1], rel=1e-12)


def test_gramian_apply_wrapper(string_basis, string_op, rng):
    e = (rng.standard_normal(string_basis.m), rng.standard_normal(string_basis.m))
    a = gramian_apply(string_basis, e, 2.2, 2200)
    b = string_op.apply(*e)
    assert a[0] == pytest.approx(b[0]) and a[1] == pytest.approx(b[1])


def test_quadratic_form_is_observation_energy(string_basis):
    b = string_basis
    T, K = 2.2, 22000
    op = HUMOperator(b, T, K)
    rng = np.random.default_rng(3)
    n = np.arange(1, b.m + 1)
    e = (rng.standard_normal(b.m) / n**2, rng.standard_normal(b.m) / n)
    obs = observe(b, *e, T, op.times)
    assert op.quadratic(*e) == pytest.approx(obs.l2_norm(b.system.grid) ** 2, rel=1e-4)


def test_dense_gramian_psd(degen_basis):
    G = HUMOperator(degen_basis, 2.0, 2000).dense(8)
    assert np.abs(G - G.T).max() < 1e-10 * np.abs(G).max()
    ev = np.linalg.eigvalsh(0.5 * (G + G.T))
    assert ev.min() >= -1e-10 * ev.max()


def test_conjugate_residual_solves_spd(rng):
    Q = rng.standard_normal((30, 30))
    A = Q @ Q.T + 0.1 * np.eye(30)
    b = rng.standard_normal(30)
    x, hist, it, krylov, conv = conjugate_residual(lambda v: A @ v, b, tol=1e-12, maxiter=500)
    assert conv
    assert np.linalg.norm(A @ x - b) < 1e-10 * np.linalg.norm(b)
    assert np.all(np.diff(hist) <= 1e-14 * hist[0])


def test_conjugate_residual_zero_rhs():
    x, hist, it, krylov, conv = conjugate_residual(lambda v: v, np.zeros(4), tol=1e-8, maxiter=10)
    assert conv and it == 0 and not np.any(x)


def test_hum_string_hits_target(string_basis):
    b = string_basis
    target = EnergyState(np.eye(b.m)[0], np.zeros(b.m))
    res = hum_control(b, target, 2.2, 1e-8, 1e-10, 200)
    tnorm = np.sqrt(energy_norm_sq(b, target.y, target.v))
    assert res.converged and res.cg_iterations <= 200
    assert res.residual_energy_norm < 1e-3 * tnorm
    assert res.control.values.shape == (2, 2201)
    assert np.all(np.diff(res.residual_history) <= 0)
    y, v = midpoint_boundary_direct(b.system, res.control.times, res.control.values, 2.2, 2.2 / 4400)
    miss = np.sqrt(energy_norm_sq(b, to_coeffs(b, y) - res.achieved.y, to_coeffs(b, v) - res.achieved.v))
    assert miss < 1e-2 * np.sqrt(energy_norm_sq(b, res.achieved.y, res.achieved.v))


def test_hum_one_sided_support(string_basis):
    b = string_basis
    target = EnergyState(np.eye(b.m)[0], np.zeros(b.m))
    res = hum_control(b, target, 2.2, 1e-8, 1e-10, 200, support=[1])
    assert not np.any(res.control.values[0])
    assert res.residual_energy_norm < 1e-2


def test_hum_zero_target(string_basis):
    res = hum_control(string_basis, EnergyState.zero(string_basis.m), 2.2)
    assert res.converged and not np.any(res.control.values)


def test_hum_rejects_bad_eps(string_basis):
    with pytest.raises(ParameterError):
        hum_control(string_basis, EnergyState.zero(string_basis.m), 2.2, eps=0.0)


def test_unique_continuation_string_grows_with_T(string_basis):
    s = [unique_continuation_probe(string_basis, T, 1, 1e-3).sigma_min for T in (1.0, 2.0, 4.0)]
    assert s[0] < s[1] < s[2]


def test_probe_requires_whole_steps(string_basis):
    with pytest.raises(ParameterError):
        unique_continuation_probe(string_basis, 1.0, 2, 0.3)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_duality_property(string_basis, seed):
    rng = np.random.default_rng(seed)
    b = string_basis
    from degenwave import BoundarySignal
    times = np.linspace(0.0, 1.0, 4001)
    A = rng.standard_normal((2, 2))
    u = BoundarySignal(times, A[:, :1] * np.sin(np.pi * times) + A[:, 1:] * times**2)
    n = np.arange(1, b.m + 1)
    lhs, rhs = duality_check(b, rng.standard_normal(b.m) / n**2, rng.standard_normal(b.m) / n**3, u)
    assert lhs == pytest.approx(rhs, rel=1e-4, abs=1e-8)


def test_adjoint_roundtrip_and_energy(degen_basis, rng):
    from degenwave import energy, homogeneous_solve
    b = degen_basis
    z0, z1 = rng.standard_normal((2, b.m))
    start = adjoint_solve(b, z0, z1, 3.0, 0.0)
    end = homogeneous_solve(b, start, 3.0)
    assert np.abs(end.y - z0).max() < 1e-12 * np.abs(z0).max() * 10
    assert np.abs(end.v - z1).max() < 1e-12 * b.omega.max() * np.abs(z0).max()
    e = energy(b, EnergyState(z0, z1))
    for t in (0.0, 1.1, 2.9):
        assert energy(b, adjoint_solve(b, z0, z1, 3.0, t)) == pytest.approx(e, rel=1e-12)


def test_string_observation_amplitude(string_basis):
    b = string_basis
    times = np.linspace(0.0, 2.2, 2201)
    obs = observe(b, np.eye(b.m)[0], np.zeros(b.m), 2.2, times)
    assert np.abs(obs.values).max() == pytest.approx(np.sqrt(2) * np.pi, abs=1e-2)
    # same profile at both ends for the symmetric first mode
    assert obs.values[0] == pytest.approx(obs.values[1], abs=1e-10)


def test_observation_linearity(degen_basis, rng):
    b = degen_basis
    times = np.linspace(0.0, 1.0, 51)
    e, f = rng.standard_normal((2, 2, b.m))
    a, c = 0.7, -1.9
    lhs = observe(b, a * e[0] + c * f[0], a * e[1] + c * f[1], 1.0, times).values
    rhs = a * observe(b, *e, 1.0, times).values + c * observe(b, *f, 1.0, times).values
    assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(lhs).max()


def test_gramian_slot_convention(string_op, rng):
    # Lambda (z0, z1) returns (velocity, position) of the state the control reaches
    m = string_op.basis.m
    z0, z1 = rng.standard_normal((2, m))
    st = string_op.terminal_state(string_op.control(z0, z1))
    w0, w1 = string_op.apply(z0, z1)
    assert np.array_equal(w0, st.v) and np.array_equal(w1, st.y)
    # pairing: <Lambda e, e> = (y_t(T), z0) + (y(T), z1) = |u|^2
    assert w0 @ z0 + w1 @ z1 == pytest.approx(string_op.quadratic(z0, z1), rel=1e-12)


def test_string_single_mode_probe_positive(string_basis):
    assert unique_continuation_probe(string_basis, 2.2, 1, 1e-3).sigma_min > 0


def test_zero_adjoint_data_gives_zero_trace(string_basis):
    obs = observe(string_basis, np.zeros(string_basis.m), np.zeros(string_basis.m), 1.0, np.linspace(0, 1, 11))
    assert not np.any(obs.values)

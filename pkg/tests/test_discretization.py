import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from degenwave import (Domain, ParameterError, WeightSpec, assemble, build_grid, conormal_trace,
                       green_identity_residual, norms)
from degenwave.discretization import weight_integral_1d


def test_grid_layout_1d():
    g = build_grid(Domain.interval(0.0, 1.0), 5)
    assert g.nodes[:, 0].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert g.boundary.tolist() == [0, 4]
    assert g.interior.tolist() == [1, 2, 3]
    assert np.all(g.boundary_measure == 1.0)


def test_grid_layout_2d():
    g = build_grid(Domain.rectangle(0.0, 2.0, 0.0, 1.0), (5, 3))
    assert g.n_nodes == 15
    assert g.nodes[1].tolist() == [0.5, 0.0]
    assert g.interior.tolist() == [6, 7, 8]
    assert g.boundary_measure.sum() == pytest.approx(6.0)


def test_grid_rejects_small_or_mismatched_resolution():
    with pytest.raises(ParameterError):
        build_grid(Domain.interval(0.0, 1.0), 2)
    with pytest.raises(ParameterError):
        build_grid(Domain.interval(0.0, 1.0), (5, 5))


def test_string_stencil():
    sysm = assemble(WeightSpec.constant(), build_grid(Domain.interval(0.0, 1.0), 5))
    K = sysm.K_full.toarray()
    assert K[2, 1:4] == pytest.approx([-4.0, 8.0, -4.0])
    assert sysm.mass == pytest.approx([0.125, 0.25, 0.25, 0.25, 0.125])


def test_power_weight_stiffness_uses_exact_element_integrals():
    g = build_grid(Domain.interval(-1.0, 1.0), 3)
    sysm = assemble(WeightSpec.power(0.5, (0.0,)), g)
    # each element integrates |x|^0.5 over [0, 1] exactly: 2/3, and h = 1
    assert sysm.K_full.toarray()[1, 1] == pytest.approx(4.0 / 3.0)


def test_weight_integral_matches_quadrature():
    spec = WeightSpec.power(0.7, (0.3,))
    a, b = np.array([-1.0, 0.1]), np.array([0.2, 0.9])
    from scipy.integrate import quad
    ref = [quad(lambda x: abs(x - 0.3) ** 0.7, lo, hi, points=[0.3])[0] for lo, hi in zip(a, b)]
    assert weight_integral_1d(spec, a, b) == pytest.approx(ref, rel=1e-10)


def test_stiffness_structure_2d(square_system):
    K = square_system.K_full
    assert abs(K - K.T).max() == 0.0
    assert np.abs(K @ np.ones(K.shape[0])).max() < 1e-12 * abs(K).max()
    assert square_system.mass.sum() == pytest.approx(1.0)
    ev = np.linalg.eigvalsh(square_system.K_II.toarray())
    assert ev.min() > 0


def test_weighted_h1_norm_of_bubble():
    # |x|^0.5 (1 - 2x)^2 on (0, 1) integrates to 22/105
    g = build_grid(Domain.interval(0.0, 1.0), 2001)
    sysm = assemble(WeightSpec.power(0.5, (0.0,)), g)
    x = g.nodes[:, 0]
    h1w = norms(sysm, x * (1 - x)).h1w
    assert h1w**2 == pytest.approx(22.0 / 105.0, rel=1e-5)


def test_conormal_trace_of_linear_field():
    sysm = assemble(WeightSpec.constant(2.0), build_grid(Domain.interval(0.0, 1.0), 11))
    x = sysm.grid.nodes[:, 0]
    # w du/dn = 2 * (+-1) at the two ends
    assert conormal_trace(sysm, x) == pytest.approx([-2.0, 2.0])


def test_dump_triplets(tmp_path, string_system):
    paths = string_system.dump_triplets(tmp_path)
    assert paths
    data = np.loadtxt(paths[0], comments="#")
    n = string_system.grid.n_nodes
    K = sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(n, n))
    assert abs(K - string_system.K_full).max() < 1e-12 * abs(string_system.K_full).max()


def test_invalid_vectors_raise(string_system):
    with pytest.raises(ParameterError):
        string_system.as_full(np.zeros(7))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.05, 0.95))
def test_green_identity_property(seed, alpha):
    rng = np.random.default_rng(seed)
    sysm = assemble(WeightSpec.power(alpha, (0.1,)), build_grid(Domain.interval(-1.0, 1.0), 41))
    y, z = rng.standard_normal((2, sysm.grid.n_nodes))
    assert green_identity_residual(sysm, y, z) < 1e-12
    e = y @ (sysm.K_full @ y)
    assert e >= -1e-12 * abs(e)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), nx=st.integers(3, 9), ny=st.integers(3, 9))
def test_2d_assembly_property(seed, nx, ny):
    rng = np.random.default_rng(seed)
    c = tuple(rng.uniform(0.2, 0.8, 2))
    sysm = assemble(WeightSpec.power(rng.uniform(0.1, 1.9), c, dimension=2),
                    build_grid(Domain.rectangle(0.0, 1.0, 0.0, 1.0), (nx, ny)))
    K = sysm.K_full
    assert abs(K - K.T).max() == 0.0
    assert np.abs(K @ np.ones(K.shape[0])).max() < 1e-12 * abs(K).max()
    y, z = rng.standard_normal((2, sysm.grid.n_nodes))
    assert green_identity_residual(sysm, y, z) < 1e-12


def test_norms_of_sine_mode():
    sysm = assemble(WeightSpec.constant(), build_grid(Domain.interval(0.0, 1.0), 2001))
    y = np.sin(np.pi * sysm.grid.nodes[:, 0])
    nr = norms(sysm, y)
    assert nr.h1w == pytest.approx(np.pi / np.sqrt(2), rel=1e-6)
    assert nr.l2 == pytest.approx(1 / np.sqrt(2), rel=1e-6)
    assert norms(sysm, 0 * y).h1w == 0.0


def test_elliptic_solve_second_order_in_l2():
    from degenwave import solve_dirichlet_zero
    errs = []
    for n in (41, 81, 161):
        sysm = assemble(WeightSpec.constant(), build_grid(Domain.interval(0.0, 1.0), n))
        x = sysm.grid.nodes[:, 0]
        u = sysm.extend(solve_dirichlet_zero(sysm, np.pi**2 * np.sin(np.pi * x)))
        e = u - np.sin(np.pi * x)
        errs.append(np.sqrt(e @ (sysm.mass * e)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenwave import (Domain, ParameterError, WeightSpec, assemble, build_grid, dirichlet_constant,
                       dirichlet_map, dirichlet_map_bound, dstar_identity_check,
                       flux_projection_residual, solve_dirichlet_zero, solve_lifted_bvp, trace_norms)


def _oracle(x):
    return (np.sign(x) * np.abs(x) ** 0.5 + 1.0) / 2.0


def test_string_lift_is_linear(string_system):
    x = string_system.grid.nodes[:, 0]
    y = dirichlet_map(string_system, np.array([2.0, -1.0]))
    assert y == pytest.approx(2.0 - 3.0 * x, abs=1e-12)


def test_zero_trace_gives_zero_lift(string_system):
    assert not np.any(dirichlet_map(string_system, np.zeros(2)))


def test_degenerate_lift_converges():
    spec = WeightSpec.power(0.5, (0.0,))
    errs = []
    for n in (250, 500):
        sysm = assemble(spec, build_grid(Domain.interval(-1.0, 1.0), n + 1))
        y = dirichlet_map(sysm, np.array([0.0, 1.0]))
        errs.append(np.abs(y - _oracle(sysm.grid.nodes[:, 0])).max())
    assert errs[1] < errs[0] < 2e-2


def test_degenerate_lift_is_monotone_with_exact_flux():
    sysm = assemble(WeightSpec.power(0.5, (0.0,)), build_grid(Domain.interval(-1.0, 1.0), 1001))
    y = dirichlet_map(sysm, np.array([0.0, 1.0]))
    assert np.all(np.diff(y) >= 0)
    from degenwave import conormal_trace
    flux = conormal_trace(sysm, y)
    # w y' = (1 - alpha) / 2 on the continuum, approached from above
    assert flux[1] == pytest.approx(0.25, rel=0.05)
    assert flux[0] == pytest.approx(-flux[1])


def test_zero_trace_solve_against_manufactured_solution():
    sysm = assemble(WeightSpec.constant(), build_grid(Domain.interval(0.0, 1.0), 401))
    x = sysm.grid.nodes[:, 0]
    u = solve_dirichlet_zero(sysm, np.pi**2 * np.sin(np.pi * x))
    assert np.abs(u - np.sin(np.pi * x[sysm.grid.interior])).max() < 1e-4


def test_divergence_load_matches_strong_form():
    # the vector load enters as + div(F); div(cos(pi x)) = -pi sin(pi x)
    sysm = assemble(WeightSpec.constant(), build_grid(Domain.interval(0.0, 1.0), 401))
    x = sysm.grid.nodes[:, 0]
    a = solve_dirichlet_zero(sysm, fvec=np.cos(np.pi * x))
    b = solve_dirichlet_zero(sysm, f=-np.pi * np.sin(np.pi * x))
    assert np.abs(a - b).max() < 1e-4


def test_potential_term_and_sign(string_system):
    x = string_system.grid.nodes[:, 0]
    f = np.ones_like(x)
    u0 = solve_dirichlet_zero(string_system, f)
    u1 = solve_dirichlet_zero(string_system, f, V=10.0)
    assert np.all(u1 < u0)
    with pytest.raises(ParameterError):
        solve_dirichlet_zero(string_system, f, V=-1.0)


def test_lifted_bvp_combines_parts(string_system):
    x = string_system.grid.nodes[:, 0]
    v = solve_lifted_bvp(string_system, np.zeros_like(x), np.array([1.0, 1.0]))
    assert v == pytest.approx(np.ones_like(x), abs=1e-12)


def test_trace_norms_2d():
    g = build_grid(Domain.rectangle(0.0, 1.0, 0.0, 1.0), (11, 11))
    tn = trace_norms(g, np.ones(g.boundary.size))
    assert tn.h_half == pytest.approx(2.0)
    assert tn.h1_gamma == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        trace_norms(g, np.ones(3))


def test_lift_bound_constant_is_finite(degen_system, rng):
    battery = [rng.standard_normal(2) for _ in range(20)]
    c = dirichlet_constant(degen_system, battery)
    assert 0 < c < 10
    assert dirichlet_map_bound(degen_system, battery[0]).ratio <= c


def test_square_lift_of_constant(square_system):
    y = dirichlet_map(square_system, np.full(square_system.n_boundary, 3.0))
    assert y == pytest.approx(3.0, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_duality_identities_property(degen_basis, square_basis, seed):
    rng = np.random.default_rng(seed)
    for b in (degen_basis, square_basis):
        sysm = b.system
        psi = rng.standard_normal(sysm.n_boundary)
        z = rng.standard_normal(sysm.n_interior)
        assert dstar_identity_check(sysm, psi, z) < 1e-10
        assert flux_projection_residual(b, psi).max() < 1e-10

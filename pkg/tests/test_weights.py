import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from degenwave import (Domain, DomainError, ParameterError, WeightKind, WeightSpec,
                       check_boundary_nondegeneracy, estimate_ap_constant, eval_weight,
                       validate_for_domain)
from degenwave.weights import catalog


def test_power_weight_values():
    spec = WeightSpec.power(0.5, (0.0,))
    assert eval_weight(spec, 0.25) == pytest.approx(0.5)
    assert eval_weight(spec, -4.0) == pytest.approx(2.0)
    assert eval_weight(spec, 0.0) == 0.0


def test_power_weight_2d_uses_euclidean_distance():
    spec = WeightSpec.power(1.0, (0.5, 0.5), dimension=2)
    assert eval_weight(spec, (0.8, 0.9)) == pytest.approx(0.5)


def test_constant_and_scale():
    assert eval_weight(WeightSpec.constant(3.0), 0.7) == 3.0
    spec = WeightSpec.power(0.5, (0.0,), scale=2.0)
    assert eval_weight(spec, 0.25) == pytest.approx(1.0)


def test_eval_outside_domain_raises():
    with pytest.raises(DomainError):
        eval_weight(WeightSpec.constant(), 2.0, Domain.interval(0.0, 1.0))


def test_validate_center_and_alpha():
    dom = Domain.interval(-1.0, 1.0)
    validate_for_domain(WeightSpec.power(0.5, (0.0,)), dom)
    with pytest.raises((ParameterError, DomainError)):
        validate_for_domain(WeightSpec.power(1.5, (0.0,)), dom)
    with pytest.raises((ParameterError, DomainError)):
        validate_for_domain(WeightSpec.power(0.5, (2.0,)), dom)
    with pytest.raises((ParameterError, DomainError)):
        validate_for_domain(WeightSpec.power(0.5, (1.0,)), dom)
    validate_for_domain(WeightSpec.power(0.5, (1.0,)), dom, allow_boundary_degeneracy=True)


def test_admissible_alpha_ranges():
    assert WeightSpec.power(0.99, (0.0,)).admissible_alpha()
    assert not WeightSpec.power(1.0, (0.0,)).admissible_alpha()
    assert WeightSpec.power(1.5, (0.5, 0.5), dimension=2).admissible_alpha()
    assert not WeightSpec.power(2.0, (0.5, 0.5), dimension=2).admissible_alpha()


def test_invalid_specs_raise():
    with pytest.raises(ParameterError):
        WeightSpec.constant(0.0)
    with pytest.raises(ParameterError):
        WeightSpec.power(0.5, (0.0, 0.0), dimension=1)


def test_tabulated_interpolates(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("x,w\n0,1\n0.5,2\n1,1\n")
    spec = WeightSpec.from_table_file(path)
    assert spec.kind is WeightKind.TABULATED
    assert eval_weight(spec, 0.25) == pytest.approx(1.5)


def test_mapping_roundtrip():
    spec = WeightSpec.power(0.3, (0.25,), scale=1.5)
    back = WeightSpec.from_mapping(spec.to_mapping())
    assert back.kind == spec.kind and back.alpha == spec.alpha
    assert back.center == spec.center and back.scale == spec.scale


def test_constant_ap_is_exactly_one():
    rep = estimate_ap_constant(WeightSpec.constant(), Domain.interval(0.0, 1.0), 2.0, 8)
    assert all(c == 1.0 for c in rep.per_level_constant)
    assert rep.stabilized


def test_ap_dichotomy():
    dom = Domain.interval(-1.0, 1.0)
    good = estimate_ap_constant(WeightSpec.power(0.5, (0.0,)), dom, 2.0, 12)
    bad = estimate_ap_constant(WeightSpec.power(1.5, (0.0,)), dom, 2.0, 12)
    assert good.stabilized and good.estimate == pytest.approx(1.3229, abs=1e-3)
    assert not bad.stabilized
    assert bad.growth(6, 12) > 5.0


def test_ap_2d_stabilizes_for_admissible_power():
    dom = Domain.rectangle(0.0, 1.0, 0.0, 1.0)
    rep = estimate_ap_constant(WeightSpec.power(0.5, (0.5, 0.5), dimension=2), dom, 2.0, 7)
    assert rep.per_level_constant[-1] < 3.0


def test_boundary_nondegeneracy():
    dom = Domain.interval(-1.0, 1.0)
    spec = WeightSpec.power(0.5, (0.0,))
    assert check_boundary_nondegeneracy(spec, dom, 0.25).lambda_floor == pytest.approx(np.sqrt(0.5))
    assert not check_boundary_nondegeneracy(spec, dom, 0.6).ok
    with pytest.raises(ParameterError):
        check_boundary_nondegeneracy(spec, dom, 0.0)


def test_catalog_entries_are_valid():
    for name, (spec, dom) in catalog().items():
        assert spec.dimension == dom.dimension, name


@settings(max_examples=50, deadline=None)
@example(alpha=1.0, c=7.334445657024228e-216, x=0.0, factor=1.0)
@given(alpha=st.floats(0.01, 1.9), c=st.floats(-0.9, 0.9), x=st.floats(-1.0, 1.0),
       factor=st.floats(0.1, 10.0))
def test_power_weight_properties(alpha, c, x, factor):
    spec = WeightSpec.power(alpha, (c,))
    w = eval_weight(spec, x)
    assert w >= 0.0
    assert w == pytest.approx(abs(x - c) ** alpha, rel=1e-12, abs=1e-300)
    assert eval_weight(spec.scaled(factor), x) == pytest.approx(factor * w, rel=1e-12, abs=1e-300)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.05, 0.95))
def test_ap_running_sup_is_monotone(alpha):
    rep = estimate_ap_constant(WeightSpec.power(alpha, (0.0,)), Domain.interval(-1.0, 1.0), 2.0, 8)
    c = np.array(rep.per_level_constant)
    assert np.all(np.diff(c) >= 0.0)
    assert c[0] >= 1.0 - 1e-12

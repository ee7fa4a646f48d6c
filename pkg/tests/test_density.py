import math

import numpy as np
import pytest
from scipy.integrate import quad

from resonance_atlas import density as dn
from resonance_atlas.density import QuadratureSpec

# frozen after first computation; guards against silent regressions
C3_GOLDEN = 1.889806225643697


def test_endpoints_are_exactly_zero():
    assert dn.angular_density(3, 0.0) == 0.0
    assert dn.angular_density(3, math.pi) == 0.0


def test_symmetry_about_midpoint():
    for x in [0.1, 0.3, 0.7, 1.2]:
        a = dn.angular_density(3, math.pi / 2 + x)
        b = dn.angular_density(3, math.pi / 2 - x)
        assert abs(a - b) < 1e-8


def test_quadrature_matches_closed_form():
    worst = 0.0
    for th in np.linspace(0.05, math.pi - 0.05, 50):
        diff = abs(dn.angular_density(3, float(th))
                   - dn.angular_density_d3_closed(float(th)))
        worst = max(worst, diff)
    assert worst <= 1e-6


def test_closed_form_endpoint_limits():
    # the density vanishes linearly with slope 4/3, so 2e-3 at theta = 1e-3
    assert abs(dn.angular_density_d3_closed(1e-3)) < 2e-3
    assert abs(dn.angular_density_d3_closed(math.pi - 1e-3)) < 2e-3
    for x in [0.2, 0.9]:
        assert abs(dn.angular_density_d3_closed(math.pi / 2 + x)
                   - dn.angular_density_d3_closed(math.pi / 2 - x)) < 1e-10


def test_dimension_validation():
    for bad in [2, 4, 1]:
        with pytest.raises(ValueError):
            dn.angular_density(bad, 1.0)


def test_derivative_vanishes_at_midpoint():
    assert abs(dn.angular_density_deriv(3, math.pi / 2)) < 1e-8


def test_derivative_matches_finite_difference():
    step = 1e-4
    for theta in [0.3, 1.0, 1.9, 2.7]:
        fd = (dn.angular_density(3, theta + step)
              - dn.angular_density(3, theta - step)) / (2 * step)
        assert abs(dn.angular_density_deriv(3, theta) - fd) < 1e-5


def test_derivative_near_axis_limit():
    assert abs(dn.angular_density_deriv(3, 1e-3)
               - dn.angular_density_deriv_at_zero(3)) < 1e-2


def test_derivative_at_zero_closed_forms():
    assert dn.angular_density_deriv_at_zero(3) == pytest.approx(4.0 / 3.0, abs=1e-14)
    assert dn.angular_density_deriv_at_zero(5) == pytest.approx(4.0 / 45.0, abs=1e-14)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_derivative_at_zero_integral_form(d):
    integral = quad(lambda t: math.sqrt(t * t - 1.0) * t ** (-(d + 1)),
                    1.0, np.inf, epsabs=1e-12, epsrel=1e-12)[0]
    assert abs(4.0 / math.factorial(d - 2) * integral
               - dn.angular_density_deriv_at_zero(d)) < 1e-8


def test_weyl_constant_positive_and_frozen():
    c3 = dn.weyl_constant(3)
    assert c3 > 0
    assert abs(c3 - C3_GOLDEN) < 1e-7


def test_weyl_constant_2d_agreement():
    assert abs(dn.weyl_constant(3) - dn.weyl_constant_2d(3)) < 1e-5


def test_tail_bound_controls_truncation():
    for T in [30.0, 50.0]:
        h_T = dn.angular_density(3, 1.0, QuadratureSpec(truncation_radius=T))
        h_2T = dn.angular_density(3, 1.0, QuadratureSpec(truncation_radius=2 * T))
        assert abs(h_T - h_2T) <= dn.angular_density_tail_bound(3, T)


def test_sector_density_telescoping():
    v = (dn.sector_density(3, 0.3, 0.9) + dn.sector_density(3, 0.9, 1.7)
         - dn.sector_density(3, 0.3, 1.7))
    assert abs(v) < 1e-8


def test_sector_density_nonnegative():
    for phi, theta in [(0.2, 0.5), (0.5, 1.2), (1.2, 2.2), (2.2, 2.9)]:
        assert dn.sector_density(3, phi, theta) >= -1e-8


def test_sector_density_total_limit():
    eps = 1e-3
    total = dn.sector_density(3, eps, math.pi - eps)
    target = 2 * math.pi * 3 * dn.weyl_constant(3) - 2 * dn.angular_density_deriv_at_zero(3)
    assert abs(total - target) < 1e-2


def test_sector_density_argument_order():
    with pytest.raises(ValueError):
        dn.sector_density(3, 1.0, 0.5)


def test_near_axis_coefficient_relations():
    s = dn.sector_density(3, 0.3, 0.9) / (2 * math.pi * 3)
    diff = dn.near_axis_coefficient(3, 0.9) - dn.near_axis_coefficient(3, 0.3)
    assert abs(diff - s) < 1e-8


def test_near_axis_coefficient_limit_positive():
    target = dn.angular_density_deriv_at_zero(3) / (2 * math.pi * 3)
    assert abs(dn.near_axis_coefficient(3, 1e-3) - target) < 1e-3
    assert target > 0


def test_near_axis_coefficient_at_midpoint():
    # h'(pi/2) = 0 and the half-integral is half the full one, so the
    # coefficient collapses to c_3/2 -- the golden value for this operation
    assert abs(dn.near_axis_coefficient(3, math.pi / 2)
               - dn.weyl_constant(3) / 2.0) < 1e-8


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(truncation_radius=0.5)


def test_quadrature_failure_carries_estimate():
    from resonance_atlas.errors import QuadratureError
    starved = QuadratureSpec(abs_tol=1e-16, rel_tol=1e-16, max_subdivisions=10)
    with pytest.raises(QuadratureError) as err:
        dn.angular_density(3, 1.0, starved)
    assert err.value.estimate == pytest.approx(0.4266579, abs=1e-4)
    assert err.value.achieved_error is not None


def test_density_table_build_and_invariants(tmp_path):
    table = dn.build_density_table(3, 21)
    table.validate(tol=1e-8)
    assert table.h[0] == 0.0 and table.h[-1] == 0.0
    assert table.h_prime[0] == pytest.approx(4.0 / 3.0)
    assert np.all(table.h >= -1e-12)

    csv_path = tmp_path / "t.csv"
    table.to_csv(csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "theta,h,h_prime"
    assert len(lines) == 22

    json_path = tmp_path / "t.json"
    table.to_json(json_path)
    back = dn.DensityTable.from_json(json_path)
    assert back.d == 3
    assert np.allclose(back.h, table.h, atol=0)
    assert back.c_d == table.c_d
    back.validate(tol=1e-8)

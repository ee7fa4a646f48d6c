import cmath
import math

import numpy as np
import pytest

from resonance_atlas import special as sp
from resonance_atlas.errors import EvaluationOverflowError


def test_phase_at_branch_point():
    assert sp.bessel_phase(1.0) == 0


def test_phase_on_unit_interval():
    # ln(2 + sqrt(3)) - sqrt(3)/2 at z = 1/2
    expected = math.log(2.0 + math.sqrt(3.0)) - math.sqrt(3.0) / 2.0
    got = sp.bessel_phase(0.5)
    assert abs(got - expected) < 1e-12
    assert abs(got.imag) < 1e-15


def test_phase_domain_errors():
    for bad in [0.0, -0.5, 1.5, 2 - 1j, -3j]:
        with pytest.raises(ValueError):
            sp.bessel_phase(bad)


def test_phase_vanishes_on_critical_curve():
    s0 = sp.coth_fixed_point()
    for s in np.linspace(0.05, s0 * 0.999, 25):
        for sign in (+1, -1):
            p = sp.critical_curve_point(float(s), sign)
            assert abs(sp.bessel_phase(p).real) < 1e-9


def test_phase_sign_structure_along_rays():
    for theta in np.linspace(0.05, math.pi - 0.05, 19):
        m = sp.critical_curve_modulus(float(theta))
        e = cmath.exp(1j * float(theta))
        assert sp.bessel_phase(0.7 * m * e).real > 0
        assert sp.bessel_phase(1.4 * m * e).real < 0


@pytest.mark.parametrize("radius", [0.3, 0.9, 1.0, 1.5, 7.0, 40.0])
def test_phase_continuity_along_arcs(radius):
    # no branch jumps: successive samples differ by O(arc step)
    thetas = np.linspace(1e-3, math.pi - 1e-3, 1001)
    vals = sp.bessel_phase(radius * np.exp(1j * thetas))
    steps = np.abs(np.diff(vals))
    arc_step = radius * (thetas[1] - thetas[0])
    # |d rho/dz| = |sqrt(1-z^2)/z| <= (1 + |z|)/|z| on the arc
    bound = 3.0 * (1.0 + 1.0 / radius) * arc_step
    assert steps.max() < bound


def test_coth_fixed_point():
    s0 = sp.coth_fixed_point()
    assert abs(1.0 / math.tanh(s0) - s0) < 1e-12
    assert abs(s0 - 1.19968) < 1e-4


def test_curve_point_at_fixed_point():
    s0 = sp.coth_fixed_point()
    p = sp.critical_curve_point(s0, +1)
    assert abs(p.real) < 1e-10
    assert abs(p.imag - math.sqrt(s0 * s0 - 1.0)) < 1e-12
    assert abs(p.imag - 0.662742) < 1e-5


def test_curve_point_small_parameter_limit():
    p = sp.critical_curve_point(1e-4, +1)
    assert abs(p - 1.0) < 1e-3


def test_curve_point_sign_symmetry():
    for s in [0.2, 0.7, 1.1]:
        plus = sp.critical_curve_point(s, +1)
        minus = sp.critical_curve_point(s, -1)
        assert minus.real == -plus.real
        assert minus.imag == plus.imag


def test_curve_point_domain():
    with pytest.raises(ValueError):
        sp.critical_curve_point(1.5, +1)
    with pytest.raises(ValueError):
        sp.critical_curve_point(0.0, +1)


def test_curve_modulus_values():
    s0 = sp.coth_fixed_point()
    assert abs(sp.critical_curve_modulus(math.pi / 2) - math.sqrt(s0 ** 2 - 1)) < 1e-12
    assert abs(sp.critical_curve_modulus(1e-3) - 1.0) < 1e-2
    for theta in np.linspace(0.1, math.pi / 2, 9):
        assert abs(sp.critical_curve_modulus(float(theta))
                   - sp.critical_curve_modulus(math.pi - float(theta))) < 1e-12
    with pytest.raises(ValueError):
        sp.critical_curve_modulus(0.0)
    with pytest.raises(ValueError):
        sp.critical_curve_modulus(math.pi)


def test_curve_constants_table():
    table = sp.build_curve_constants(61)
    s0 = sp.coth_fixed_point()
    lo = math.sqrt(s0 * s0 - 1.0)
    assert np.all(table.moduli > lo - 1e-9)
    assert np.all(table.moduli < 1.0 + 1e-9)
    assert np.max(np.abs(table.moduli - table.moduli[::-1])) < 1e-10


def test_ray_point():
    rp = sp.ray_point(2.0, 1.3)
    assert rp.rho_value == sp.bessel_phase(2.0 * cmath.exp(1.3j))
    with pytest.raises(ValueError):
        sp.ray_point(-1.0, 1.0)
    with pytest.raises(ValueError):
        sp.ray_point(1.0, 3.5)


# --- spherical Bessel / Hankel ---------------------------------------------

def test_bessel_closed_forms():
    assert abs(sp.sph_bessel_j(0, 1.0) - math.sin(1.0)) < 1e-14
    assert abs(sp.sph_hankel1(0, 1j) - (-math.exp(-1.0))) < 1e-14
    z = 0.7 - 0.3j
    assert abs(sp.sph_hankel1(0, z) - (-1j * np.exp(1j * z) / z)) < 1e-13
    assert abs(sp.sph_bessel_j(1, z) - (np.sin(z) / z ** 2 - np.cos(z) / z)) < 1e-13


def test_bessel_at_origin():
    assert sp.sph_bessel_j(0, 0.0) == 1.0
    assert sp.sph_bessel_j(3, 0.0) == 0.0
    assert sp.sph_bessel_j_deriv(1, 0.0) == pytest.approx(1.0 / 3.0)
    with pytest.raises(ValueError):
        sp.sph_hankel1(0, 0.0)


def test_bessel_order_validation():
    with pytest.raises(ValueError):
        sp.sph_bessel_j(-1, 1.0)


def test_wronskian_identity():
    # j h1' - j' h1 = i / z^2
    rng = np.random.default_rng(3)
    for ell in [0, 1, 2, 5, 11, 23, 37, 50]:
        z = complex(rng.uniform(-20, 20), rng.uniform(-8, 8))
        if abs(z) < 0.5:
            z += 2.0
        w = (sp.sph_bessel_j(ell, z) * sp.sph_hankel1_deriv(ell, z)
             - sp.sph_bessel_j_deriv(ell, z) * sp.sph_hankel1(ell, z))
        target = 1j / z ** 2
        assert abs(w - target) / abs(target) < 1e-8


def test_bessel_parity():
    rng = np.random.default_rng(5)
    for ell in [0, 1, 2, 7, 16]:
        z = complex(rng.uniform(0.5, 10), rng.uniform(-3, 3))
        lhs = sp.sph_bessel_j(ell, -z)
        rhs = (-1) ** ell * sp.sph_bessel_j(ell, z)
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_bessel_accuracy_against_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40

    def ref_j(ell, z):
        z = mp.mpc(z)
        return complex(mp.sqrt(mp.pi / (2 * z)) * mp.besselj(ell + mp.mpf(1) / 2, z))

    def ref_h(ell, z):
        z = mp.mpc(z)
        return complex(mp.sqrt(mp.pi / (2 * z)) * mp.hankel1(ell + mp.mpf(1) / 2, z))

    for ell in [0, 3, 20, 100, 200]:
        for z in [2.0 + 0.1j, 30 - 10j, 200 + 5j, 990 + 20j, 5 - 2j]:
            jr = ref_j(ell, z)
            if abs(jr) > 1e-290:
                assert abs(sp.sph_bessel_j(ell, z) - jr) / abs(jr) < 1e-10
            hr = ref_h(ell, z)
            if 1e-290 < abs(hr) < 1e290:
                assert abs(sp.sph_hankel1(ell, z) - hr) / abs(hr) < 1e-10


def test_hankel_overflow_reported():
    # order growth at tiny argument exceeds double range and must raise
    with pytest.raises(EvaluationOverflowError):
        sp.sph_hankel1(60, 1e-5)
    with pytest.raises(EvaluationOverflowError):
        sp.sph_bessel_j(0, 800j)  # e^{|Im z|} overflows


def test_log_pair_matches_plain_values():
    z = np.array([0.5 - 2j, 3 + 1j, -4 - 0.5j])
    jm1, jl, s = sp.sph_j_pair_log(3, z)
    plain = sp.sph_bessel_j(3, z)
    assert np.allclose(jl * np.exp(s), plain, rtol=1e-12)
    hm1, hl, sh = sp.sph_h_pair_log(3, z, kind=1)
    plainh = sp.sph_hankel1(3, z)
    assert np.allclose(hl * np.exp(sh), plainh, rtol=1e-12)


def test_log_pair_survives_extreme_magnitudes():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 60
    for ell, z in [(60, 1e-5 + 0j), (200, 3.0 + 0j), (100, 0.5 - 0.2j)]:
        hm1, hl, s = sp.sph_h_pair_log(ell, np.array([z]), kind=1)
        mine = complex(np.log(hl[0]) + s[0])
        ref = mp.log(mp.sqrt(mp.pi / (2 * mp.mpc(z)))
                     * mp.hankel1(ell + mp.mpf(1) / 2, mp.mpc(z)))
        assert abs(mine.real - float(ref.real)) < 1e-10 * max(1, abs(mine.real))


def test_gamma_real():
    assert sp.gamma_real(1.0) == 1.0
    assert sp.gamma_real(4.0) == 6.0
    assert abs(sp.gamma_real(2.5) - 3.0 * math.sqrt(math.pi) / 4.0) < 1e-14
    assert abs(sp.gamma_real(0.5) - math.sqrt(math.pi)) < 1e-15
    with pytest.raises(ValueError):
        sp.gamma_real(-1.0)
    with pytest.raises(ValueError):
        sp.gamma_real(1.3)

import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import bump_fourier, kendall_tau, shear_distortion
from qre_toolkit.exterior import Multivector
from qre_toolkit.pullback import (AffineMapSpec, RotatedFamilySpec, TestForm, TrigForm, annulus_samples,
                                  ball_rule, bump_integral, decay_integral, evaluate_hQ, exact_decay_check,
                                  hQ_central_differential, hQ_differential, hQ_distortion_estimate, hQ_inverse,
                                  limit_discrepancy, norm_bound_check, normalized_pullback_affine, pullback_affine,
                                  quarter_turn, rotation_log, bump_form_battery, trig_battery, unit_ball_volume)


def test_affine_pullback_scales_by_degree():
    form = Multivector(3, {(1,): 2, (1, 3): Fraction(1, 2)})
    out = pullback_affine(form, AffineMapSpec((0.0, 1.0, 2.0), 3.0))
    assert out.coefficient((1,)) == 6 and out.coefficient((1, 3)) == Fraction(9, 2)


def test_normalized_pullback_value():
    out = normalized_pullback_affine(Multivector.e(3, 1, 2), AffineMapSpec((0.0, 0.0, 0.0), 7.3))
    assert out.coefficient((1, 2)) == pytest.approx((4 * math.pi / 3) ** (-2 / 3), rel=1e-15)


def test_normalized_pullback_rejects_bad_degree():
    with pytest.raises(ValueError):
        normalized_pullback_affine(Multivector.top(3), AffineMapSpec((0.0, 0.0, 0.0), 1.0))
    with pytest.raises(ValueError):
        AffineMapSpec((0.0,), 0.0)


def test_rotation_log_inverts_expm():
    from scipy.linalg import expm
    rng = np.random.default_rng(2)
    for n in (2, 3, 4):
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        log = rotation_log(q)
        assert np.allclose(log, -log.T) and np.allclose(expm(log), q)
    half = np.diag([-1.0, -1.0, 1.0])
    assert np.allclose(expm(rotation_log(half)), half)


def test_spec_validation():
    with pytest.raises(ValueError):
        RotatedFamilySpec(((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ValueError):
        RotatedFamilySpec(((1.0, 0.0), (0.0, -1.0)))
    assert quarter_turn().balls_disjoint(10)
    assert not RotatedFamilySpec(quarter_turn().Q, j_start=1).balls_disjoint(4)


def test_hQ_is_a_volume_preserving_bijection():
    spec = quarter_turn()
    for region in ("annulus", "inner", "outside"):
        x = annulus_samples(spec, 4, 200, seed=1, region=region)
        assert np.allclose(hQ_inverse(spec, evaluate_hQ(spec, x)), x)
        assert np.allclose(np.linalg.det(hQ_differential(spec, x)), 1.0)
        assert np.allclose(hQ_differential(spec, x), hQ_central_differential(spec, x), atol=1e-6)
    inner = annulus_samples(spec, 5, 10, region="inner")
    a, _ = spec.ball(5)
    assert np.allclose(evaluate_hQ(spec, inner) - a, (inner - a) @ np.asarray(spec.Q).T)


def test_quarter_turn_distortion_matches_shear_bound():
    spec = quarter_turn()
    k = hQ_distortion_estimate(spec, annulus_samples(spec, 3, 20000, seed=0))
    assert k <= shear_distortion(math.pi) * (1 + 1e-9)
    assert k >= 0.99 * shear_distortion(math.pi)


def test_ball_rule_integrates_bump_exactly():
    for n in (2, 3):
        pts, w = ball_rule(np.full(n, 0.2), 0.7, 32)
        phi = TestForm(tuple([0.2] * n), 0.7, (1,))
        assert math.fsum(w * phi.profile(pts)) == pytest.approx(bump_integral(n, 0.7), rel=1e-12)
        assert bump_integral(n, 0.7) == pytest.approx(bump_fourier(n, 0.7, np.zeros(n)), rel=1e-12)
        assert math.fsum(w) == pytest.approx(unit_ball_volume(n) * 0.7**n, rel=1e-12)


def test_battery_supported_in_unit_ball():
    for phi in bump_form_battery(2, 1):
        assert np.linalg.norm(phi.center) + phi.radius < 1


def test_limit_discrepancy_separates_targets():
    spec = quarter_turn()
    for seq in ("centered", "ball_following"):
        rep = limit_discrepancy(spec, 1, seq, j_max=6, nodes=32)
        assert max(rep.correct) < 1e-10
        assert min(rep.wrong) > 0.5


def test_norm_bound_covering():
    res = norm_bound_check(Multivector.e(2, 1, exact=False), "covering")
    assert res.passed
    assert res.D == pytest.approx(4.0, rel=1e-10) and res.K == pytest.approx(1.0)
    assert res.lhs == pytest.approx(2.0, rel=1e-8)


def test_norm_bound_rotated():
    res = norm_bound_check(Multivector.e(2, 2, exact=False), "rotated")
    assert res.passed
    assert res.K <= shear_distortion(math.pi) * (1 + 1e-9)


def test_trig_form_derivative():
    f = TrigForm(2, (((), 1.0, (1, 1), "sin"),))
    d = f.d()
    assert set(d.terms) == {((1,), 1.0, (1, 1), "cos"), ((2,), 1.0, (1, 1), "cos")}
    combined = {}
    for J, c, m, kind in d.d().terms:
        combined[(J, m, kind)] = combined.get((J, m, kind), 0.0) + c
    assert not any(combined.values())
    assert TrigForm(2, (((1,), 1.0, (0, 0), "cos"),)).d().is_zero()


def test_decay_integral_against_fourier_oracle():
    n = 2
    phi = TestForm((0.3, -0.2), 0.5, ())
    m = np.array([1.0, 0.0])
    d_alpha = TrigForm(2, (((1, 2), 1.0, (1, 0), "sin"),))
    for r in (1.0, 4.0, 32.0):
        xi = r * m
        exact = math.sin(xi @ np.asarray(phi.center)) * bump_fourier(n, phi.radius, xi) / math.pi
        assert decay_integral(d_alpha, phi, r) == pytest.approx(exact, abs=1e-12)


def test_decay_check_bounded_for_battery():
    for case, alpha, phi in trig_battery():
        rep = exact_decay_check(case, alpha, phi)
        assert rep.bounded, case
        if any(rep.ratios):
            assert rep.kendall_tau == pytest.approx(kendall_tau(rep.j_values, rep.ratios))

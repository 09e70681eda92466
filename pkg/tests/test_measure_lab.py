import json
import math

import numpy as np
import pytest

from oracles import ball_image_cap_2d, cap_volume_beta, tripled_angle_distortion
from qre_toolkit.measure_lab import (DEFAULT_BATTERY, MapFamily, QuadratureSpec, SpherePoint, TestFunction, area,
                                     battery_json, cap_volume, distortion_estimate, load_battery, local_degree,
                                     polar_ball_mass, sample_family, sphere_jacobian, sphere_volume, spherical_cap,
                                     stereographic, stereographic_diff, stereographic_inv, vague_convergence_report,
                                     winding_F)

SMALL = QuadratureSpec(resolution=256, refine=4)


def test_stereographic_round_trip_and_conformal_factor():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 2))
    p = stereographic(x)
    assert np.allclose(np.linalg.norm(p, axis=-1), 1)
    assert np.allclose(stereographic_inv(p), x)
    jac = sphere_jacobian(p, stereographic_diff(x))
    assert np.allclose(jac, 4 / (1 + np.sum(x * x, axis=-1)) ** 2)
    assert np.allclose(stereographic(np.zeros((1, 2))), [[0, 0, -1]])


def test_pole_is_rejected():
    with pytest.raises(ValueError):
        stereographic_inv(np.array([[0.0, 0.0, 1.0]]))
    with pytest.raises(ValueError):
        SpherePoint((1.0, 1.0, 0.0))


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("alpha", [0.3, 1.2, math.pi / 2, 2.5])
def test_spherical_cap_against_beta(n, alpha):
    assert spherical_cap(n, alpha) == pytest.approx(cap_volume_beta(n, alpha), rel=1e-10)


@pytest.mark.parametrize("center,radius", [((0, 0), 1.0), ((0.5, 0), 0.25), ((-0.75, 0), 0.25), ((1.2, 0.3), 0.6),
                                           ((0, 0), 2.0)])
def test_cap_volume_against_polar_quadrature(center, radius):
    assert cap_volume(2, center, radius) == pytest.approx(ball_image_cap_2d(center, radius), rel=1e-5)


def test_unit_ball_maps_to_hemisphere():
    assert cap_volume(3, (0, 0, 0), 1.0) == pytest.approx(sphere_volume(3) / 2, rel=1e-12)


def test_winding_fixes_equator_and_triples_angle():
    th = np.linspace(-3, 3, 7)
    p = np.stack([np.cos(th), np.zeros_like(th), np.sin(th)], axis=-1)
    q = winding_F(p)
    assert np.allclose(q, np.stack([np.cos(3 * th), np.zeros_like(th), np.sin(3 * th)], axis=-1))
    eq = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0]])
    assert np.allclose(winding_F(eq), eq)


def test_family_geometry():
    for j in (1, 2, 5, 16):
        fam = MapFamily(2, j)
        assert fam.check_disjoint()
        assert np.all(fam.ball_index(fam.centers) == np.arange(j))
    assert MapFamily(2, 4).ball_index(np.array([[0.0, 0.9]]))[0] == -1


def test_map_is_iota_outside_and_continuous_across_boundary():
    fam = MapFamily(2, 3)
    x = np.array([[0.0, 1.5], [1.9, 0.0], [-0.3, -0.8]])
    assert np.allclose(fam.evaluate(x), stereographic(x))
    th = np.linspace(0, 2 * np.pi, 40)
    for i in range(3):
        ring = fam.centers[i] + np.stack([np.cos(th), np.sin(th)], -1) * fam.radius
        inside = fam.evaluate(fam.centers[i] + (ring - fam.centers[i]) * (1 - 1e-9))
        assert np.allclose(inside, stereographic(ring), atol=1e-6)


def test_closed_form_differential_matches_central():
    fam = MapFamily(2, 4)
    rng = np.random.default_rng(1)
    x = rng.uniform(-1.9, 1.9, size=(400, 2))
    x = x[np.linalg.norm(x, axis=-1) < 1.95]
    a, b = fam.jacobian(x, "closed"), fam.jacobian(x, "central")
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1)) < 1e-5


def test_distortion_inside_is_three():
    expected = float(np.max(tripled_angle_distortion(np.linspace(0.1, 6.0, 50))))
    assert expected == pytest.approx(3.0)
    fam = MapFamily(2, 2)
    assert distortion_estimate(fam, QuadratureSpec(resolution=128, refine=1), "inside") == pytest.approx(expected, rel=1e-6)
    assert distortion_estimate(fam, QuadratureSpec(resolution=128, refine=1), "outside") == pytest.approx(1.0, rel=1e-9)


def test_local_degrees():
    fam = MapFamily(2, 2)
    c = fam.centers[0]
    assert local_degree(fam, c, 0.01) == 1
    branch = c + np.array([0.0, fam.radius])
    assert local_degree(fam, branch, 1e-3) == 2
    assert local_degree(fam, [0.0, 1.5], 0.05) == 1


def test_polar_ball_mass_converges_to_exact():
    fam = MapFamily(2, 3)
    exact = fam.ball_mass_exact(1)
    errs = [abs(polar_ball_mass(fam, 1, m) - exact) for m in (64, 128, 256)]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] / exact < 1e-4


def test_grid_masses_match_closed_form():
    fam = MapFamily(2, 2)
    res = area(fam, radius=1.0, quad=SMALL)
    assert res.value == pytest.approx(fam.mass_exact(1.0), rel=2e-3)
    assert not res.flagged
    assert fam.mass_exact(2.0) == pytest.approx(ball_image_cap_2d((0, 0), 2.0) + 2 * 4 * math.pi, rel=1e-5)


def test_area_rejects_region_outside_domain():
    with pytest.raises(ValueError):
        area(MapFamily(2, 1), center=(1.5, 0), radius=1.0, quad=SMALL)


def test_stratified_scheme_is_seeded():
    fam = MapFamily(2, 2)
    q = QuadratureSpec(scheme="stratified", resolution=128, refine=2, seed=5)
    a = sample_family(fam, q).integrate()
    b = sample_family(fam, q).integrate()
    assert a == b
    assert a == pytest.approx(fam.mass_exact(2.0), rel=5e-3)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(scheme="gauss")
    with pytest.raises(ValueError):
        QuadratureSpec(resolution=1)


def test_targets_closed_form():
    t = {f.id: f.target() for f in DEFAULT_BATTERY}
    assert t["bump_right"] == pytest.approx(0.5 * 16 * 0.4 / 15, rel=1e-10)
    assert t["bump_left"] == pytest.approx(0.5 * 16 * 0.3 / 15, rel=1e-10)
    assert t["tent_positive"] == pytest.approx(0.5 * 0.35, rel=1e-10)
    assert t["bump_off_axis"] == pytest.approx(0.0, abs=1e-14)
    assert t["cutoff_unit"] == pytest.approx(1.0, rel=1e-10)


def test_battery_round_trip_and_validation():
    assert load_battery(battery_json(DEFAULT_BATTERY)) == DEFAULT_BATTERY
    with pytest.raises(ValueError, match="leaves"):
        TestFunction("far", "bump", (1.8, 0.0), 0.5)
    with pytest.raises(ValueError, match="unknown field"):
        TestFunction.from_json({"id": "x", "type": "bump", "center": [0, 0], "radius": 0.1, "colour": 1})
    with pytest.raises(ValueError, match="unknown type"):
        TestFunction("x", "gauss", (0.0, 0.0), 0.1)


def test_report_is_deterministic_and_serializable():
    a = vague_convergence_report(2, [1, 2], quad=SMALL)
    b = vague_convergence_report(2, [1, 2], quad=SMALL)
    assert a.to_csv() == b.to_csv()
    doc = json.loads(json.dumps(a.to_json()))
    assert [r["j"] for r in doc["records"]] == [1, 2]
    lines = a.to_csv().splitlines()
    assert lines[0] == "j,A,total,doubling_ratio,K_est,psi_id,I_j,target,abs_err"
    assert len(lines) == 1 + 2 * len(DEFAULT_BATTERY)
    rec = a.records[1]
    assert sum(rec.ball_masses) == pytest.approx(sum(rec.ball_masses_exact), rel=2e-3)

from fractions import Fraction

import pytest

from qre_toolkit.cohomology import (CohomologyClass, RingPresentation, build_cp2, build_cp2bar, build_s2xs2,
                                    build_sphere, build_sphere_product, build_torus, connected_sum,
                                    connected_sum_power, cup, exterior_power_map, from_products, named_ring,
                                    sum_cp2, sum_s2xs2, validate)


def three_manifold_b2():
    """n = 3, b = [1, 2, 2, 1]: x_a . u_b = delta_ab vol, x . y forced to 0."""
    return from_products(3, [1, 2, 2, 1], {((1, 0), (2, 0)): {0: 1}, ((1, 1), (2, 1)): {0: 1}}, name="b1=2")


def s2xs1():
    return from_products(3, [1, 1, 1, 1], {((1, 0), (2, 0)): {0: 1}}, name="S^2 x S^1")


@pytest.mark.parametrize("ring", [
    build_sphere(2), build_sphere(5), build_torus(2), build_torus(3), build_torus(4), build_cp2(), build_cp2bar(),
    build_s2xs2(), build_sphere_product(1, 3), build_sphere_product(2, 4), three_manifold_b2(), s2xs1(),
    sum_cp2(2, 1), sum_s2xs2(3),
], ids=lambda r: r.name or str(r.betti))
def test_builders_are_valid(ring):
    rep = validate(ring)
    assert rep.valid, rep.failures


def test_torus_betti_and_products():
    t = build_torus(4)
    assert t.betti == (1, 4, 6, 4, 1)
    x1, x2 = CohomologyClass.basis(t, 1, 0), CohomologyClass.basis(t, 1, 1)
    assert cup(t, x1, x2) == cup(t, x2, x1).scale(-1)
    assert cup(t, x1, x1).is_zero()


def test_cp2_square_and_orientation():
    for ring, sign in ((build_cp2(), 1), (build_cp2bar(), -1)):
        c = CohomologyClass.basis(ring, 2, 0)
        assert ring.evaluate(cup(ring, c, c)) == sign


def test_connected_sum_betti_and_form():
    r = connected_sum(build_cp2(), build_s2xs2())
    assert r.betti == (1, 0, 3, 0, 1)
    assert validate(r).valid
    f = r.intersection_form()
    assert f.signature == (2, 1) and not f.even


def test_connected_sum_power_edge_cases():
    assert connected_sum_power(build_cp2(), 0).betti == build_sphere(4).betti
    assert connected_sum_power(build_cp2(), 1) is not None
    assert connected_sum_power(build_s2xs2(), 4).betti == (1, 0, 8, 0, 1)
    with pytest.raises(ValueError):
        connected_sum_power(build_cp2(), -1)


def test_connected_sum_dimension_mismatch():
    with pytest.raises(ValueError):
        connected_sum(build_cp2(), build_torus(3))


def test_cup_degree_overflow():
    t = build_torus(2)
    top = CohomologyClass.basis(t, 2, 0)
    with pytest.raises(ValueError):
        cup(t, top, CohomologyClass.basis(t, 1, 0))


def test_validate_reports_associativity_failure():
    # torus(3) with one product flipped breaks associativity or commutativity
    good = build_torus(3)
    sc = {key: val.copy() for key, val in good.sc.items()}
    sc[(1, 1)][0, 1, 0] = -sc[(1, 1)][0, 1, 0]
    sc[(1, 1)][1, 0, 0] = -sc[(1, 1)][1, 0, 0]
    bad = RingPresentation(3, good.betti, good.labels, sc, good.fundamental, "broken")
    rep = validate(bad)
    assert not rep.valid
    assert rep.first_failure[0] == "associativity"
    assert "degrees" in rep.first_failure[1]


def test_validate_reports_duality_failure_with_kernel():
    ring = from_products(4, [1, 0, 2, 0, 1], {((2, 0), (2, 0)): {0: 1}})
    rep = validate(ring)
    assert not rep.valid
    axiom, witness = rep.first_failure
    assert axiom == "poincare_duality" and witness["degree"] == 2
    kern = [Fraction(v) for v in witness["kernel_vector"]]
    pm = ring.pairing_matrix(2)
    assert any(kern) and all(sum(kern[a] * pm[a][b] for a in range(2)) == 0 for b in range(2))


def test_validate_reports_commutativity_failure():
    ring = from_products(2, [1, 2, 1], {((1, 0), (1, 1)): {0: 1}, ((1, 1), (1, 0)): {0: 1}}, symmetrize=False)
    assert validate(ring).first_failure[0] == "graded_commutativity"


def test_json_round_trip():
    for ring in (build_torus(3), sum_cp2(1, 2), three_manifold_b2()):
        back = RingPresentation.from_json(ring.to_json())
        assert back.to_json() == ring.to_json()
        assert validate(back).valid


def test_json_errors_name_the_field():
    data = build_cp2().to_json()
    del data["betti"]
    with pytest.raises(ValueError, match="betti"):
        RingPresentation.from_json(data)
    data = build_cp2().to_json()
    data["betti"] = [1, 0, 1]
    with pytest.raises(ValueError, match="betti"):
        RingPresentation.from_json(data)


def test_named_ring():
    assert named_ring("torus", 3).betti == (1, 3, 3, 1)
    assert named_ring("s2xs2", count=2).betti == (1, 0, 4, 0, 1)
    with pytest.raises(ValueError):
        named_ring("klein")


def test_exterior_power_map_detects_forced_kernel():
    m = exterior_power_map(three_manifold_b2(), 2)
    assert m == [[0, 0]]
    m = exterior_power_map(build_torus(3), 2)
    assert len(m) == 3 and sorted(map(tuple, m)) != [(0, 0, 0)] * 3

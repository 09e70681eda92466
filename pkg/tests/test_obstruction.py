from fractions import Fraction

import numpy as np
import pytest

from oracles import sympy_inertia, sympy_rank, wedge_dict
from qre_toolkit.cohomology import (build_cp2, build_s2xs2, build_sphere, build_torus, from_products, sum_cp2,
                                    sum_s2xs2)
from qre_toolkit.obstruction import (EmbeddingProblem, EmbeddingWitness, NotFound, SearchConfig,
                                     check_betti_bounds, check_definiteness_bounds, check_exterior_power_h1,
                                     necessary_checks, search_embedding, verdict, verify_definiteness_certificate,
                                     witness_residual)


def b1_two_threefold():
    return from_products(3, [1, 2, 2, 1], {((1, 0), (2, 0)): {0: 1}, ((1, 1), (2, 1)): {0: 1}})


def test_betti_bound_certificate():
    res = check_betti_bounds(sum_s2xs2(4))
    assert not res.passed
    assert res.certificate == {"k": 2, "betti_k": 8, "binomial": 6}
    assert check_betti_bounds(sum_s2xs2(3)).passed


def test_exterior_power_certificate_is_a_kernel_vector():
    res = check_exterior_power_h1(b1_two_threefold())
    assert not res.passed and res.derived
    rows = [[Fraction(v) for v in r] for r in res.certificate["map_rows"]]
    kern = [Fraction(v) for v in res.certificate["kernel_vector"]]
    assert any(kern)
    image = [sum(kern[i] * rows[i][c] for i in range(len(rows))) for c in range(len(rows[0]))]
    assert not any(image)
    assert sympy_rank(rows) == res.certificate["rank"] < res.certificate["domain_dim"]


def test_exterior_power_passes_for_torus():
    assert check_exterior_power_h1(build_torus(4)).passed


def test_definiteness_certificate():
    ring = sum_cp2(4, 0)
    res = check_definiteness_bounds(ring)
    assert not res.passed
    cert = res.certificate
    assert (cert["beta_plus"], cert["bound"]) == (4, 3)
    assert verify_definiteness_certificate(cert["gram"], cert)
    assert sympy_inertia(cert["gram"]) == (4, 0)


def test_tampered_certificate_is_rejected():
    cert = check_definiteness_bounds(sum_cp2(4, 0)).certificate
    bad = dict(cert, diagonal=["1", "1", "1", "2"])
    assert not verify_definiteness_certificate(cert["gram"], bad)


def test_definiteness_not_applicable_in_odd_dimension():
    res = check_definiteness_bounds(build_torus(3))
    assert res.passed and res.data == {"applicable": False}
    assert [c.name for c in necessary_checks(build_torus(3))] == ["check_betti_bounds", "check_exterior_power_h1"]


@pytest.mark.parametrize("ring", [build_sphere(4), build_cp2(), build_s2xs2(), build_torus(3)],
                         ids=lambda r: r.name)
def test_search_finds_verified_witness(ring):
    w = search_embedding(ring, SearchConfig(restarts=16))
    assert isinstance(w, EmbeddingWitness)
    assert w.residual < 1e-8
    assert all(m > 1e-6 for m in w.injectivity_margins.values())
    assert abs(witness_residual(ring, w.images) - w.residual) < 1e-12


def test_witness_residual_against_dict_wedge():
    ring = sum_cp2(1, 1)
    w = search_embedding(ring)
    total = 0.0
    for (j, k), sc in ring.sc.items():
        if j < 1 or k < 1 or j + k > ring.n:
            continue
        for a in range(ring.betti[j]):
            for b in range(ring.betti[k]):
                diff = wedge_dict(dict(w.images[(j, a)].terms), dict(w.images[(k, b)].terms))
                for c in range(ring.betti[j + k]):
                    for idx, v in w.images[(j + k, c)].terms.items():
                        diff[idx] = diff.get(idx, 0.0) - float(sc[a, b, c]) * v
                total += sum(v * v for v in diff.values())
    assert abs(total - w.residual) < 1e-12


def test_search_is_deterministic():
    a = search_embedding(sum_s2xs2(2), SearchConfig(seed=7))
    b = search_embedding(sum_s2xs2(2), SearchConfig(seed=7))
    assert a.restart == b.restart and a.residual == b.residual
    assert all(a.images[k] == b.images[k] for k in a.images)


def test_search_reports_not_found_on_obstructed_ring():
    res = search_embedding(sum_s2xs2(4), SearchConfig(restarts=2, max_iters=50))
    assert isinstance(res, NotFound)
    assert res.restarts == 2 and res.best_residual + sum(max(0, 1 - m) for m in res.best_margins.values()) > 0


def test_gradient_matches_central_differences():
    problem = EmbeddingProblem(sum_cp2(1, 1))
    rng = np.random.default_rng(11)
    for _ in range(10):
        theta = rng.normal(size=problem.size)
        g = problem.gradient(theta)
        fd = np.empty_like(g)
        for i in range(problem.size):
            e = np.zeros_like(theta)
            e[i] = 1e-6
            fd[i] = (problem.objective(theta + e) - problem.objective(theta - e)) / 2e-6
        assert np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12) < 1e-4


def test_verdicts():
    assert verdict(build_cp2()).verdict == "Embeds"
    rep = verdict(sum_s2xs2(4))
    assert rep.verdict == "Obstructed" and rep.obstructed_by == "check_betti_bounds"
    rep = verdict(sum_cp2(4, 0))
    assert rep.verdict == "Obstructed" and rep.obstructed_by == "check_definiteness_bounds"
    rep = verdict(b1_two_threefold())
    assert rep.obstructed_by == "check_exterior_power_h1"


def test_unknown_verdict_with_tiny_budget():
    rep = verdict(sum_s2xs2(3), SearchConfig(restarts=1, max_iters=1))
    assert rep.verdict == "Unknown"
    assert "not an obstruction" in rep.note


def test_verdict_rejects_invalid_ring():
    with pytest.raises(ValueError, match="poincare_duality"):
        verdict(from_products(4, [1, 0, 2, 0, 1], {((2, 0), (2, 0)): {0: 1}}))


def test_report_json_has_schema():
    doc = verdict(build_cp2()).to_json(build_cp2(), SearchConfig())
    assert doc["schema"] == "qre-toolkit/1"
    assert doc["witness"]["residual"] < 1e-8


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(restarts=0)
    with pytest.raises(ValueError):
        SearchConfig(tol_residual=-1)
    with pytest.raises(ValueError, match="bogus"):
        SearchConfig.from_json({"bogus": 1})
    assert SearchConfig.from_json({"seed": 3}).seed == 3
